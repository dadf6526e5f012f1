use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_active-flux"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows of a CSV, split on commas, without comments and header.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn columns(text: &str) -> Vec<String> {
    let line = text.lines().find(|l| !l.starts_with('#')).unwrap();
    line.split(',').map(str::to_string).collect()
}

fn run_to(path: &Path, extra: &[&str]) -> String {
    let mut args = vec!["run", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = bin(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    fs::read_to_string(path).unwrap()
}

#[test]
fn sod_run_writes_every_cell() {
    let dir = tempfile::tempdir().unwrap();
    let text = run_to(
        &dir.path().join("sod.csv"),
        &["--problem", "sod", "--fd", "FD6b", "--param", "0.25", "--cfl", "0.25", "--limiter", "on"],
    );
    assert!(text.starts_with("# active-flux run problem=sod model=euler"));
    let cols = columns(&text);
    assert_eq!(cols[..3], ["i", "x_iface", "q_iface_1"]);
    let rho = cols.iter().position(|c| c == "q_avg_1").unwrap();
    let data = rows(&text);
    assert_eq!(data.len(), 100);
    for r in &data {
        let v: f64 = r[rho].parse().unwrap();
        assert!((0.05..=1.1).contains(&v), "density {v}");
    }
}

#[test]
fn zero_end_time_writes_initial_data() {
    let dir = tempfile::tempdir().unwrap();
    let text = run_to(&dir.path().join("a.csv"), &["--cells", "10", "--t-end", "0"]);
    assert!(text.contains("steps=0"));
    let data = rows(&text);
    // interface values of the datum at x = (i + 1) / 10
    for (i, r) in data.iter().enumerate() {
        let x = (i + 1) as f64 / 10.0;
        let want = 0.8 + (-(x - 0.5f64).powi(2) / 0.0025).exp();
        let got: f64 = r[2].parse().unwrap();
        assert!((got - want).abs() < 1e-15, "{i}: {got} vs {want}");
    }
}

#[test]
fn variant_b_and_c_runs_have_extra_columns() {
    let dir = tempfile::tempdir().unwrap();
    let b = run_to(&dir.path().join("b.csv"), &["--variant", "b", "--cells", "20"]);
    let cols = columns(&b);
    assert!(cols.contains(&"q_internal_2_1".to_string()), "{cols:?}");
    assert!(!cols.contains(&"q_internal_3_1".to_string()));
    let c = run_to(
        &dir.path().join("c.csv"),
        &["--variant", "c", "--moments", "2", "--cells", "20", "--cfl", "0.1", "--t-end", "0.01"],
    );
    let cols = columns(&c);
    assert!(c.contains("order=5"), "{c}");
    assert_eq!(cols.last().unwrap(), "q_moment_2_1");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--problem", "burgers-gauss", "--order", "5", "--cells", "50", "--limiter", "on"];
    let first = run_to(&dir.path().join("1.csv"), &args);
    let second = run_to(&dir.path().join("2.csv"), &args);
    assert_eq!(first, second);
}

#[test]
fn convergence_table() {
    let out = bin(&["converge", "--variant", "b", "--cfl", "0.5", "--t-end", "0.01", "--grids", "40,80"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with('#') && l.contains("grids=40,80")), "{text}");
    assert_eq!(columns(&text), ["n_cells", "dx", "err_point", "err_avg", "eoc_point", "eoc_avg"]);
    let data = rows(&text);
    assert_eq!(data.len(), 2);
    assert_eq!(data[0][4], "");
    let eoc: f64 = data[1][5].parse().unwrap();
    assert!(eoc > 4.0, "{eoc}");
}

#[test]
fn stability_reports_cfl_max() {
    let out = bin(&["stability", "--family", "FD7", "--nu-step", "0.01", "--k-samples", "129"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(columns(&text), ["param", "nu", "stable"]);
    let summary: Vec<_> = rows(&text).into_iter().filter(|r| r[1] == "cfl_max").collect();
    assert_eq!(summary.len(), 1);
    let cfl: f64 = summary[0][2].parse().unwrap();
    assert!((cfl - 0.73).abs() < 0.02, "{cfl}");
}

#[test]
fn stability_parameter_sweep() {
    let out = bin(&[
        "stability",
        "--family",
        "FD2",
        "--param-range",
        "1:2:3",
        "--nu-step",
        "0.05",
        "--k-samples",
        "65",
    ]);
    assert!(out.status.success());
    let data = rows(&stdout(&out));
    assert_eq!(data.len(), 3 * 20 + 3);
    for r in data.iter().filter(|r| r[1] == "cfl_max") {
        assert_eq!(r[2], "1.0");
    }
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["stability", "--family", "FD2", "--param-range", "1:0:3"][..],
        &["run", "--problem", "kdv"],
        &["run", "--fd", "FD9"],
        &["run", "--variant", "c", "--order", "3", "--moments", "2"],
        &["run", "--cells", "many"],
    ] {
        let out = bin(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn blow_up_exits_4() {
    let out = bin(&[
        "run",
        "--problem",
        "burgers-riemann",
        "--variant",
        "c",
        "--order",
        "5",
        "--cfl",
        "0.4",
        "--limiter",
        "on",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-physical"));
}
