//! CSV output. Floats use the shortest representation that round-trips, so
//! identical runs give byte-identical files.

use std::io::{self, Write};

use crate::experiment::ConvergenceRow;
use crate::grid::Grid;
use crate::stability::StabilityMap;
use crate::state::State;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// `#`-prefixed comment lines.
pub fn write_header(w: &mut impl Write, lines: &[String]) -> io::Result<()> {
    for l in lines {
        for part in l.lines() {
            writeln!(w, "# {part}")?;
        }
    }
    Ok(())
}

/// One row per cell: interface `i + 1/2`, cell center, then the extra
/// degrees of freedom of the variant.
pub fn write_solution(w: &mut impl Write, header: &[String], grid: &Grid, state: &State) -> io::Result<()> {
    write_header(w, header)?;
    let m = state.components();
    let comps = |prefix: &str| (1..=m).map(|c| format!("{prefix}_{c}")).collect::<Vec<_>>();
    let mut cols: Vec<String> = vec!["i".into(), "x_iface".into()];
    cols.extend(comps("q_iface"));
    cols.push("x_center".into());
    cols.extend(comps("q_avg"));
    let extra = match state {
        State::A(_) => Vec::new(),
        State::B(s) => s.interior.iter().collect(),
        State::C(s) => s.moments.iter().skip(1).collect(),
    };
    let extra_name = if matches!(state, State::B(_)) { "q_internal" } else { "q_moment" };
    for j in 1..=extra.len() {
        cols.extend(comps(&format!("{extra_name}_{j}")));
    }
    writeln!(w, "{}", cols.join(","))?;
    let (ifaces, avgs) = (state.ifaces(), state.avgs());
    for i in 0..grid.n_cells() {
        let mut row = vec![i.to_string(), fmt_f64(grid.iface(i))];
        row.extend((0..m).map(|c| fmt_f64(ifaces.at(c, i))));
        row.push(fmt_f64(grid.center(i)));
        row.extend((0..m).map(|c| fmt_f64(avgs.at(c, i))));
        for f in &extra {
            row.extend((0..m).map(|c| fmt_f64(f.at(c, i))));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_convergence(w: &mut impl Write, header: &[String], rows: &[ConvergenceRow]) -> io::Result<()> {
    write_header(w, header)?;
    writeln!(w, "n_cells,dx,err_point,err_avg,eoc_point,eoc_avg")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.n_cells,
            fmt_f64(r.dx),
            fmt_f64(r.err_point),
            fmt_f64(r.err_avg),
            fmt_opt(r.eoc_point),
            fmt_opt(r.eoc_avg)
        )?;
    }
    Ok(())
}

/// Rows `param,nu,stable`, followed by one `param,cfl_max,<value>` row per
/// parameter.
pub fn write_stability(w: &mut impl Write, header: &[String], map: &StabilityMap) -> io::Result<()> {
    write_header(w, header)?;
    writeln!(w, "param,nu,stable")?;
    for (p, &param) in map.params.iter().enumerate() {
        for (j, &nu) in map.nus.iter().enumerate() {
            writeln!(w, "{},{},{}", fmt_f64(param), fmt_f64(nu), u8::from(map.get(p, j)))?;
        }
    }
    for (p, &param) in map.params.iter().enumerate() {
        writeln!(w, "{},cfl_max,{}", fmt_f64(param), fmt_f64(map.cfl_max(p)))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{Field, StateC};

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn moment_columns() {
        let g = Grid::unit(2).unwrap();
        let s = State::C(StateC {
            ifaces: Field::scalar(vec![1.0, 2.0]),
            moments: vec![Field::scalar(vec![3.0, 4.0]), Field::scalar(vec![5.0, 6.0])],
        });
        let mut out = Vec::new();
        write_solution(&mut out, &["test".into()], &g, &s).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "# test");
        assert_eq!(lines[1], "i,x_iface,q_iface_1,x_center,q_avg_1,q_moment_1_1");
        assert_eq!(lines[2], "0,0.5,1.0,0.25,3.0,5.0");
    }
}
