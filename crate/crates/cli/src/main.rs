//! `active-flux`: simulation runs, convergence studies and von Neumann
//! stability scans, all written as CSV.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use active_flux::experiment::{convergence, run};
use active_flux::output::{write_convergence, write_solution, write_stability};
use active_flux::problems::Problem;
use active_flux::schemes::{RkScheme, TimeQuadrature, VariantConfig};
use active_flux::stability::{scan_region, DEFAULT_K_SAMPLES, DEFAULT_NU_RESOLUTION};
use active_flux::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "active-flux", version, about = "Arbitrary-order Active Flux solvers and stability analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write the final state.
    Run(RunArgs),
    /// Grid-refinement study against the exact solution.
    Converge(ConvergeArgs),
    /// Scan the (parameter, CFL) plane of a scheme family for linear advection.
    Stability(StabilityArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    A,
    B,
    C,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rk {
    Rk3,
    Rk5,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuadKind {
    Lobatto,
    Equidistant,
}

#[derive(Args)]
struct SchemeArgs {
    #[arg(long, value_enum, default_value = "a")]
    variant: Variant,
    /// Nominal order; picks a default tableau (A), node set (B) or moment count (C).
    #[arg(long)]
    order: Option<usize>,
    /// Finite-difference tableau (variant A).
    #[arg(long)]
    fd: Option<String>,
    /// Free parameter of the tableau.
    #[arg(long, allow_hyphen_values = true)]
    param: Option<f64>,
    /// Interior node offsets in units of dx (variant B).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    xi: Option<Vec<f64>>,
    /// Number of time quadrature nodes (variant B).
    #[arg(long = "quad-m")]
    quad_m: Option<usize>,
    #[arg(long, value_enum, default_value = "lobatto")]
    quadrature: QuadKind,
    /// Highest evolved moment (variant C); the order is this plus 3.
    #[arg(long)]
    moments: Option<usize>,
    #[arg(long, value_enum, default_value = "off")]
    limiter: Switch,
    #[arg(long, value_enum, default_value = "rk3")]
    rk: Rk,
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long, default_value = "advection-gauss")]
    problem: String,
    #[arg(long, default_value_t = 0.4)]
    cfl: f64,
    /// End time; defaults to the preset's.
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value_t = 100)]
    cells: usize,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_delimiter = ',', default_value = "40,80,160,320")]
    grids: Vec<usize>,
}

#[derive(Args)]
struct StabilityArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// A tableau name (parameter `a`), `B` (parameter `xi`, nodes at `+-xi`)
    /// or `C` (parameter = order).
    #[arg(long)]
    family: String,
    /// `start:stop:count`, or a single value.
    #[arg(long = "param-range", allow_hyphen_values = true)]
    param_range: Option<String>,
    /// `start:stop`; CFL samples are multiples of `--nu-step` in this range.
    #[arg(long = "nu-range", default_value = "0:1")]
    nu_range: String,
    #[arg(long = "nu-step", default_value_t = DEFAULT_NU_RESOLUTION)]
    nu_step: f64,
    #[arg(long = "k-samples", default_value_t = DEFAULT_K_SAMPLES)]
    k_samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Solver(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownProblem(_)
            | Error::UnknownTableau(_)
            | Error::UnexpectedParameter(_)
            | Error::UnsupportedOrder(_)
            | Error::UnsupportedQuadrature(_)
            | Error::UnsupportedModel(_)
            | Error::InvalidConfig(_) => Failure::Usage(e.to_string()),
            e => Failure::Solver(e),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn a_preset(order: usize) -> Result<(&'static str, Option<f64>), Failure> {
    Ok(match order {
        3 => ("FD3", None),
        4 => ("FD4b", Some(1.0)),
        5 => ("FD5b", Some(1.55)),
        6 => ("FD6b", Some(2.0)),
        7 => ("FD7", Some(2.5)),
        8 => ("FD8a", None),
        _ => return Err(usage(format!("no variant A preset of order {order}"))),
    })
}

fn b_preset(order: usize) -> Result<(Vec<f64>, usize), Failure> {
    Ok(match order {
        3 => (vec![], 3),
        5 => (vec![-0.415, 0.415], 4),
        7 => (vec![-0.48, -0.41, 0.41, 0.48], 5),
        _ => return Err(usage(format!("no variant B preset of order {order}"))),
    })
}

impl SchemeArgs {
    fn rk(&self) -> RkScheme {
        match self.rk {
            Rk::Rk3 => RkScheme::Rk3,
            Rk::Rk5 => RkScheme::Rk5,
        }
    }

    fn quadrature(&self, m: usize) -> TimeQuadrature {
        match self.quadrature {
            QuadKind::Lobatto => TimeQuadrature::Lobatto(m),
            QuadKind::Equidistant => TimeQuadrature::Equidistant(m),
        }
    }

    fn b_config(&self, xi: Vec<f64>, default_m: usize) -> VariantConfig {
        VariantConfig::b(&xi, self.quadrature(self.quad_m.unwrap_or(default_m)))
    }

    fn config(&self) -> Result<VariantConfig, Failure> {
        let config = match self.variant {
            Variant::A => {
                let (fd, param) = match (&self.fd, self.order) {
                    (Some(fd), _) => (fd.as_str(), self.param),
                    (None, Some(order)) => {
                        let (fd, p) = a_preset(order)?;
                        (fd, self.param.or(p))
                    }
                    (None, None) => ("FD3", self.param),
                };
                VariantConfig::a(fd, param)
            }
            Variant::B => {
                let (xi, m) = match (&self.xi, self.order) {
                    (Some(xi), _) => (xi.clone(), xi.len() + 3),
                    (None, order) => b_preset(order.unwrap_or(5))?,
                };
                self.b_config(xi, m)
            }
            Variant::C => {
                let order = match (self.moments, self.order) {
                    (Some(k), Some(o)) if k + 3 != o => {
                        return Err(usage(format!("--moments {k} implies order {}, not {o}", k + 3)))
                    }
                    (Some(k), _) => k + 3,
                    (None, order) => order.unwrap_or(3),
                };
                VariantConfig::c(order)
            }
        };
        let config = config.with_limiter(matches!(self.limiter, Switch::On)).with_rk(self.rk());
        config.order()?;
        Ok(config)
    }
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn check_cfl(cfl: f64) -> Result<(), Failure> {
    if cfl > 0.0 && cfl.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--cfl must be positive, got {cfl}")))
    }
}

fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let problem = Problem::parse(&args.problem.problem)?;
    let config = args.scheme.config()?;
    check_cfl(args.problem.cfl)?;
    let t_end = args.problem.t_end.unwrap_or(problem.default_t_end());
    let r = run(problem, &config, args.cells, args.problem.cfl, t_end)?;
    let header = vec![
        format!("active-flux run problem={problem} model={}", problem.model().name()),
        config.to_string(),
        format!("cells={} cfl={} t_end={t_end} steps={}", args.cells, args.problem.cfl, r.steps),
    ];
    let mut w = open_out(&args.problem.out)?;
    write_solution(&mut w, &header, r.solver.grid(), &r.state)?;
    w.flush()?;
    Ok(())
}

fn cmd_converge(args: &ConvergeArgs) -> Result<(), Failure> {
    let problem = Problem::parse(&args.problem.problem)?;
    let config = args.scheme.config()?;
    check_cfl(args.problem.cfl)?;
    let t_end = args.problem.t_end.unwrap_or(problem.default_t_end());
    let rows = convergence(problem, &config, &args.grids, args.problem.cfl, t_end)?;
    let grids: Vec<String> = args.grids.iter().map(|n| n.to_string()).collect();
    let header = vec![
        format!("active-flux converge problem={problem} model={}", problem.model().name()),
        config.to_string(),
        format!("grids={} cfl={} t_end={t_end}", grids.join(","), args.problem.cfl),
    ];
    let mut w = open_out(&args.problem.out)?;
    write_convergence(&mut w, &header, &rows)?;
    w.flush()?;
    Ok(())
}

fn parse_f64(s: &str, what: &str) -> Result<f64, Failure> {
    s.trim()
        .parse()
        .map_err(|_| usage(format!("invalid number `{s}` in {what}")))
}

fn parse_params(spec: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(vec![parse_f64(v, "--param-range")?]),
        [a, b, n] => {
            let (a, b) = (parse_f64(a, "--param-range")?, parse_f64(b, "--param-range")?);
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| usage(format!("invalid count `{n}` in --param-range")))?;
            if n == 0 || b < a || (n == 1 && a != b) {
                return Err(usage(format!("empty parameter range `{spec}`")));
            }
            if n == 1 {
                return Ok(vec![a]);
            }
            Ok((0..n).map(|j| a + (b - a) * j as f64 / (n - 1) as f64).collect())
        }
        _ => Err(usage(format!("--param-range must be `start:stop:count`, got `{spec}`"))),
    }
}

fn parse_nus(spec: &str, step: f64) -> Result<Vec<f64>, Failure> {
    let Some((a, b)) = spec.split_once(':') else {
        return Err(usage(format!("--nu-range must be `start:stop`, got `{spec}`")));
    };
    let (a, b) = (parse_f64(a, "--nu-range")?, parse_f64(b, "--nu-range")?);
    if !(step > 0.0) {
        return Err(usage("--nu-step must be positive"));
    }
    let top = (b / step + 1e-9).floor() as usize;
    let nus: Vec<f64> = (1..=top)
        .map(|j| j as f64 * step)
        .filter(|&nu| nu >= a - 1e-12)
        .collect();
    if nus.is_empty() {
        return Err(usage(format!("empty CFL range `{spec}`")));
    }
    Ok(nus)
}

fn cmd_stability(args: &StabilityArgs) -> Result<(), Failure> {
    let s = &args.scheme;
    let family = args.family.trim().to_string();
    let kind = family.to_ascii_uppercase();
    let params = match (&args.param_range, kind.as_str()) {
        (Some(r), _) => parse_params(r)?,
        (None, "C") => vec![s.order.unwrap_or(3) as f64],
        (None, "B") => return Err(usage("family B needs --param-range")),
        (None, _) => vec![s.param.unwrap_or(f64::NAN)],
    };
    let nus = parse_nus(&args.nu_range, args.nu_step)?;
    let rk = s.rk();
    let builder = |p: f64| -> active_flux::Result<VariantConfig> {
        match kind.as_str() {
            "B" => {
                let m = s.quad_m.unwrap_or(5);
                Ok(s.b_config(vec![-p, p], m))
            }
            "C" => {
                if p.fract() != 0.0 || p < 0.0 {
                    return Err(Error::InvalidConfig(format!("C family parameter must be an order, got {p}")));
                }
                Ok(VariantConfig::c(p as usize).with_rk(rk))
            }
            _ => {
                let param = if p.is_nan() { None } else { Some(p) };
                let c = VariantConfig::a(&family, param).with_rk(rk);
                c.order()?;
                Ok(c)
            }
        }
    };
    // validate once so bad families report a usage error before the scan
    builder(params[0])?;
    let map = scan_region(builder, &params, &nus, args.k_samples)?;
    let header = vec![
        format!("active-flux stability family={family} model=advection rk={}", rk.name()),
        format!(
            "nu_range={} nu_step={} k_samples={} params={}",
            args.nu_range,
            args.nu_step,
            args.k_samples,
            params.len()
        ),
    ];
    let mut w = open_out(&args.out)?;
    write_stability(&mut w, &header, &map)?;
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Converge(a) => cmd_converge(a),
        Command::Stability(a) => cmd_stability(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_non_physical() { 4 } else { 3 })
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
