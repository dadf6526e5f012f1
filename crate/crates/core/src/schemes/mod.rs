//! Time stepping for the three variants.
//!
//! Variants A and C are semidiscrete and integrated with Runge-Kutta
//! ([`rk_step`]); variant B is a one-step method along characteristics.

pub mod limiter;
pub mod variant_a;
pub mod variant_b;
pub mod variant_c;

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::models::{primitive, Model};
use crate::quadrature::{equidistant_rule, lobatto_rule, QuadratureRule};
use crate::state::{validate_xi, Dofs, Layout, State};
use crate::stencils::fd_tableau;

pub use variant_a::SchemeA;
pub use variant_b::SchemeB;
pub use variant_c::SchemeC;

/// Explicit Runge-Kutta integrators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RkScheme {
    /// Three-stage strong stability preserving method of order 3.
    Rk3,
    /// Dormand-Prince fifth-order weights (six stages).
    Rk5,
}

impl RkScheme {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rk3" | "ssprk3" => Ok(RkScheme::Rk3),
            "rk5" => Ok(RkScheme::Rk5),
            _ => Err(Error::InvalidConfig(format!("unknown Runge-Kutta scheme {s:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RkScheme::Rk3 => "rk3",
            RkScheme::Rk5 => "rk5",
        }
    }

    /// Butcher matrix (strictly lower triangular) and weights.
    pub fn butcher(self) -> (Vec<Vec<f64>>, Vec<f64>) {
        match self {
            RkScheme::Rk3 => (
                vec![vec![], vec![1.0], vec![0.25, 0.25]],
                vec![1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
            ),
            RkScheme::Rk5 => (
                vec![
                    vec![],
                    vec![1.0 / 5.0],
                    vec![3.0 / 40.0, 9.0 / 40.0],
                    vec![44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
                    vec![19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
                    vec![
                        9017.0 / 3168.0,
                        -355.0 / 33.0,
                        46732.0 / 5247.0,
                        49.0 / 176.0,
                        -5103.0 / 18656.0,
                    ],
                ],
                vec![
                    35.0 / 384.0,
                    0.0,
                    500.0 / 1113.0,
                    125.0 / 192.0,
                    -2187.0 / 6784.0,
                    11.0 / 84.0,
                ],
            ),
        }
    }

    /// Coefficients `g_k` of the linear stability polynomial `sum g_k z^k`.
    pub fn stability_coefficients(self) -> Vec<f64> {
        let (a, b) = self.butcher();
        let s = b.len();
        let mut coeffs = vec![1.0];
        // v = A^(k-1) 1
        let mut v = vec![1.0; s];
        for _ in 0..s {
            coeffs.push(b.iter().zip(&v).map(|(x, y)| x * y).sum());
            v = (0..s)
                .map(|r| a[r].iter().zip(&v).map(|(x, y)| x * y).sum())
                .collect();
        }
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.abs() < 1e-16) {
            coeffs.pop();
        }
        coeffs
    }
}

/// One Runge-Kutta step of `du/dt = rhs(u)`.
pub fn rk_step<S: Dofs>(rhs: impl Fn(&S) -> Result<S>, u: &S, dt: f64, scheme: RkScheme) -> Result<S> {
    match scheme {
        RkScheme::Rk3 => {
            let mut u1 = u.clone();
            u1.combine(1.0, &rhs(u)?, dt);
            let mut u2 = u1.clone();
            u2.combine(1.0, &rhs(&u1)?, dt);
            u2.combine(0.25, u, 0.75);
            let mut u3 = u2.clone();
            u3.combine(1.0, &rhs(&u2)?, dt);
            u3.combine(2.0 / 3.0, u, 1.0 / 3.0);
            Ok(u3)
        }
        RkScheme::Rk5 => {
            let (a, b) = scheme.butcher();
            let mut ks: Vec<S> = Vec::with_capacity(b.len());
            for row in &a {
                let mut stage = u.clone();
                for (k, &aij) in ks.iter().zip(row) {
                    if aij != 0.0 {
                        stage.combine(1.0, k, dt * aij);
                    }
                }
                ks.push(rhs(&stage)?);
            }
            let mut out = u.clone();
            for (k, &bi) in ks.iter().zip(&b) {
                if bi != 0.0 {
                    out.combine(1.0, k, dt * bi);
                }
            }
            Ok(out)
        }
    }
}

/// Time quadrature for the interface fluxes of variant B.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeQuadrature {
    Lobatto(usize),
    Equidistant(usize),
}

impl TimeQuadrature {
    pub fn rule(self) -> Result<QuadratureRule> {
        match self {
            TimeQuadrature::Lobatto(m) => lobatto_rule(m),
            TimeQuadrature::Equidistant(m) => equidistant_rule(m),
        }
    }

    pub fn points(self) -> usize {
        match self {
            TimeQuadrature::Lobatto(m) | TimeQuadrature::Equidistant(m) => m,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigA {
    pub fd: String,
    pub param: Option<f64>,
    pub limiter: bool,
    pub rk: RkScheme,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigB {
    /// Interior node offsets in units of `dx`.
    pub xi: Vec<f64>,
    pub quadrature: TimeQuadrature,
    /// Fixpoint iterations for nonlinear characteristics; defaults to the order.
    pub iterations: Option<usize>,
    pub limiter: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigC {
    /// Order `N`; moments `0..=N-3` are evolved.
    pub order: usize,
    /// Gauss-Legendre nodes for the flux integral of nonlinear laws.
    pub quad_nodes: Option<usize>,
    pub limiter: bool,
    pub rk: RkScheme,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VariantConfig {
    A(ConfigA),
    B(ConfigB),
    C(ConfigC),
}

impl VariantConfig {
    pub fn a(fd: &str, param: Option<f64>) -> Self {
        VariantConfig::A(ConfigA {
            fd: fd.to_string(),
            param,
            limiter: false,
            rk: RkScheme::Rk3,
        })
    }

    pub fn b(xi: &[f64], quadrature: TimeQuadrature) -> Self {
        VariantConfig::B(ConfigB {
            xi: xi.to_vec(),
            quadrature,
            iterations: None,
            limiter: false,
        })
    }

    pub fn c(order: usize) -> Self {
        VariantConfig::C(ConfigC {
            order,
            quad_nodes: None,
            limiter: false,
            rk: RkScheme::Rk3,
        })
    }

    pub fn with_limiter(mut self, on: bool) -> Self {
        match &mut self {
            VariantConfig::A(c) => c.limiter = on,
            VariantConfig::B(c) => c.limiter = on,
            VariantConfig::C(c) => c.limiter = on,
        }
        self
    }

    pub fn with_rk(mut self, rk: RkScheme) -> Self {
        match &mut self {
            VariantConfig::A(c) => c.rk = rk,
            VariantConfig::C(c) => c.rk = rk,
            VariantConfig::B(_) => {}
        }
        self
    }

    pub fn tag(&self) -> char {
        match self {
            VariantConfig::A(_) => 'A',
            VariantConfig::B(_) => 'B',
            VariantConfig::C(_) => 'C',
        }
    }

    /// Nominal order of accuracy.
    pub fn order(&self) -> Result<usize> {
        match self {
            VariantConfig::A(c) => Ok(fd_tableau(&c.fd, c.param)?.order()),
            VariantConfig::B(c) => Ok(c.xi.len() + 3),
            VariantConfig::C(c) => Ok(c.order),
        }
    }

    pub fn layout(&self) -> Layout {
        match self {
            VariantConfig::A(_) => Layout::A,
            VariantConfig::B(c) => Layout::B { xi: c.xi.clone() },
            VariantConfig::C(c) => Layout::C {
                max_moment: c.order.saturating_sub(3),
            },
        }
    }

    pub fn limiter(&self) -> bool {
        match self {
            VariantConfig::A(c) => c.limiter,
            VariantConfig::B(c) => c.limiter,
            VariantConfig::C(c) => c.limiter,
        }
    }
}

impl fmt::Display for VariantConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let on = |b: bool| if b { "on" } else { "off" };
        match self {
            VariantConfig::A(c) => {
                let t = fd_tableau(&c.fd, c.param).map_err(|_| fmt::Error)?;
                write!(f, "variant=A fd={t} limiter={} rk={}", on(c.limiter), c.rk.name())
            }
            VariantConfig::B(c) => {
                let (kind, m) = match c.quadrature {
                    TimeQuadrature::Lobatto(m) => ("lobatto", m),
                    TimeQuadrature::Equidistant(m) => ("equidistant", m),
                };
                write!(f, "variant=B xi={:?} quadrature={kind}:{m} limiter={}", c.xi, on(c.limiter))?;
                if let Some(it) = c.iterations {
                    write!(f, " iterations={it}")?;
                }
                Ok(())
            }
            VariantConfig::C(c) => write!(
                f,
                "variant=C order={} moments=0..{} limiter={} rk={}",
                c.order,
                c.order.saturating_sub(3),
                on(c.limiter),
                c.rk.name()
            ),
        }
    }
}

#[derive(Debug, Clone)]
enum Inner {
    A(SchemeA),
    B(SchemeB),
    C(SchemeC),
}

/// A configured scheme bound to a model and grid.
#[derive(Debug, Clone)]
pub struct Solver {
    model: Model,
    grid: Grid,
    config: VariantConfig,
    inner: Inner,
}

impl Solver {
    pub fn new(model: Model, config: VariantConfig, grid: Grid) -> Result<Self> {
        let inner = match &config {
            VariantConfig::A(c) => Inner::A(SchemeA::new(c)?),
            VariantConfig::B(c) => {
                if !model.is_scalar() {
                    return Err(Error::UnsupportedModel(format!(
                        "variant B is implemented for scalar laws only, not {}",
                        model.name()
                    )));
                }
                validate_xi(&c.xi)?;
                Inner::B(SchemeB::new(c)?)
            }
            VariantConfig::C(c) => Inner::C(SchemeC::new(c)?),
        };
        Ok(Self {
            model,
            grid,
            config,
            inner,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn config(&self) -> &VariantConfig {
        &self.config
    }

    /// One time step of size `dt`.
    pub fn step(&self, state: &State, dt: f64) -> Result<State> {
        let dx = self.grid.dx();
        let next = match (&self.inner, state) {
            (Inner::A(s), State::A(q)) => State::A(rk_step(|u| s.rhs(u, &self.model, dx), q, dt, s.rk)?),
            (Inner::B(s), State::B(q)) => State::B(s.step(q, &self.model, dx, dt)?),
            (Inner::C(s), State::C(q)) => State::C(rk_step(|u| s.rhs(u, &self.model, dx), q, dt, s.rk)?),
            _ => {
                return Err(Error::InvalidConfig(
                    "state layout does not match the configured variant".into(),
                ))
            }
        };
        check_admissible(&next, &self.model)?;
        Ok(next)
    }
}

/// Rejects non-finite values and, for the Euler equations, non-positive
/// density or pressure in any average or point value.
pub fn check_admissible(state: &State, model: &Model) -> Result<()> {
    if !state.all_finite() {
        return Err(Error::NonPhysicalState("non-finite value".into()));
    }
    if let Model::Euler { gamma } = model {
        let mut fields = state.point_fields();
        fields.push(state.avgs());
        for f in fields {
            for i in 0..f.len() {
                primitive(&f.get(i), *gamma)?;
            }
        }
    }
    Ok(())
}

/// Largest characteristic speed over all point values.
pub fn max_speed_over(state: &State, model: &Model) -> Result<f64> {
    let mut max = 0.0f64;
    for f in state.point_fields() {
        for i in 0..f.len() {
            max = max.max(model.max_speed(&f.get(i))?);
        }
    }
    Ok(max)
}

/// `dt = cfl * dx / max speed`.
pub fn compute_dt(state: &State, model: &Model, cfl: f64, grid: &Grid) -> Result<f64> {
    if !(cfl > 0.0 && cfl.is_finite()) {
        return Err(Error::InvalidConfig(format!("CFL number must be positive, got {cfl}")));
    }
    let speed = max_speed_over(state, model)?;
    if !speed.is_finite() {
        return Err(Error::NonPhysicalState("infinite characteristic speed".into()));
    }
    if speed == 0.0 {
        return Err(Error::ZeroSpeed);
    }
    Ok(cfl * grid.dx() / speed)
}

/// Progress report handed to observers after every step.
#[derive(Debug)]
pub struct StepInfo<'a> {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub state: &'a State,
}

/// Steps from `t = 0` to `t_end` with CFL-controlled steps, shortening the
/// last one to land on `t_end`.
pub fn advance(
    solver: &Solver,
    initial: State,
    t_end: f64,
    cfl: f64,
    observer: &mut dyn FnMut(&StepInfo),
) -> Result<State> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidConfig(format!("end time must be non-negative, got {t_end}")));
    }
    let mut state = initial;
    let mut t = 0.0;
    let mut step = 0;
    while t < t_end {
        let remaining = t_end - t;
        let mut dt = match compute_dt(&state, solver.model(), cfl, solver.grid()) {
            Ok(dt) => dt,
            Err(Error::ZeroSpeed) => remaining,
            Err(e) => return Err(e),
        };
        // avoid a sliver step from round-off
        if dt >= remaining * (1.0 - 1e-12) {
            dt = remaining;
        }
        state = solver.step(&state, dt)?;
        t = if dt == remaining { t_end } else { t + dt };
        step += 1;
        observer(&StepInfo {
            step,
            t,
            dt,
            state: &state,
        });
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{Field, StateA};

    #[derive(Clone)]
    struct Scalar(Field);
    impl Dofs for Scalar {
        fn fields(&self) -> Vec<&Field> {
            vec![&self.0]
        }
        fn fields_mut(&mut self) -> Vec<&mut Field> {
            vec![&mut self.0]
        }
    }

    #[test]
    fn rk3_decay_factor() {
        let u = Scalar(Field::scalar(vec![1.0]));
        let out = rk_step(|u: &Scalar| Ok(u.scaled(-1.0)), &u, 1.0, RkScheme::Rk3).unwrap();
        assert!((out.0.at(0, 0) - 1.0 / 3.0).abs() < 1e-15);
        let zero = rk_step(|u: &Scalar| Ok(u.scaled(0.0)), &u, 1.0, RkScheme::Rk3).unwrap();
        assert_eq!(zero.0.at(0, 0), 1.0);
    }

    #[test]
    fn stability_polynomials() {
        let g3 = RkScheme::Rk3.stability_coefficients();
        let expect = [1.0, 1.0, 0.5, 1.0 / 6.0];
        assert_eq!(g3.len(), 4);
        for (a, b) in g3.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let g5 = RkScheme::Rk5.stability_coefficients();
        let fact = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0];
        for (k, f) in fact.iter().enumerate() {
            assert!((g5[k] - 1.0 / f).abs() < 1e-14, "k={k}: {}", g5[k]);
        }
        assert_eq!(g5.len(), 7);
        // the step realizes the polynomial on a linear ODE
        let z = -0.7;
        for rk in [RkScheme::Rk3, RkScheme::Rk5] {
            let u = Scalar(Field::scalar(vec![1.0]));
            let out = rk_step(|u: &Scalar| Ok(u.scaled(z)), &u, 1.0, rk).unwrap();
            let poly: f64 = rk
                .stability_coefficients()
                .iter()
                .enumerate()
                .map(|(k, g)| g * z.powi(k as i32))
                .sum();
            assert!((out.0.at(0, 0) - poly).abs() < 1e-14);
        }
    }

    #[test]
    fn dt_examples() {
        let g = Grid::new(100, 0.0, 1.0).unwrap();
        let mut ifaces = vec![0.0; 100];
        ifaces[3] = 2.5;
        ifaces[4] = -1.0;
        let s = State::A(StateA {
            avgs: Field::scalar(vec![0.0; 100]),
            ifaces: Field::scalar(ifaces),
        });
        assert!((compute_dt(&s, &Model::Burgers, 0.4, &g).unwrap() - 0.0016).abs() < 1e-16);
        let adv = Model::Advection { speed: 1.0 };
        assert!((compute_dt(&s, &adv, 1.0, &g).unwrap() - 0.01).abs() < 1e-16);
        let zero = State::A(StateA {
            avgs: Field::scalar(vec![0.0; 100]),
            ifaces: Field::scalar(vec![0.0; 100]),
        });
        assert_eq!(compute_dt(&zero, &Model::Burgers, 0.4, &g), Err(Error::ZeroSpeed));
        let sod = State::A(StateA {
            avgs: Field::from_fn(3, 100, |_| Model::euler().from_primitive(&[1.0, 0.0, 1.0])),
            ifaces: Field::from_fn(3, 100, |_| Model::euler().from_primitive(&[1.0, 0.0, 1.0])),
        });
        let dt = compute_dt(&sod, &Model::euler(), 0.25, &g).unwrap();
        assert!((dt - 0.25 * 0.01 / 1.4f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_end_time_returns_initial() {
        let g = Grid::unit(8).unwrap();
        let solver = Solver::new(Model::Burgers, VariantConfig::a("FD3", None), g).unwrap();
        let s = State::A(StateA {
            avgs: Field::scalar(vec![0.3; 8]),
            ifaces: Field::scalar(vec![0.3; 8]),
        });
        let out = advance(&solver, s.clone(), 0.0, 0.5, &mut |_| {}).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn zero_speed_takes_remaining_time() {
        let g = Grid::unit(4).unwrap();
        let solver = Solver::new(Model::Burgers, VariantConfig::c(5), g).unwrap();
        let layout = solver.config().layout();
        let s = crate::state::init_state(&|_| smallvec::smallvec![0.0], 1, &g, &layout).unwrap();
        let mut steps = 0;
        let out = advance(&solver, s.clone(), 0.3, 0.5, &mut |_| steps += 1).unwrap();
        assert_eq!(steps, 1);
        assert_eq!(out, s);
    }

    #[test]
    fn variant_b_rejects_systems() {
        let g = Grid::unit(4).unwrap();
        let cfg = VariantConfig::b(&[-0.4, 0.4], TimeQuadrature::Lobatto(4));
        assert!(matches!(Solver::new(Model::euler(), cfg, g), Err(Error::UnsupportedModel(_))));
    }
}
