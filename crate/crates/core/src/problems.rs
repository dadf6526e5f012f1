//! Test problems on periodic domains and their exact solutions.

use std::fmt;

use smallvec::smallvec;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::models::{Model, QVec};
use crate::quadrature::GaussLegendre;
use crate::state::{init_state, ExactSolution, Layout, State};

/// Gauss-Legendre nodes used for exact cell averages.
const EXACT_AVERAGE_NODES: usize = 10;
/// Samples of the datum used to estimate the shock formation time.
const SHOCK_TIME_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Problem {
    /// Linear advection (speed 1) of `0.8 + exp(-(x - 1/2)^2 / 0.05^2)` on `[0, 1]`.
    AdvectionGauss,
    /// Burgers with the transonic datum `2.5 exp(-(x - 1/2)^2 / 0.1^2) - 0.2` on `[0, 1]`.
    BurgersGauss,
    /// Burgers with the advection datum; smooth until about `t = 0.058`.
    BurgersSmooth,
    /// Burgers on `[-1, 1]` with `2` for `x <= 0` and `-1` otherwise.
    BurgersRiemann,
    /// Euler shock tube: `(rho, v, p) = (1, 0, 1)` on `[1/3, 2/3]`, `(0.125, 0, 0.1)` outside.
    Sod,
}

fn gauss_narrow(x: f64) -> f64 {
    0.8 + (-(x - 0.5).powi(2) / 0.05f64.powi(2)).exp()
}

fn gauss_transonic(x: f64) -> f64 {
    2.5 * (-(x - 0.5).powi(2) / 0.1f64.powi(2)).exp() - 0.2
}

impl Problem {
    pub const ALL: [Problem; 5] = [
        Problem::AdvectionGauss,
        Problem::BurgersGauss,
        Problem::BurgersSmooth,
        Problem::BurgersRiemann,
        Problem::Sod,
    ];

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::UnknownProblem(name.to_string()))
    }

    pub fn name(self) -> &'static str {
        match self {
            Problem::AdvectionGauss => "advection-gauss",
            Problem::BurgersGauss => "burgers-gauss",
            Problem::BurgersSmooth => "burgers-smooth",
            Problem::BurgersRiemann => "burgers-riemann",
            Problem::Sod => "sod",
        }
    }

    pub fn model(self) -> Model {
        match self {
            Problem::AdvectionGauss => Model::Advection { speed: 1.0 },
            Problem::BurgersGauss | Problem::BurgersSmooth | Problem::BurgersRiemann => Model::Burgers,
            Problem::Sod => Model::euler(),
        }
    }

    pub fn domain(self) -> (f64, f64) {
        match self {
            Problem::BurgersRiemann => (-1.0, 1.0),
            _ => (0.0, 1.0),
        }
    }

    pub fn grid(self, n_cells: usize) -> Result<Grid> {
        let (a, b) = self.domain();
        Grid::new(n_cells, a, b)
    }

    pub fn default_t_end(self) -> f64 {
        match self {
            Problem::AdvectionGauss | Problem::BurgersGauss | Problem::Sod => 0.1,
            Problem::BurgersSmooth => 0.01,
            Problem::BurgersRiemann => 0.5,
        }
    }

    /// Scalar datum, for the scalar problems.
    fn scalar_datum(self) -> Option<fn(f64) -> f64> {
        match self {
            Problem::AdvectionGauss | Problem::BurgersSmooth => Some(gauss_narrow),
            Problem::BurgersGauss => Some(gauss_transonic),
            Problem::BurgersRiemann => Some(|x| if x <= 0.0 { 2.0 } else { -1.0 }),
            Problem::Sod => None,
        }
    }

    /// Initial condition in conserved variables.
    pub fn datum(self, x: f64) -> QVec {
        match self.scalar_datum() {
            Some(f) => smallvec![f(x)],
            None => {
                let model = self.model();
                if (1.0 / 3.0..=2.0 / 3.0).contains(&x) {
                    model.from_primitive(&[1.0, 0.0, 1.0])
                } else {
                    model.from_primitive(&[0.125, 0.0, 0.1])
                }
            }
        }
    }

    pub fn init(self, grid: &Grid, layout: &Layout) -> Result<State> {
        init_state(&|x| self.datum(x), self.model().components(), grid, layout)
    }

    /// Conservative estimate `-1 / min q0'` of the first shock for smooth
    /// Burgers data; `None` when no shock forms or the datum is not smooth.
    pub fn shock_time(self) -> Option<f64> {
        if !matches!(self, Problem::BurgersGauss | Problem::BurgersSmooth) {
            return None;
        }
        let f = self.scalar_datum()?;
        let (a, b) = self.domain();
        let h = (b - a) / SHOCK_TIME_SAMPLES as f64;
        let min_slope = (0..SHOCK_TIME_SAMPLES)
            .map(|j| {
                let x = a + j as f64 * h;
                (f(x + 0.5 * h) - f(x - 0.5 * h)) / h
            })
            .fold(f64::INFINITY, f64::min);
        (min_slope < 0.0).then(|| -1.0 / min_slope)
    }

    /// Closed-form or characteristic solution at time `t`.
    pub fn exact(self, t: f64) -> Result<Box<dyn ExactSolution + Send + Sync>> {
        let (a, b) = self.domain();
        match (self, self.scalar_datum()) {
            (Problem::AdvectionGauss, Some(q0)) => Ok(Box::new(Advected {
                q0,
                shift: t,
                x_min: a,
                length: b - a,
            })),
            (Problem::BurgersGauss | Problem::BurgersSmooth, Some(q0)) => {
                let t_shock = self.shock_time().unwrap_or(f64::INFINITY);
                if t >= t_shock {
                    return Err(Error::InvalidConfig(format!(
                        "no smooth solution of {} at t = {t}: shocks form near t = {t_shock:.4}",
                        self.name()
                    )));
                }
                Ok(Box::new(BurgersCharacteristics::new(q0, t, a, b)))
            }
            _ => Err(Error::InvalidConfig(format!(
                "no exact solution available for {}",
                self.name()
            ))),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn wrap(x: f64, x_min: f64, length: f64) -> f64 {
    x_min + (x - x_min).rem_euclid(length)
}

fn gl_average(grid: &Grid, i: usize, value: impl Fn(f64) -> f64) -> f64 {
    let gl = GaussLegendre::new(EXACT_AVERAGE_NODES);
    let (c, dx) = (grid.center(i), grid.dx());
    gl.nodes
        .iter()
        .zip(&gl.weights)
        .map(|(&x, &w)| w * value(c + dx * x))
        .sum()
}

/// Periodic translate of a scalar datum.
struct Advected {
    q0: fn(f64) -> f64,
    shift: f64,
    x_min: f64,
    length: f64,
}

impl ExactSolution for Advected {
    fn value(&self, x: f64) -> QVec {
        smallvec![(self.q0)(wrap(x - self.shift, self.x_min, self.length))]
    }

    fn cell_average(&self, grid: &Grid, i: usize) -> QVec {
        smallvec![gl_average(grid, i, |x| self.value(x)[0])]
    }
}

/// Smooth Burgers solution `q(x, t) = q0(y)` with `y + t q0(y) = x`.
struct BurgersCharacteristics {
    q0: fn(f64) -> f64,
    t: f64,
    x_min: f64,
    length: f64,
    lo: f64,
    hi: f64,
}

impl BurgersCharacteristics {
    fn new(q0: fn(f64) -> f64, t: f64, a: f64, b: f64) -> Self {
        let samples = (0..=SHOCK_TIME_SAMPLES).map(|j| q0(a + (b - a) * j as f64 / SHOCK_TIME_SAMPLES as f64));
        let (lo, hi) = samples.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
        Self {
            q0,
            t,
            x_min: a,
            length: b - a,
            // sampled extrema may miss the true ones by a little
            lo: lo - 1e-6,
            hi: hi + 1e-6,
        }
    }

    fn q0p(&self, y: f64) -> f64 {
        (self.q0)(wrap(y, self.x_min, self.length))
    }
}

impl ExactSolution for BurgersCharacteristics {
    fn value(&self, x: f64) -> QVec {
        // before the shock y + t q0(y) is increasing, so bisection is safe
        let g = |y: f64| y + self.t * self.q0p(y) - x;
        let (mut l, mut r) = (x - self.t * self.hi, x - self.t * self.lo);
        for _ in 0..200 {
            let m = 0.5 * (l + r);
            if m <= l || m >= r {
                break;
            }
            if g(m) < 0.0 {
                l = m;
            } else {
                r = m;
            }
        }
        smallvec![self.q0p(0.5 * (l + r))]
    }

    fn cell_average(&self, grid: &Grid, i: usize) -> QVec {
        smallvec![gl_average(grid, i, |x| self.value(x)[0])]
    }
}
