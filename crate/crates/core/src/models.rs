//! Hyperbolic systems: linear advection, Burgers' equation and the 1-D Euler
//! equations of an ideal gas.

use nalgebra::DMatrix;
use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};

/// Conserved state of at most three components, stored inline.
pub type QVec = SmallVec<[f64; 3]>;

/// Admissibility floor for density and pressure.
pub const ADMISSIBILITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Advection { speed: f64 },
    Burgers,
    /// Euler equations in conserved variables `(rho, rho v, e)`.
    Euler { gamma: f64 },
}

/// Eigendecomposition `f'(q) = R diag(lambda) R^{-1}`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub right: DMatrix<f64>,
    pub values: Vec<f64>,
    pub left: DMatrix<f64>,
}

impl Eigen {
    pub fn recompose(&self, map: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let m = self.values.len();
        let diag = DMatrix::from_fn(m, m, |i, j| if i == j { map(self.values[i]) } else { 0.0 });
        &self.right * diag * &self.left
    }
}

impl Model {
    pub const EULER_GAMMA: f64 = 1.4;

    pub fn euler() -> Self {
        Model::Euler {
            gamma: Self::EULER_GAMMA,
        }
    }

    /// Number of conserved components.
    pub fn components(&self) -> usize {
        match self {
            Model::Advection { .. } | Model::Burgers => 1,
            Model::Euler { .. } => 3,
        }
    }

    pub fn is_scalar(&self) -> bool {
        self.components() == 1
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Model::Advection { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::Advection { .. } => "advection",
            Model::Burgers => "burgers",
            Model::Euler { .. } => "euler",
        }
    }

    /// Scalar flux, no admissibility checks.
    #[inline]
    pub fn scalar_flux(&self, q: f64) -> f64 {
        match *self {
            Model::Advection { speed } => speed * q,
            Model::Burgers => 0.5 * q * q,
            Model::Euler { .. } => panic!("scalar_flux called on a system"),
        }
    }

    /// Scalar characteristic speed `f'(q)`.
    #[inline]
    pub fn scalar_speed(&self, q: f64) -> f64 {
        match *self {
            Model::Advection { speed } => speed,
            Model::Burgers => q,
            Model::Euler { .. } => panic!("scalar_speed called on a system"),
        }
    }

    pub fn flux(&self, q: &[f64]) -> Result<QVec> {
        match *self {
            Model::Advection { .. } | Model::Burgers => Ok(smallvec![self.scalar_flux(q[0])]),
            Model::Euler { gamma } => {
                let (rho, v, p) = primitive(q, gamma)?;
                Ok(smallvec![rho * v, rho * v * v + p, v * (q[2] + p)])
            }
        }
    }

    pub fn jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        match *self {
            Model::Advection { .. } | Model::Burgers => {
                Ok(DMatrix::from_element(1, 1, self.scalar_speed(q[0])))
            }
            Model::Euler { gamma } => {
                let (rho, v, p) = primitive(q, gamma)?;
                let h = (q[2] + p) / rho;
                let g1 = gamma - 1.0;
                Ok(DMatrix::from_row_slice(
                    3,
                    3,
                    &[
                        0.0,
                        1.0,
                        0.0,
                        0.5 * (gamma - 3.0) * v * v,
                        (3.0 - gamma) * v,
                        g1,
                        v * (0.5 * g1 * v * v - h),
                        h - g1 * v * v,
                        gamma * v,
                    ],
                ))
            }
        }
    }

    pub fn eig(&self, q: &[f64]) -> Result<Eigen> {
        match *self {
            Model::Advection { .. } | Model::Burgers => Ok(Eigen {
                right: DMatrix::identity(1, 1),
                values: vec![self.scalar_speed(q[0])],
                left: DMatrix::identity(1, 1),
            }),
            Model::Euler { gamma } => {
                let (rho, v, p) = primitive(q, gamma)?;
                let c = (gamma * p / rho).sqrt();
                let h = (q[2] + p) / rho;
                #[rustfmt::skip]
                let right = DMatrix::from_row_slice(3, 3, &[
                    1.0,         1.0,         1.0,
                    v - c,       v,           v + c,
                    h - v * c,   0.5 * v * v, h + v * c,
                ]);
                // closed-form inverse of the right eigenvectors
                let b1 = (gamma - 1.0) / (c * c);
                let b2 = 0.5 * v * v * b1;
                #[rustfmt::skip]
                let left = DMatrix::from_row_slice(3, 3, &[
                    0.5 * (b2 + v / c), -0.5 * (b1 * v + 1.0 / c), 0.5 * b1,
                    1.0 - b2,           b1 * v,                    -b1,
                    0.5 * (b2 - v / c), -0.5 * (b1 * v - 1.0 / c), 0.5 * b1,
                ]);
                Ok(Eigen {
                    right,
                    values: vec![v - c, v, v + c],
                    left,
                })
            }
        }
    }

    /// Sign-split Jacobian `(A+, A-)` with `A+ + A- = f'(q)`.
    pub fn eig_split(&self, q: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let e = self.eig(q)?;
        Ok((e.recompose(|l| l.max(0.0)), e.recompose(|l| l.min(0.0))))
    }

    /// Largest characteristic speed in modulus.
    pub fn max_speed(&self, q: &[f64]) -> Result<f64> {
        match *self {
            Model::Advection { .. } | Model::Burgers => Ok(self.scalar_speed(q[0]).abs()),
            Model::Euler { gamma } => {
                let (rho, v, p) = primitive(q, gamma)?;
                Ok(v.abs() + (gamma * p / rho).sqrt())
            }
        }
    }

    /// Conserved state from primitive `(rho, v, p)`; scalar models take `[q]`.
    pub fn from_primitive(&self, w: &[f64]) -> QVec {
        match *self {
            Model::Euler { gamma } => {
                let (rho, v, p) = (w[0], w[1], w[2]);
                smallvec![rho, rho * v, p / (gamma - 1.0) + 0.5 * rho * v * v]
            }
            _ => smallvec![w[0]],
        }
    }
}

/// `(rho, v, p)` from conserved variables, checking admissibility.
pub fn primitive(q: &[f64], gamma: f64) -> Result<(f64, f64, f64)> {
    let rho = q[0];
    if !(rho > ADMISSIBILITY_FLOOR) {
        return Err(Error::NonPhysicalState(format!("density {rho}")));
    }
    let v = q[1] / rho;
    let p = (gamma - 1.0) * (q[2] - 0.5 * rho * v * v);
    if !(p > ADMISSIBILITY_FLOOR) {
        return Err(Error::NonPhysicalState(format!("pressure {p}")));
    }
    Ok((rho, v, p))
}
