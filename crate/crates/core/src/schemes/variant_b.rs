//! Variant B: interior point values evolved along characteristics, with a
//! time quadrature of the interface fluxes.

use nalgebra::DMatrix;

use super::ConfigB;
use crate::error::{Error, Result};
use crate::evolution::{advect_trace, characteristic_value, transonic_select_b, GlobalRecon, Location};
use crate::models::Model;
use crate::quadrature::QuadratureRule;
use crate::reconstruction::{interpolate_with_aux, auxiliary_node, limited_parabola_or_power, LocalPolynomial, ReconChoice};
use crate::state::{Field, StateB};

/// Interior samples used to detect overshoots of the reconstruction.
pub const OVERSHOOT_SAMPLES: usize = 10;

#[derive(Debug, Clone)]
pub struct SchemeB {
    pub xi: Vec<f64>,
    /// Maps `(q_{i-1/2}, q_{i,1..k}, q_{i+1/2}, avg)` to monomial coefficients in `xi`.
    map: DMatrix<f64>,
    pub rule: QuadratureRule,
    pub iterations: usize,
    pub limiter: bool,
}

impl SchemeB {
    pub fn new(cfg: &ConfigB) -> Result<Self> {
        let rule = cfg.quadrature.rule()?;
        let nodes: Vec<f64> = std::iter::once(-0.5)
            .chain(cfg.xi.iter().copied())
            .chain(std::iter::once(0.5))
            .collect();
        let n = nodes.len() + 1;
        let xi0 = auxiliary_node(&nodes);
        let mut map = DMatrix::zeros(n, n);
        for col in 0..n {
            let mut data = vec![0.0; n];
            data[col] = 1.0;
            let poly = interpolate_with_aux(&nodes, &data[..n - 1], data[n - 1], 1.0, xi0)?;
            for (d, &c) in poly.coeffs.iter().enumerate() {
                map[(d, col)] = c;
            }
        }
        Ok(Self {
            xi: cfg.xi.clone(),
            map,
            rule,
            iterations: cfg.iterations.unwrap_or(cfg.xi.len() + 3),
            limiter: cfg.limiter,
        })
    }

    /// Reconstruction of every cell, limited where it overshoots the data.
    pub fn reconstruct(&self, s: &StateB, dx: f64) -> GlobalRecon {
        let n = s.avgs.len();
        let k = self.xi.len();
        let mut data = vec![0.0; k + 3];
        let cells = (0..n)
            .map(|i| {
                let q_l = s.ifaces.at(0, (i + n - 1) % n);
                let q_r = s.ifaces.at(0, i);
                let avg = s.avgs.at(0, i);
                data[0] = q_l;
                for j in 0..k {
                    data[j + 1] = s.interior[j].at(0, i);
                }
                data[k + 1] = q_r;
                data[k + 2] = avg;
                if self.limiter && k == 0 {
                    return limited_parabola_or_power(q_l, avg, q_r, dx);
                }
                let coeffs = (0..k + 3).map(|d| (0..k + 3).map(|c| self.map[(d, c)] * data[c]).sum());
                let poly = LocalPolynomial::new(coeffs, dx);
                if self.limiter && overshoots(&poly, &data) {
                    limited_parabola_or_power(q_l, avg, q_r, dx)
                } else {
                    ReconChoice::PolyHigh(poly)
                }
            })
            .collect();
        GlobalRecon::new(cells, dx)
    }

    pub fn step(&self, s: &StateB, model: &Model, dx: f64, dt: f64) -> Result<StateB> {
        if s.avgs.components() != 1 {
            return Err(Error::UnsupportedModel("variant B needs a scalar law".into()));
        }
        let n = s.avgs.len();
        let recon = self.reconstruct(s, dx);
        let evolve = |loc: Location, t: f64, interface: bool| -> Result<f64> {
            match model {
                Model::Advection { speed } => advect_trace(&recon, loc, t, *speed),
                _ if interface => Ok(transonic_select_b(&recon, loc, t, model, self.iterations)),
                _ => Ok(characteristic_value(&recon, loc, t, model, self.iterations)),
            }
        };
        // time-averaged flux through every interface
        let mut flux = vec![0.0; n];
        let mut ifaces = vec![0.0; n];
        for (i, (fl, q_new)) in flux.iter_mut().zip(ifaces.iter_mut()).enumerate() {
            let loc = Location {
                cell: i,
                offset: dx / 2.0,
            };
            for (&zeta, &w) in self.rule.nodes.iter().zip(&self.rule.weights) {
                let q = if zeta == 0.0 {
                    s.ifaces.at(0, i)
                } else {
                    evolve(loc, zeta * dt, true)?
                };
                *fl += w * model.scalar_flux(q);
                if zeta == 1.0 {
                    *q_new = q;
                }
            }
        }
        let avgs: Vec<f64> = (0..n)
            .map(|i| s.avgs.at(0, i) - dt / dx * (flux[i] - flux[(i + n - 1) % n]))
            .collect();
        let interior = self
            .xi
            .iter()
            .map(|&xi| {
                (0..n)
                    .map(|i| {
                        evolve(
                            Location {
                                cell: i,
                                offset: dx * xi,
                            },
                            dt,
                            false,
                        )
                    })
                    .collect::<Result<Vec<f64>>>()
                    .map(Field::scalar)
            })
            .collect::<Result<Vec<Field>>>()?;
        Ok(StateB {
            avgs: Field::scalar(avgs),
            ifaces: Field::scalar(ifaces),
            interior,
            xi: self.xi.clone(),
        })
    }
}

/// True when the polynomial leaves the range of the cell data at any of the
/// interior samples.
fn overshoots(poly: &LocalPolynomial, data: &[f64]) -> bool {
    let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slack = 1e-14 * lo.abs().max(hi.abs());
    (1..=OVERSHOOT_SAMPLES).any(|s| {
        let v = poly.eval_xi(-0.5 + s as f64 / (OVERSHOOT_SAMPLES + 1) as f64);
        v < lo - slack || v > hi + slack
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{TimeQuadrature, VariantConfig};

    fn scheme(xi: &[f64], m: usize, limiter: bool) -> SchemeB {
        let VariantConfig::B(cfg) = VariantConfig::b(xi, TimeQuadrature::Lobatto(m)).with_limiter(limiter) else {
            unreachable!()
        };
        SchemeB::new(&cfg).unwrap()
    }

    #[test]
    fn constant_state_unchanged() {
        let s = StateB {
            avgs: Field::scalar(vec![0.4; 5]),
            ifaces: Field::scalar(vec![0.4; 5]),
            interior: vec![Field::scalar(vec![0.4; 5]); 2],
            xi: vec![-0.415, 0.415],
        };
        for model in [Model::Advection { speed: 1.0 }, Model::Burgers] {
            for lim in [false, true] {
                let out = scheme(&s.xi, 4, lim).step(&s, &model, 0.2, 0.1).unwrap();
                for (a, b) in out.avgs.raw().iter().zip(s.avgs.raw()) {
                    assert!((a - b).abs() < 1e-14);
                }
                for f in std::iter::once(&out.ifaces).chain(&out.interior) {
                    assert!(f.raw().iter().all(|v| (v - 0.4).abs() < 1e-14));
                }
            }
        }
    }

    #[test]
    fn reconstruction_interpolates() {
        let s = StateB {
            avgs: Field::scalar(vec![0.1, 0.5, -0.2]),
            ifaces: Field::scalar(vec![0.3, 0.9, 0.0]),
            interior: vec![Field::scalar(vec![0.2, 0.6, -0.4]), Field::scalar(vec![0.25, 0.8, -0.1])],
            xi: vec![-0.3, 0.35],
        };
        let r = scheme(&s.xi, 4, false).reconstruct(&s, 0.5);
        let ReconChoice::PolyHigh(p) = &r.cells[1] else { panic!() };
        assert!((p.eval(-0.25) - 0.3).abs() < 1e-13);
        assert!((p.eval(0.25) - 0.9).abs() < 1e-13);
        assert!((p.eval(-0.15) - 0.6).abs() < 1e-13);
        assert!((p.eval(0.175) - 0.8).abs() < 1e-13);
        assert!((p.mean() - 0.5).abs() < 1e-13);
    }

    #[test]
    fn unit_cfl_shifts_by_one_cell() {
        let s = StateB {
            avgs: Field::scalar(vec![0.1, 0.5, -0.2, 0.3]),
            ifaces: Field::scalar(vec![0.3, 0.9, 0.0, 0.2]),
            interior: vec![],
            xi: vec![],
        };
        let out = scheme(&[], 3, false)
            .step(&s, &Model::Advection { speed: 1.0 }, 0.25, 0.25)
            .unwrap();
        for i in 0..4 {
            assert!((out.avgs.at(0, (i + 1) % 4) - s.avgs.at(0, i)).abs() < 1e-15);
            assert!((out.ifaces.at(0, (i + 1) % 4) - s.ifaces.at(0, i)).abs() < 1e-15);
        }
    }
}
