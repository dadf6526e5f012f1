//! Variant A: finite-volume averages with finite-difference point updates.

use nalgebra::DVector;

use super::limiter::{fd_limit_cascade, Direction};
use super::{ConfigA, RkScheme};
use crate::error::Result;
use crate::evolution::upwind_ref_state;
use crate::models::{Model, QVec};
use crate::state::{Field, StateA};
use crate::stencils::{fd_flip, fd_tableau, FdTableau, Slot, CASCADE};

#[derive(Debug, Clone)]
pub struct SchemeA {
    pub d: FdTableau,
    pub d_star: FdTableau,
    chain: Vec<FdTableau>,
    chain_star: Vec<FdTableau>,
    pub limiter: bool,
    pub rk: RkScheme,
}

impl SchemeA {
    pub fn new(cfg: &ConfigA) -> Result<Self> {
        let d = fd_tableau(&cfg.fd, cfg.param)?;
        let mut chain = vec![d.clone()];
        for (name, param) in CASCADE {
            let t = fd_tableau(name, param)?;
            if t.order() < d.order() {
                chain.push(t);
            }
        }
        let chain_star = chain.iter().map(fd_flip).collect();
        Ok(Self {
            d_star: fd_flip(&d),
            d,
            chain,
            chain_star,
            limiter: cfg.limiter,
            rk: cfg.rk,
        })
    }

    /// Tableaus descended by the limiter, starting with the configured one.
    pub fn cascade(&self) -> &[FdTableau] {
        &self.chain
    }

    /// Semidiscrete right-hand side.
    pub fn rhs(&self, s: &StateA, model: &Model, dx: f64) -> Result<StateA> {
        let n = s.avgs.len();
        let m = s.avgs.components();
        let wrap = |i: usize, j: i32| (i as i64 + j as i64).rem_euclid(n as i64) as usize;
        let fluxes = interface_fluxes(&s.ifaces, model)?;
        let mut avgs = Field::zeros(m, n);
        for c in 0..m {
            for i in 0..n {
                *avgs.at_mut(c, i) = -(fluxes.at(c, i) - fluxes.at(c, wrap(i, -1))) / dx;
            }
        }
        let mut ifaces = Field::zeros(m, n);
        for i in 0..n {
            let value = |c: usize| {
                move |slot: Slot| match slot {
                    Slot::Avg(j) => s.avgs.at(c, wrap(i, j)),
                    Slot::Point(j) => s.ifaces.at(c, wrap(i, j)),
                }
            };
            let d = |c: usize| {
                if self.limiter {
                    fd_limit_cascade(&self.chain, dx, Direction::Right, value(c))
                } else {
                    self.d.apply(dx, value(c))
                }
            };
            let d_star = |c: usize| {
                if self.limiter {
                    fd_limit_cascade(&self.chain_star, dx, Direction::Left, value(c))
                } else {
                    self.d_star.apply(dx, value(c))
                }
            };
            let rate = upwind_rate(
                model,
                &s.ifaces.get(wrap(i, -1)),
                &s.ifaces.get(i),
                &s.ifaces.get(wrap(i, 1)),
                d,
                d_star,
            )?;
            ifaces.set(i, &rate);
        }
        Ok(StateA { avgs, ifaces })
    }
}

/// Flux at every interface value.
pub(crate) fn interface_fluxes(ifaces: &Field, model: &Model) -> Result<Field> {
    let (m, n) = (ifaces.components(), ifaces.len());
    if model.is_scalar() {
        let q = ifaces.comp(0);
        return Ok(Field::scalar(q.iter().map(|&v| model.scalar_flux(v)).collect()));
    }
    let mut out = Field::zeros(m, n);
    for i in 0..n {
        out.set(i, &model.flux(&ifaces.get(i))?);
    }
    Ok(out)
}

/// Upwind-split point rate `-(f'(q~)^+ D + f'(q~)^- D*)`, with `q~` chosen
/// from the neighboring interface values. `d(c)` and `d_star(c)` give the
/// derivative estimates of component `c`.
pub(crate) fn upwind_rate(
    model: &Model,
    q_lm: &[f64],
    q_c: &[f64],
    q_rp: &[f64],
    d: impl Fn(usize) -> f64,
    d_star: impl Fn(usize) -> f64,
) -> Result<QVec> {
    let q_ref = upwind_ref_state(model, q_lm, q_c, q_rp);
    if model.is_scalar() {
        let lambda = model.scalar_speed(q_ref[0]);
        let rate = if lambda > 0.0 {
            -lambda * d(0)
        } else if lambda < 0.0 {
            -lambda * d_star(0)
        } else {
            0.0
        };
        return Ok(QVec::from_slice(&[rate]));
    }
    let m = q_c.len();
    let (plus, minus) = model.eig_split(&q_ref)?;
    let dv = DVector::from_fn(m, |c, _| d(c));
    let dsv = DVector::from_fn(m, |c, _| d_star(c));
    let rate = -(plus * dv + minus * dsv);
    Ok(rate.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::VariantConfig;

    fn scheme(name: &str, limiter: bool) -> SchemeA {
        let VariantConfig::A(cfg) = VariantConfig::a(name, None).with_limiter(limiter) else {
            unreachable!()
        };
        SchemeA::new(&cfg).unwrap()
    }

    #[test]
    fn constant_state_is_steady() {
        let s = StateA {
            avgs: Field::scalar(vec![0.7; 6]),
            ifaces: Field::scalar(vec![0.7; 6]),
        };
        for lim in [false, true] {
            let r = scheme("FD6b", lim).rhs(&s, &Model::Burgers, 0.1).unwrap();
            assert!(r.avgs.raw().iter().chain(r.ifaces.raw()).all(|&v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn average_update_from_interface_fluxes() {
        // interface values 1 (left of cell 1) and 2 (right of cell 1)
        let s = StateA {
            avgs: Field::scalar(vec![0.0, 1.5, 0.0]),
            ifaces: Field::scalar(vec![1.0, 2.0, 0.0]),
        };
        let r = scheme("FD3", false).rhs(&s, &Model::Burgers, 0.5).unwrap();
        assert!((r.avgs.at(0, 1) + 3.0).abs() < 1e-15);
    }

    #[test]
    fn cascade_membership() {
        let names: Vec<&str> = scheme("FD6b", true).cascade().iter().map(|t| t.name()).collect();
        assert_eq!(names, vec!["FD6b", "FD5b", "FD4b", "FD3"]);
        let names: Vec<&str> = scheme("FD8a", true).cascade().iter().map(|t| t.name()).collect();
        assert_eq!(names, vec!["FD8a", "FD7", "FD6b", "FD5b", "FD4b", "FD3"]);
    }

    #[test]
    fn systems_at_rest_are_steady() {
        let q = Model::euler().from_primitive(&[1.0, 0.0, 1.0]);
        let s = StateA {
            avgs: Field::from_fn(3, 5, |_| q.clone()),
            ifaces: Field::from_fn(3, 5, |_| q.clone()),
        };
        let r = scheme("FD6b", true).rhs(&s, &Model::euler(), 0.2).unwrap();
        assert!(r.avgs.raw().iter().chain(r.ifaces.raw()).all(|&v| v.abs() < 1e-12));
    }
}
