//! Variant C: moments as additional degrees of freedom.

use super::limiter::limited_moment_cell;
use super::variant_a::{interface_fluxes, upwind_rate};
use super::{ConfigC, RkScheme};
use crate::error::{Error, Result};
use crate::models::Model;
use crate::quadrature::GaussLegendre;
use crate::reconstruction::{moment_poly, LocalPolynomial, ReconChoice, MAX_MOMENT};
use crate::state::{Field, StateC};
use crate::stencils::{md_derive, md_flip, md_tableau, MdTableau};

#[derive(Debug, Clone)]
pub struct SchemeC {
    pub order: usize,
    pub md: MdTableau,
    pub md_star: MdTableau,
    gl: GaussLegendre,
    pub limiter: bool,
    pub rk: RkScheme,
}

/// Gauss-Legendre nodes making the flux integral exact for Burgers' flux
/// on the degree `k + 2` reconstruction, but at least 6.
pub fn default_quad_nodes(order: usize) -> usize {
    let k = order.saturating_sub(3);
    // integrand degree (k - 1) + 2 (k + 2) = 3k + 3
    6.max((3 * k + 5).div_ceil(2))
}

impl SchemeC {
    pub fn new(cfg: &ConfigC) -> Result<Self> {
        if cfg.order < 3 || cfg.order - 3 > MAX_MOMENT {
            return Err(Error::UnsupportedOrder(cfg.order));
        }
        let md = md_tableau(cfg.order).or_else(|_| md_derive(cfg.order))?;
        let nodes = cfg.quad_nodes.unwrap_or_else(|| default_quad_nodes(cfg.order));
        if nodes == 0 {
            return Err(Error::InvalidConfig("quadrature needs at least one node".into()));
        }
        Ok(Self {
            order: cfg.order,
            md_star: md_flip(&md),
            md,
            gl: GaussLegendre::new(nodes),
            limiter: cfg.limiter,
            rk: cfg.rk,
        })
    }

    pub fn rhs(&self, s: &StateC, model: &Model, dx: f64) -> Result<StateC> {
        self.rhs_with(s, model, dx, model.is_linear())
    }

    /// Right-hand side; with `linear_path` the flux integral of linear
    /// advection is replaced by the next-lower moment.
    pub fn rhs_with(&self, s: &StateC, model: &Model, dx: f64, linear_path: bool) -> Result<StateC> {
        let n = s.ifaces.len();
        let m = s.ifaces.components();
        let k1 = s.moments.len();
        if k1 != self.order - 2 {
            return Err(Error::InvalidConfig(format!(
                "state carries {k1} moments, order {} needs {}",
                self.order,
                self.order - 2
            )));
        }
        let left = |i: usize| (i + n - 1) % n;
        let right = |i: usize| (i + 1) % n;
        let fluxes = interface_fluxes(&s.ifaces, model)?;
        let cell_moments = |c: usize, i: usize| -> Vec<f64> { s.moments.iter().map(|f| f.at(c, i)).collect() };
        // limited reconstruction per component and cell, index c * n + i
        let limited = if self.limiter {
            let mut cells = Vec::with_capacity(m * n);
            for c in 0..m {
                for i in 0..n {
                    let (q_l, q_r) = (s.ifaces.at(c, left(i)), s.ifaces.at(c, i));
                    cells.push(limited_moment_cell(q_l, &cell_moments(c, i), q_r, dx)?);
                }
            }
            Some(cells)
        } else {
            None
        };
        let mut moments = vec![Field::zeros(m, n); k1];
        let speed = match model {
            Model::Advection { speed } if linear_path => Some(*speed),
            _ => None,
        };
        // flux integrals int xi^(p-1) f(q) dxi, p = 1..k, per cell
        let mut integrals = vec![0.0; m * k1];
        for i in 0..n {
            if speed.is_none() && k1 > 1 {
                let recons = (0..m)
                    .map(|c| match &limited {
                        // the limited reconstruction keeps dropped moments from feeding back
                        Some(cells) => Ok(Recon::Limited(&cells[c * n + i].recon)),
                        None => moment_poly(s.ifaces.at(c, left(i)), s.ifaces.at(c, i), &cell_moments(c, i), dx)
                            .map(Recon::Poly),
                    })
                    .collect::<Result<Vec<_>>>()?;
                self.flux_integrals(&recons, model, k1, dx, &mut integrals)?;
            }
            for c in 0..m {
                let (f_l, f_r) = (fluxes.at(c, left(i)), fluxes.at(c, i));
                for p in 0..k1 {
                    let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
                    let mut rate = -((p + 1) as f64) * (f_r - sign * f_l) / dx;
                    if p > 0 {
                        rate += match speed {
                            Some(a) => 2.0 * (p + 1) as f64 * a * s.moments[p - 1].at(c, i) / dx,
                            None => {
                                (p * (p + 1)) as f64 * 2f64.powi(p as i32) / dx
                                    * integrals[c * k1 + p]
                            }
                        };
                    }
                    *moments[p].at_mut(c, i) = rate;
                }
            }
        }
        // derivatives at the left (index 0) and right (index 1) ends of each cell
        let ends: Vec<[f64; 2]> = match &limited {
            Some(cells) => cells.iter().map(|cell| [cell.left, cell.right]).collect(),
            None => (0..m * n)
                .map(|idx| {
                    let (c, i) = (idx / n, idx % n);
                    let (q_l, q_r) = (s.ifaces.at(c, left(i)), s.ifaces.at(c, i));
                    let ms = cell_moments(c, i);
                    [self.md_star.apply(dx, q_l, &ms, q_r), self.md.apply(dx, q_l, &ms, q_r)]
                })
                .collect(),
        };
        let mut ifaces = Field::zeros(m, n);
        for i in 0..n {
            let rate = upwind_rate(
                model,
                &s.ifaces.get(left(i)),
                &s.ifaces.get(i),
                &s.ifaces.get(right(i)),
                |c| ends[c * n + i][1],
                |c| ends[c * n + right(i)][0],
            )?;
            ifaces.set(i, &rate);
        }
        Ok(StateC { ifaces, moments })
    }

    /// Gauss-Legendre approximation of `int xi^(p-1) f(q) dxi` over one cell,
    /// stored at `out[c * k1 + p]` for `p = 1..k1`.
    fn flux_integrals(&self, recons: &[Recon], model: &Model, k1: usize, dx: f64, out: &mut [f64]) -> Result<()> {
        let m = recons.len();
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut q = vec![0.0; m];
        for (&xi, &w) in self.gl.nodes.iter().zip(&self.gl.weights) {
            for (c, r) in recons.iter().enumerate() {
                q[c] = match r {
                    Recon::Poly(p) => p.eval_xi(xi),
                    Recon::Limited(r) => r.eval(xi * dx),
                };
            }
            let f = if model.is_scalar() {
                smallvec::smallvec![model.scalar_flux(q[0])]
            } else {
                model.flux(&q)?
            };
            let mut xp = w;
            for p in 1..k1 {
                for c in 0..m {
                    out[c * k1 + p] += xp * f[c];
                }
                xp *= xi;
            }
        }
        Ok(())
    }
}

enum Recon<'a> {
    Poly(LocalPolynomial),
    Limited(&'a ReconChoice),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::VariantConfig;

    fn scheme(order: usize, limiter: bool) -> SchemeC {
        let VariantConfig::C(cfg) = VariantConfig::c(order).with_limiter(limiter) else {
            unreachable!()
        };
        SchemeC::new(&cfg).unwrap()
    }

    fn constant(order: usize, v: f64, n: usize) -> StateC {
        StateC {
            ifaces: Field::scalar(vec![v; n]),
            moments: (0..order - 2)
                .map(|p| Field::scalar(vec![if p % 2 == 0 { v } else { 0.0 }; n]))
                .collect(),
        }
    }

    #[test]
    fn constant_state_is_steady() {
        for order in [3, 5, 7] {
            for lim in [false, true] {
                for model in [Model::Advection { speed: 1.0 }, Model::Burgers] {
                    let r = scheme(order, lim).rhs(&constant(order, 1.0, 5), &model, 1.0).unwrap();
                    for f in std::iter::once(&r.ifaces).chain(&r.moments) {
                        assert!(f.raw().iter().all(|v| v.abs() < 1e-12), "order {order}");
                    }
                }
            }
        }
    }

    #[test]
    fn first_moment_on_constant_data() {
        // -2 (1 + 1) + 4 * 1 = 0 for advection with c = dx = 1
        let r = scheme(5, false)
            .rhs(&constant(5, 1.0, 3), &Model::Advection { speed: 1.0 }, 1.0)
            .unwrap();
        assert!(r.moments[1].at(0, 1).abs() < 1e-15);
    }

    #[test]
    fn linear_path_matches_quadrature() {
        let n = 7;
        let mut x = 0.37f64;
        let mut next = || {
            x = (x * 97.31 + 0.123).fract();
            x - 0.5
        };
        let s = StateC {
            ifaces: Field::scalar((0..n).map(|_| next()).collect()),
            moments: (0..5).map(|_| Field::scalar((0..n).map(|_| next()).collect())).collect(),
        };
        let model = Model::Advection { speed: -1.3 };
        let sc = scheme(7, false);
        let a = sc.rhs_with(&s, &model, 0.3, true).unwrap();
        let b = sc.rhs_with(&s, &model, 0.3, false).unwrap();
        for (fa, fb) in a.moments.iter().zip(&b.moments) {
            for (u, v) in fa.raw().iter().zip(fb.raw()) {
                assert!((u - v).abs() < 1e-12 * u.abs().max(1.0), "{u} vs {v}");
            }
        }
    }

    #[test]
    fn quad_node_defaults() {
        assert_eq!(default_quad_nodes(3), 6);
        assert_eq!(default_quad_nodes(7), 9);
    }
}
