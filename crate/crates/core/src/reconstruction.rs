//! Per-cell reconstructions in local coordinates `x in [-dx/2, dx/2]`.
//!
//! Polynomials are stored in the scaled variable `xi = x / dx`, so that the
//! coefficients do not depend on the grid spacing.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type Coeffs = SmallVec<[f64; 10]>;

/// Largest moment index supported by [`moment_poly`].
pub const MAX_MOMENT: usize = 8;

/// Exponents of degenerate power laws are clamped into this range.
const EXPONENT_CLAMP: (f64, f64) = (1e-6, 1e6);

/// Polynomial `sum c_d xi^d` on one cell of width `dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPolynomial {
    pub coeffs: Coeffs,
    pub dx: f64,
}

impl LocalPolynomial {
    pub fn new(coeffs: impl IntoIterator<Item = f64>, dx: f64) -> Self {
        Self {
            coeffs: coeffs.into_iter().collect(),
            dx,
        }
    }

    pub fn constant(v: f64, dx: f64) -> Self {
        Self::new([v], dx)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    #[inline]
    pub fn eval_xi(&self, xi: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * xi + c)
    }

    /// Value at local coordinate `x`.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_xi(x / self.dx)
    }

    /// `d/dx` at local coordinate `x`.
    pub fn derivative(&self, x: f64) -> f64 {
        let xi = x / self.dx;
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(d, &c)| d as f64 * c * xi.powi(d as i32 - 1))
            .sum::<f64>()
            / self.dx
    }

    /// `int_{-1/2}^{1/2} xi^p poly(xi) d xi`.
    pub fn xi_moment(&self, p: usize) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(d, &c)| c * monomial_integral(d + p))
            .sum()
    }

    /// Cell average.
    pub fn mean(&self) -> f64 {
        self.xi_moment(0)
    }

    /// Normalized moment `A_p int x^p q dx = (p+1) 2^p int xi^p q d xi`.
    pub fn moment(&self, p: usize) -> f64 {
        (p + 1) as f64 * 2f64.powi(p as i32) * self.xi_moment(p)
    }
}

/// `int_{-1/2}^{1/2} xi^e d xi`.
#[inline]
pub fn monomial_integral(e: usize) -> f64 {
    if e % 2 == 1 {
        0.0
    } else {
        2.0 * 0.5f64.powi(e as i32 + 1) / (e as f64 + 1.0)
    }
}

/// The unique parabola with the given interface values and average.
pub fn parabolic(q_l: f64, avg: f64, q_r: f64, dx: f64) -> LocalPolynomial {
    LocalPolynomial::new(
        [
            (6.0 * avg - q_l - q_r) / 4.0,
            q_r - q_l,
            3.0 * (q_l + q_r - 2.0 * avg),
        ],
        dx,
    )
}

/// Which of the two power laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerLawForm {
    /// `q_l + (q_r - q_l) ((x + dx/2)/dx)^r`, flat at the left end.
    One,
    /// `q_r - (q_r - q_l) ((dx/2 - x)/dx)^s`, flat at the right end.
    Two,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLaw {
    pub form: PowerLawForm,
    pub q_l: f64,
    pub q_r: f64,
    pub exponent: f64,
    pub dx: f64,
}

/// Power law interpolating `q_l`, `q_r` with average `avg`.
pub fn power_law(form: PowerLawForm, q_l: f64, avg: f64, q_r: f64, dx: f64) -> Result<PowerLaw> {
    let exponent = power_law_exponent(form, q_l, avg, q_r)?;
    Ok(PowerLaw {
        form,
        q_l,
        q_r,
        exponent,
        dx,
    })
}

fn power_law_exponent(form: PowerLawForm, q_l: f64, avg: f64, q_r: f64) -> Result<f64> {
    let (num, den) = match form {
        PowerLawForm::One => (q_r - avg, avg - q_l),
        PowerLawForm::Two => (avg - q_l, q_r - avg),
    };
    let e = num / den;
    if den == 0.0 || !e.is_finite() || e <= 0.0 {
        return Err(Error::DegenerateData);
    }
    Ok(e)
}

impl PowerLaw {
    pub fn eval(&self, x: f64) -> f64 {
        let jump = self.q_r - self.q_l;
        match self.form {
            PowerLawForm::One => {
                let s = ((x + self.dx / 2.0) / self.dx).clamp(0.0, 1.0);
                self.q_l + jump * s.powf(self.exponent)
            }
            PowerLawForm::Two => {
                let s = ((self.dx / 2.0 - x) / self.dx).clamp(0.0, 1.0);
                self.q_r - jump * s.powf(self.exponent)
            }
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let jump = self.q_r - self.q_l;
        let e = self.exponent;
        let s = match self.form {
            PowerLawForm::One => (x + self.dx / 2.0) / self.dx,
            PowerLawForm::Two => (self.dx / 2.0 - x) / self.dx,
        }
        .clamp(0.0, 1.0);
        jump * e * s.powf(e - 1.0) / self.dx
    }

    /// Analytic cell average `q_l + jump/(r+1)` resp. `q_r - jump/(s+1)`.
    pub fn mean(&self) -> f64 {
        let jump = self.q_r - self.q_l;
        match self.form {
            PowerLawForm::One => self.q_l + jump / (self.exponent + 1.0),
            PowerLawForm::Two => self.q_r - jump / (self.exponent + 1.0),
        }
    }
}

/// Nonlinear one-sided derivatives obtained by differentiating the power laws
/// at their steep end: form one at the right interface, form two at the left.
pub fn power_law_derivative(form: PowerLawForm, q_l: f64, avg: f64, q_r: f64, dx: f64) -> Result<f64> {
    Ok((q_r - q_l) * power_law_exponent(form, q_l, avg, q_r)? / dx)
}

/// Outcome of a limited reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub enum ReconChoice {
    Parabola(LocalPolynomial),
    PowerLaw1(PowerLaw),
    PowerLaw2(PowerLaw),
    /// The unlimited high-order polynomial.
    PolyHigh(LocalPolynomial),
    /// A lower-degree polynomial after dropping `level` constraints.
    PolyReduced { level: usize, poly: LocalPolynomial },
}

impl ReconChoice {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ReconChoice::Parabola(p)
            | ReconChoice::PolyHigh(p)
            | ReconChoice::PolyReduced { poly: p, .. } => p.eval(x),
            ReconChoice::PowerLaw1(p) | ReconChoice::PowerLaw2(p) => p.eval(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            ReconChoice::Parabola(p)
            | ReconChoice::PolyHigh(p)
            | ReconChoice::PolyReduced { poly: p, .. } => p.derivative(x),
            ReconChoice::PowerLaw1(p) | ReconChoice::PowerLaw2(p) => p.derivative(x),
        }
    }

    pub fn is_power_law(&self) -> bool {
        matches!(self, ReconChoice::PowerLaw1(_) | ReconChoice::PowerLaw2(_))
    }
}

/// `(avg - q_l)(q_r - avg) >= 0`.
pub fn is_monotone_data(q_l: f64, avg: f64, q_r: f64) -> bool {
    (q_l <= avg && avg <= q_r) || (q_l >= avg && avg >= q_r)
}

/// Parabola unless the data are monotone and the parabola is not, in which
/// case the power law matching the side the average leans towards.
pub fn limited_parabola_or_power(q_l: f64, avg: f64, q_r: f64, dx: f64) -> ReconChoice {
    let jump = (q_r - q_l).abs();
    if !is_monotone_data(q_l, avg, q_r) || jump == 0.0 {
        return ReconChoice::Parabola(parabolic(q_l, avg, q_r, dx));
    }
    let clamped = |form| {
        let e = match form {
            PowerLawForm::One => (q_r - avg) / (avg - q_l),
            PowerLawForm::Two => (avg - q_l) / (q_r - avg),
        };
        let e = if e.is_nan() { 1.0 } else { e };
        PowerLaw {
            form,
            q_l,
            q_r,
            exponent: e.clamp(EXPONENT_CLAMP.0, EXPONENT_CLAMP.1),
            dx,
        }
    };
    if (avg - q_l).abs() < jump / 3.0 {
        ReconChoice::PowerLaw1(clamped(PowerLawForm::One))
    } else if (avg - q_r).abs() < jump / 3.0 {
        ReconChoice::PowerLaw2(clamped(PowerLawForm::Two))
    } else {
        ReconChoice::Parabola(parabolic(q_l, avg, q_r, dx))
    }
}

/// Samples at both ends and `n` equidistant interior points stay within the
/// range of the end values and are monotone in order.
pub fn monotone_on_samples(poly: &LocalPolynomial, n: usize) -> bool {
    let values: Vec<f64> = (0..n + 2)
        .map(|s| poly.eval_xi(-0.5 + s as f64 / (n + 1) as f64))
        .collect();
    let (a, b) = (values[0], values[n + 1]);
    let (lo, hi) = (a.min(b), a.max(b));
    // a few ulps of slack for round-off in flat regions
    let slack = 1e-14 * (lo.abs().max(hi.abs())).max(1e-300);
    let in_range = values.iter().all(|&v| v >= lo - slack && v <= hi + slack);
    let up = values.windows(2).all(|w| w[1] >= w[0] - slack);
    let down = values.windows(2).all(|w| w[1] <= w[0] + slack);
    in_range && (up || down)
}

/// Monomial coefficients of the Lagrange interpolant through `(nodes, ys)`.
fn lagrange_coeffs(nodes: &[f64], ys: &[f64]) -> Result<Coeffs> {
    let n = nodes.len();
    let v = DMatrix::from_fn(n, n, |r, c| nodes[r].powi(c as i32));
    let sol = v
        .lu()
        .solve(&DVector::from_column_slice(ys))
        .ok_or(Error::SingularSystem)?;
    Ok(sol.iter().copied().collect())
}

/// `prod (xi - nodes_j) / (xi0 - nodes_j)` in monomial form.
fn vanishing_poly(nodes: &[f64], xi0: f64) -> Coeffs {
    let mut c: Coeffs = SmallVec::from_slice(&[1.0]);
    for &x in nodes {
        let scale = 1.0 / (xi0 - x);
        let mut next: Coeffs = SmallVec::from_elem(0.0, c.len() + 1);
        for (d, &a) in c.iter().enumerate() {
            next[d + 1] += a * scale;
            next[d] -= a * x * scale;
        }
        c = next;
    }
    c
}

/// Auxiliary node: the cell center unless a constraint node sits there.
pub fn auxiliary_node(nodes_xi: &[f64]) -> f64 {
    if nodes_xi.iter().any(|&x| x.abs() < 1e-14) {
        0.25
    } else {
        0.0
    }
}

/// Polynomial of degree `xs.len()` through `(xs, ys)` with average `avg`,
/// built as interpolant plus a multiple of the polynomial vanishing at `xs`.
pub fn interpolate_points_with_average(xs: &[f64], ys: &[f64], avg: f64, dx: f64) -> Result<LocalPolynomial> {
    let nodes: Vec<f64> = xs.iter().map(|x| x / dx).collect();
    interpolate_with_aux(&nodes, ys, avg, dx, auxiliary_node(&nodes))
}

/// As [`interpolate_points_with_average`] with nodes in units of `dx` and an
/// explicit auxiliary node.
pub fn interpolate_with_aux(nodes: &[f64], ys: &[f64], avg: f64, dx: f64, xi0: f64) -> Result<LocalPolynomial> {
    if nodes.contains(&xi0) {
        return Err(Error::InvalidConfig("auxiliary node coincides with a constraint node".into()));
    }
    let p1 = lagrange_coeffs(nodes, ys)?;
    let p2 = vanishing_poly(nodes, xi0);
    let int_p2: f64 = p2.iter().enumerate().map(|(d, &c)| c * monomial_integral(d)).sum();
    let p2_poly = LocalPolynomial::new(p2.iter().copied(), 1.0);
    let max_p2 = (0..=64)
        .map(|s| p2_poly.eval_xi(-0.5 + s as f64 / 64.0).abs())
        .fold(0.0, f64::max);
    if int_p2.abs() < 1e-12 * max_p2 {
        return Err(Error::SingularAverageConstraint);
    }
    let int_p1: f64 = p1.iter().enumerate().map(|(d, &c)| c * monomial_integral(d)).sum();
    let alpha = (avg - int_p1) / int_p2;
    let mut coeffs: Coeffs = p2.iter().map(|c| alpha * c).collect();
    for (d, &c) in p1.iter().enumerate() {
        coeffs[d] += c;
    }
    Ok(LocalPolynomial::new(coeffs, dx))
}

/// Inverse of the constraint matrix mapping monomial coefficients in `xi` to
/// `(q_l, moments 0..=k, q_r)`.
fn moment_map(k: usize) -> Result<&'static DMatrix<f64>> {
    static MAPS: [OnceLock<Option<DMatrix<f64>>>; MAX_MOMENT + 1] = [const { OnceLock::new() }; MAX_MOMENT + 1];
    if k > MAX_MOMENT {
        return Err(Error::UnsupportedOrder(k + 3));
    }
    MAPS[k]
        .get_or_init(|| {
            let n = k + 3;
            let m = DMatrix::from_fn(n, n, |r, d| {
                if r == 0 {
                    (-0.5f64).powi(d as i32)
                } else if r == n - 1 {
                    0.5f64.powi(d as i32)
                } else {
                    let p = r - 1;
                    (p + 1) as f64 * 2f64.powi(p as i32) * monomial_integral(d + p)
                }
            });
            m.try_inverse()
        })
        .as_ref()
        .ok_or(Error::SingularSystem)
}

/// Polynomial of degree `k + 2` with the given interface values and
/// normalized moments `0..=k`.
pub fn moment_poly(q_l: f64, q_r: f64, moments: &[f64], dx: f64) -> Result<LocalPolynomial> {
    let k = moments
        .len()
        .checked_sub(1)
        .ok_or_else(|| Error::InvalidConfig("at least the average is required".into()))?;
    let inv = moment_map(k)?;
    let n = k + 3;
    let mut coeffs: Coeffs = SmallVec::from_elem(0.0, n);
    for (d, c) in coeffs.iter_mut().enumerate() {
        let mut acc = inv[(d, 0)] * q_l + inv[(d, n - 1)] * q_r;
        for (p, &m) in moments.iter().enumerate() {
            acc += inv[(d, p + 1)] * m;
        }
        *c = acc;
    }
    Ok(LocalPolynomial::new(coeffs, dx))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn parabola_examples() {
        let p = parabolic(0.0, 0.5, 1.0, 1.0);
        assert_eq!(p.coeffs.as_slice(), &[0.5, 1.0, 0.0]);
        let p = parabolic(0.0, 1.0 / 3.0, 1.0, 1.0);
        assert!(close(p.coeffs[0], 0.25, 1e-15) && close(p.coeffs[1], 1.0, 1e-15) && close(p.coeffs[2], 1.0, 1e-15));
        assert!(close(p.eval(-0.5), 0.0, 1e-15) && close(p.eval(0.5), 1.0, 1e-15));
        assert!(close(p.mean(), 1.0 / 3.0, 1e-15));
        let p = parabolic(1.0, 1.0, 1.0, 0.3);
        assert_eq!(p.coeffs.as_slice(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn parabola_scales_with_dx() {
        let p = parabolic(0.0, 1.0 / 3.0, 1.0, 0.1);
        assert!(close(p.eval(-0.05), 0.0, 1e-14));
        assert!(close(p.eval(0.05), 1.0, 1e-14));
        // slope at the right end: (4 q_r + 2 q_l - 6 avg)/dx = 2/dx
        assert!(close(p.derivative(0.05), 20.0, 1e-13));
    }

    #[test]
    fn power_laws() {
        let pl = power_law(PowerLawForm::One, 0.0, 1.0 / 3.0, 1.0, 1.0).unwrap();
        let par = parabolic(0.0, 1.0 / 3.0, 1.0, 1.0);
        assert!(close(pl.exponent, 2.0, 1e-14));
        for s in 0..=10 {
            let x = -0.5 + s as f64 / 10.0;
            assert!((pl.eval(x) - par.eval(x)).abs() < 1e-14);
        }
        let pl2 = power_law(PowerLawForm::Two, 0.0, 2.0 / 3.0, 1.0, 1.0).unwrap();
        let par = parabolic(0.0, 2.0 / 3.0, 1.0, 1.0);
        for s in 0..=10 {
            let x = -0.5 + s as f64 / 10.0;
            assert!((pl2.eval(x) - par.eval(x)).abs() < 1e-14);
        }
        let pl = power_law(PowerLawForm::One, 0.0, 0.2, 1.0, 1.0).unwrap();
        assert!(close(pl.exponent, 4.0, 1e-14));
        assert!(close(pl.eval(0.0), 0.0625, 1e-14));
        assert!(close(pl.mean(), 0.2, 1e-14));
        assert_eq!(
            power_law(PowerLawForm::One, 0.0, 0.0, 1.0, 1.0),
            Err(Error::DegenerateData)
        );
    }

    #[test]
    fn power_law_derivatives() {
        assert!(close(power_law_derivative(PowerLawForm::One, 0.0, 0.2, 1.0, 1.0).unwrap(), 4.0, 1e-14));
        assert!(close(power_law_derivative(PowerLawForm::One, 0.0, 1.0 / 3.0, 1.0, 1.0).unwrap(), 2.0, 1e-14));
        assert!(close(power_law_derivative(PowerLawForm::One, 0.0, 0.5, 1.0, 1.0).unwrap(), 1.0, 1e-15));
        let pl = power_law(PowerLawForm::One, 0.0, 0.2, 1.0, 1.0).unwrap();
        assert!(close(pl.derivative(0.5), 4.0, 1e-14));
        let pl2 = power_law(PowerLawForm::Two, 0.0, 0.9, 1.0, 1.0).unwrap();
        assert!(close(
            pl2.derivative(-0.5),
            power_law_derivative(PowerLawForm::Two, 0.0, 0.9, 1.0, 1.0).unwrap(),
            1e-13
        ));
    }

    #[test]
    fn parabola_or_power_law_choice() {
        assert!(matches!(limited_parabola_or_power(0.0, 0.5, 1.0, 1.0), ReconChoice::Parabola(_)));
        assert!(matches!(limited_parabola_or_power(0.0, 0.2, 1.0, 1.0), ReconChoice::PowerLaw1(_)));
        assert!(matches!(limited_parabola_or_power(0.0, 0.9, 1.0, 1.0), ReconChoice::PowerLaw2(_)));
        assert!(matches!(limited_parabola_or_power(0.0, 1.5, 1.0, 1.0), ReconChoice::Parabola(_)));
        // decreasing data mirror the choice
        assert!(matches!(limited_parabola_or_power(1.0, 0.8, 0.0, 1.0), ReconChoice::PowerLaw1(_)));
        // avg at an end value is monotone but degenerate; stays finite
        let c = limited_parabola_or_power(0.0, 0.0, 1.0, 1.0);
        assert!(c.eval(0.0).is_finite() && c.eval(0.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_monotonicity() {
        assert!(monotone_on_samples(&LocalPolynomial::new([0.5, 1.0], 1.0), 10));
        assert!(monotone_on_samples(&LocalPolynomial::new([0.25, 1.0, 1.0], 1.0), 10));
        assert!(!monotone_on_samples(&LocalPolynomial::new([1.0, 0.0, -4.0], 1.0), 5));
    }

    #[test]
    fn average_constrained_interpolation() {
        let p = interpolate_points_with_average(&[-0.5, 0.5], &[0.0, 1.0], 1.0 / 3.0, 1.0).unwrap();
        let expect = [0.25, 1.0, 1.0];
        for (a, b) in p.coeffs.iter().zip(expect) {
            assert!(close(*a, b, 1e-14));
        }
        let p = interpolate_points_with_average(&[-0.5, 0.5], &[0.0, 1.0], 0.5, 1.0).unwrap();
        assert!(close(p.coeffs[0], 0.5, 1e-15) && close(p.coeffs[1], 1.0, 1e-15) && p.coeffs[2].abs() < 1e-15);
        assert_eq!(
            interpolate_points_with_average(&[-0.5, 0.0, 0.5], &[0.0, 1.0, 2.0], 1.0, 1.0),
            Err(Error::SingularAverageConstraint)
        );
    }

    #[test]
    fn auxiliary_node_is_irrelevant() {
        let nodes = [-0.5, -0.415, 0.415, 0.5];
        let ys = [0.3, -1.0, 2.0, 0.7];
        let a = interpolate_with_aux(&nodes, &ys, 0.4, 1.0, 0.0).unwrap();
        let b = interpolate_with_aux(&nodes, &ys, 0.4, 1.0, 0.1).unwrap();
        for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
            assert!((x - y).abs() < 1e-11);
        }
        for (&x, &y) in nodes.iter().zip(&ys) {
            assert!((a.eval_xi(x) - y).abs() < 1e-12);
        }
        assert!((a.mean() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn moment_poly_examples() {
        let p = moment_poly(1.0, 1.0, &[1.0, 0.0, 1.0], 1.0).unwrap();
        assert!((p.coeffs[0] - 1.0).abs() < 1e-13);
        assert!(p.coeffs[1..].iter().all(|c| c.abs() < 1e-12));
        let p = moment_poly(-0.5, 0.5, &[0.0, 1.0 / 3.0, 0.0], 1.0).unwrap();
        assert!(p.coeffs[0].abs() < 1e-13 && (p.coeffs[1] - 1.0).abs() < 1e-12);
        assert!(p.coeffs[2..].iter().all(|c| c.abs() < 1e-11));
    }

    #[test]
    fn moment_poly_k2_closed_form() {
        // degree 4 through q_l, q_r with moments m0, m1, m2, checked against
        // direct constraint evaluation at random points
        let (q_l, q_r, m) = (0.3, -0.8, [0.1, 0.7, -0.2]);
        let p = moment_poly(q_l, q_r, &m, 2.0).unwrap();
        assert!((p.eval(-1.0) - q_l).abs() < 1e-12);
        assert!((p.eval(1.0) - q_r).abs() < 1e-12);
        for (k, &mk) in m.iter().enumerate() {
            assert!((p.moment(k) - mk).abs() < 1e-11);
        }
    }
}
