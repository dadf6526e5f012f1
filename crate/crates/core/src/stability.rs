//! Von Neumann analysis of the schemes applied to linear advection.
//!
//! A Fourier mode `q_i = q_hat t^i` with `t = exp(iK)` turns one time step
//! into a small complex matrix acting on the per-cell block
//! `(q_{i+1/2}, avg_i, moments or interior values)`. The step is stable at
//! `K` when the characteristic polynomial of that matrix has all zeros in
//! the closed unit disc, decided by the Schur recursion.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_bigint::{BigInt, Sign};
use num_complex::{Complex, Complex64};
use rayon::prelude::*;
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::models::Model;
use crate::schemes::{ConfigB, SchemeB, VariantConfig};
use crate::state::{Field, StateB};
use crate::stencils::{fd_tableau, md_derive, md_tableau, Slot};

/// Largest update matrix accepted by [`char_poly`].
pub const MAX_MATRIX: usize = 8;
/// Below this modulus (relative to the normalised `f`) the double-double
/// pass defers to exact arithmetic.
pub const SCHUR_TOL: f64 = 1e-11;
/// Closed-disc margin: `f(z (1 + SHRINK))` must pass the open-disc test.
pub const SHRINK: f64 = 1e-7;
pub const DEFAULT_K_SAMPLES: usize = 257;
pub const DEFAULT_NU_RESOLUTION: f64 = 0.0025;

const TRIM: f64 = 1e-14;

type Dd = Complex<TwoFloat>;

fn dd(c: Complex64) -> Dd {
    Dd::new(TwoFloat::from(c.re), TwoFloat::from(c.im))
}

fn round(c: Dd) -> Complex64 {
    Complex64::new(c.re.hi() + c.re.lo(), c.im.hi() + c.im.lo())
}

fn dd_zero() -> Dd {
    Dd::new(TwoFloat::from(0.0), TwoFloat::from(0.0))
}

/// Polynomial `sum a_j z^j` with complex coefficients, stored without
/// negligible leading terms.
///
/// Coefficients are kept in double-double precision: zeros clustered near
/// the unit circle (all eigenvalues of a small time step crowd around 1)
/// are far more sensitive to the coefficients than to the matrix entries,
/// and the Schur recursion loses digits on such clusters (two zeros at
/// distances `d1`, `d2` from the circle leave a zero of `f_1` at distance
/// about `d1 d2 / 2`).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPoly {
    coeffs: Vec<Dd>,
}

impl ComplexPoly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self::from_dd(coeffs.into_iter().map(dd).collect())
    }

    fn from_dd(coeffs: Vec<Dd>) -> Self {
        Self::trimmed(coeffs, TRIM)
    }

    fn trimmed(mut coeffs: Vec<Dd>, rel: f64) -> Self {
        let max = coeffs.iter().map(|c| round(*c).norm()).fold(0.0, f64::max);
        while coeffs.last().is_some_and(|c| round(*c).norm() <= rel * max) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// Monic polynomial with the given zeros.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![dd(Complex64::new(1.0, 0.0))];
        for &r in roots {
            let r = dd(r);
            let mut next = vec![dd_zero(); c.len() + 1];
            for (j, &a) in c.iter().enumerate() {
                next[j + 1] += a;
                next[j] -= r * a;
            }
            c = next;
        }
        Self::from_dd(c)
    }

    /// Coefficients `a_0..a_n` rounded to double precision.
    pub fn coeffs(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(|&c| round(c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let z = dd(z);
        round(self.coeffs.iter().rev().fold(dd_zero(), |acc, &a| acc * z + a))
    }

    /// `f*(z) = sum conj(a_{n-j}) z^j`.
    pub fn reflected(&self) -> Self {
        Self::from_dd(self.coeffs.iter().rev().map(|a| a.conj()).collect())
    }

    /// `f_1 = (f*(0) f(z) - f(0) f*(z)) / z`, untrimmed.
    fn schur_transform_raw(&self) -> Vec<Dd> {
        let n = self.coeffs.len() - 1;
        let a0 = self.coeffs[0];
        let an = self.coeffs[n].conj();
        (0..n)
            .map(|j| an * self.coeffs[j + 1] - a0 * self.coeffs[n - 1 - j].conj())
            .collect()
    }

    pub fn schur_transform(&self) -> Self {
        if self.coeffs.len() < 2 {
            return Self::from_dd(Vec::new());
        }
        Self::from_dd(self.schur_transform_raw())
    }

    pub fn derivative(&self) -> Self {
        Self::from_dd(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, &a)| a * TwoFloat::from(j as f64))
                .collect(),
        )
    }

    /// `f(s z)`.
    pub fn scaled_argument(&self, s: f64) -> Self {
        let s = TwoFloat::from(s);
        let mut p = TwoFloat::from(1.0);
        Self::from_dd(
            self.coeffs
                .iter()
                .map(|&a| {
                    let v = a * p;
                    p *= s;
                    v
                })
                .collect(),
        )
    }

    /// Scales by a power of two (exactly) so the largest part is in `[1, 2)`.
    fn normalize(&mut self) {
        let max = self
            .coeffs
            .iter()
            .map(|c| c.re.hi().abs().max(c.im.hi().abs()))
            .fold(0.0, f64::max);
        if max > 0.0 {
            let scale = TwoFloat::from(2f64.powi(-(max.log2().floor() as i32)));
            for c in self.coeffs.iter_mut() {
                *c = Dd::new(c.re * scale, c.im * scale);
            }
        }
    }
}

/// Characteristic polynomial `det(z I - A)` by the Faddeev-LeVerrier
/// recursion, carried out in double-double arithmetic.
pub fn char_poly(a: &DMatrix<Complex64>) -> Result<ComplexPoly> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidConfig("characteristic polynomial of a non-square matrix".into()));
    }
    if n > MAX_MATRIX {
        return Err(Error::MatrixTooLarge(n));
    }
    let a: Vec<Dd> = (0..n * n).map(|idx| dd(a[(idx / n, idx % n)])).collect();
    let mut c = vec![dd_zero(); n + 1];
    c[n] = dd(Complex64::new(1.0, 0.0));
    let mut am = vec![dd_zero(); n * n];
    for k in 1..=n {
        let mut m = am.clone();
        for d in 0..n {
            m[d * n + d] += c[n - k + 1];
        }
        let mut trace = dd_zero();
        for r in 0..n {
            for col in 0..n {
                let mut acc = dd_zero();
                for j in 0..n {
                    acc += a[r * n + j] * m[j * n + col];
                }
                am[r * n + col] = acc;
            }
            trace += am[r * n + r];
        }
        c[n - k] = Dd::new(div_f64(-trace.re, k as f64), div_f64(-trace.im, k as f64));
    }
    Ok(ComplexPoly { coeffs: c })
}

/// Double-double quotient by a double; the division of the `twofloat`
/// crate is only accurate to double precision.
fn div_f64(x: TwoFloat, b: f64) -> TwoFloat {
    let q1 = x.hi() / b;
    let r = x - TwoFloat::new_mul(q1, b);
    TwoFloat::new_add(q1, (r.hi() + r.lo()) / b)
}

/// Schur's recursive test: are all zeros of `f` in the unit disc?
/// Zeros on the circle are only accepted through the `f_1 = 0` branch.
///
/// A double-double pass settles clear cases; near ties and near-vanishing
/// `f_1` are redone in exact arithmetic on the (dyadic) coefficients.
pub fn schur_inside_unit_disc(f: &ComplexPoly) -> Result<bool> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    Ok(match schur_dd(f) {
        Some(v) => v,
        None => schur_exact(f),
    })
}

/// `None` when a comparison is too close to call in double-double.
fn schur_dd(f: &ComplexPoly) -> Option<bool> {
    let mut f = f.clone();
    f.normalize();
    let tol = TwoFloat::from(SCHUR_TOL * SCHUR_TOL);
    let close = TwoFloat::from(1e-12);
    loop {
        let n = f.coeffs.len() - 1;
        if n == 0 {
            return Some(true);
        }
        let raw = f.schur_transform_raw();
        let size = raw.iter().map(|c| c.norm_sqr()).fold(TwoFloat::from(0.0), |a, b| a.max(b));
        if size <= tol {
            return None;
        }
        let (lead, tail) = (f.coeffs[n].norm_sqr(), f.coeffs[0].norm_sqr());
        f = if (lead - tail).abs() <= close * lead {
            return None;
        } else if lead > tail {
            // the recursion itself must not drop small leading terms
            ComplexPoly::trimmed(raw, 1e-30)
        } else {
            return Some(false);
        };
        if f.is_zero() {
            return Some(false);
        }
        f.normalize();
    }
}

/// Gaussian integer.
#[derive(Debug, Clone, PartialEq)]
struct GInt {
    re: BigInt,
    im: BigInt,
}

impl GInt {
    fn mul(&self, o: &GInt) -> GInt {
        GInt {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn sub(&self, o: &GInt) -> GInt {
        GInt {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }

    fn conj(&self) -> GInt {
        GInt {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    fn norm_sqr(&self) -> BigInt {
        &self.re * &self.re + &self.im * &self.im
    }

    fn is_zero(&self) -> bool {
        self.re.sign() == Sign::NoSign && self.im.sign() == Sign::NoSign
    }
}

/// `x = m 2^e` with integer `m`.
fn decode(x: f64) -> (i64, i32) {
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 0 { 1 } else { -1 };
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & 0x000f_ffff_ffff_ffff) as i64;
    let (m, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | 0x0010_0000_0000_0000, exp - 1075)
    };
    (sign * m, e)
}

fn to_gints(f: &ComplexPoly) -> Vec<GInt> {
    let parts: Vec<[(i64, i32); 4]> = f
        .coeffs
        .iter()
        .map(|c| [decode(c.re.hi()), decode(c.re.lo()), decode(c.im.hi()), decode(c.im.lo())])
        .collect();
    let e_min = parts
        .iter()
        .flatten()
        .filter(|(m, _)| *m != 0)
        .map(|&(_, e)| e)
        .min()
        .unwrap_or(0);
    let big = |(m, e): (i64, i32)| BigInt::from(m) << (e - e_min) as usize;
    parts
        .into_iter()
        .map(|[a, b, c, d]| GInt {
            re: big(a) + big(b),
            im: big(c) + big(d),
        })
        .collect()
}

/// The recursion in exact arithmetic.
fn schur_exact(f: &ComplexPoly) -> bool {
    let mut f = to_gints(f);
    loop {
        while f.last().is_some_and(GInt::is_zero) {
            f.pop();
        }
        if f.is_empty() {
            return false;
        }
        let n = f.len() - 1;
        if n == 0 {
            return true;
        }
        let a0 = f[0].clone();
        let an = f[n].conj();
        let f1: Vec<GInt> = (0..n)
            .map(|j| an.mul(&f[j + 1]).sub(&a0.mul(&f[n - 1 - j].conj())))
            .collect();
        f = if f1.iter().all(GInt::is_zero) {
            f.iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| GInt {
                    re: &c.re * j,
                    im: &c.im * j,
                })
                .collect()
        } else if an.norm_sqr() > a0.norm_sqr() {
            f1
        } else {
            return false;
        };
        // strip common factors of two to curb growth
        let shift = f
            .iter()
            .flat_map(|c| [c.re.trailing_zeros(), c.im.trailing_zeros()])
            .flatten()
            .min()
            .unwrap_or(0);
        if shift > 0 {
            for c in f.iter_mut() {
                c.re >>= shift as usize;
                c.im >>= shift as usize;
            }
        }
    }
}

/// Closed-disc test used for von Neumann stability.
pub fn von_neumann_stable(f: &ComplexPoly) -> Result<bool> {
    schur_inside_unit_disc(&f.scaled_argument(1.0 + SHRINK))
}

/// Laurent polynomial in `t = exp(iK)` with real matrix coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSymbol {
    size: usize,
    terms: BTreeMap<i32, DMatrix<f64>>,
}

impl MatrixSymbol {
    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            terms: BTreeMap::new(),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Adds `v t^power` to entry `(row, col)`.
    pub fn add(&mut self, power: i32, row: usize, col: usize, v: f64) {
        let size = self.size;
        self.terms
            .entry(power)
            .or_insert_with(|| DMatrix::zeros(size, size))[(row, col)] += v;
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &DMatrix<f64>)> {
        self.terms.iter().map(|(&p, m)| (p, m))
    }

    pub fn eval(&self, k: f64) -> DMatrix<Complex64> {
        let mut out = DMatrix::<Complex64>::zeros(self.size, self.size);
        for (&p, m) in &self.terms {
            let t = Complex64::from_polar(1.0, k * p as f64);
            out += m.map(|v| t * v);
        }
        out
    }
}

/// Scheme configuration at a fixed CFL number `nu = c dt / dx`, `c > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSpec {
    pub config: VariantConfig,
    pub nu: f64,
}

/// The update of one time step in Fourier space.
#[derive(Debug, Clone)]
pub enum UpdateOperator {
    /// Runge-Kutta polynomial `sum g_k (nu L(t))^k` of the semidiscrete operator.
    MethodOfLines {
        l: MatrixSymbol,
        nu: f64,
        gammas: Vec<f64>,
    },
    /// Fully discrete one-step update.
    Explicit(MatrixSymbol),
}

impl UpdateOperator {
    pub fn new(spec: &SymbolSpec) -> Result<Self> {
        if spec.config.limiter() {
            return Err(Error::InvalidConfig("stability analysis needs the limiter off".into()));
        }
        if !(spec.nu >= 0.0 && spec.nu.is_finite()) {
            return Err(Error::InvalidConfig(format!("CFL number must be non-negative, got {}", spec.nu)));
        }
        Ok(match &spec.config {
            VariantConfig::A(c) => UpdateOperator::MethodOfLines {
                l: semidiscrete_symbol(&spec.config)?,
                nu: spec.nu,
                gammas: c.rk.stability_coefficients(),
            },
            VariantConfig::C(c) => UpdateOperator::MethodOfLines {
                l: semidiscrete_symbol(&spec.config)?,
                nu: spec.nu,
                gammas: c.rk.stability_coefficients(),
            },
            VariantConfig::B(c) => UpdateOperator::Explicit(impulse_symbol_b(c, spec.nu)?),
        })
    }

    pub fn size(&self) -> usize {
        match self {
            UpdateOperator::MethodOfLines { l, .. } => l.size(),
            UpdateOperator::Explicit(g) => g.size(),
        }
    }

    pub fn matrix(&self, k: f64) -> DMatrix<Complex64> {
        match self {
            UpdateOperator::MethodOfLines { l, nu, gammas } => {
                let n = l.size();
                let z = l.eval(k) * Complex64::new(*nu, 0.0);
                let id = DMatrix::<Complex64>::identity(n, n);
                let mut g = &id * Complex64::new(*gammas.last().unwrap_or(&1.0), 0.0);
                for &gk in gammas.iter().rev().skip(1) {
                    g = g * &z + &id * Complex64::new(gk, 0.0);
                }
                g
            }
            UpdateOperator::Explicit(g) => g.eval(k),
        }
    }
}

pub fn build_update_matrix(spec: &SymbolSpec, k: f64) -> Result<DMatrix<Complex64>> {
    Ok(UpdateOperator::new(spec)?.matrix(k))
}

/// `dt L(t)` at `nu = 1` for variants A and C, from the tableaus.
pub fn semidiscrete_symbol(config: &VariantConfig) -> Result<MatrixSymbol> {
    match config {
        VariantConfig::A(c) => {
            let t = fd_tableau(&c.fd, c.param)?;
            let mut l = MatrixSymbol::zeros(2);
            for &(slot, b) in t.terms() {
                match slot {
                    Slot::Point(j) => l.add(j, 0, 0, -b),
                    Slot::Avg(j) => l.add(j, 0, 1, -b),
                }
            }
            l.add(0, 1, 0, -1.0);
            l.add(-1, 1, 0, 1.0);
            Ok(l)
        }
        VariantConfig::C(c) => {
            let md = md_tableau(c.order).or_else(|_| md_derive(c.order))?;
            let k1 = md.n_moments();
            let size = k1 + 1;
            if size > MAX_MATRIX {
                return Err(Error::MatrixTooLarge(size));
            }
            let mut l = MatrixSymbol::zeros(size);
            l.add(0, 0, 0, -md.right);
            l.add(-1, 0, 0, -md.left);
            for (p, &b) in md.moments.iter().enumerate() {
                l.add(0, 0, p + 1, -b);
            }
            for p in 0..k1 {
                let w = (p + 1) as f64;
                let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
                l.add(0, p + 1, 0, -w);
                l.add(-1, p + 1, 0, w * sign);
                if p > 0 {
                    l.add(0, p + 1, p, 2.0 * w);
                }
            }
            Ok(l)
        }
        VariantConfig::B(_) => Err(Error::InvalidConfig("variant B has no semidiscrete form".into())),
    }
}

/// Symbol of one step of variant B, read off the response of the actual
/// update to unit impulses on a small periodic grid (`c = dx = 1`).
fn impulse_symbol_b(cfg: &ConfigB, nu: f64) -> Result<MatrixSymbol> {
    let k = cfg.xi.len();
    let size = k + 2;
    if size > MAX_MATRIX {
        return Err(Error::MatrixTooLarge(size));
    }
    let scheme = SchemeB::new(cfg)?;
    let n = 7usize;
    let centre = n / 2;
    let model = Model::Advection { speed: 1.0 };
    let dx = Grid::new(n, 0.0, n as f64)?.dx();
    let mut g = MatrixSymbol::zeros(size);
    for d in 0..size {
        let mut s = StateB {
            avgs: Field::zeros(1, n),
            ifaces: Field::zeros(1, n),
            interior: vec![Field::zeros(1, n); k],
            xi: cfg.xi.clone(),
        };
        *block_mut(&mut s, d).at_mut(0, centre) = 1.0;
        let out = scheme.step(&s, &model, dx, nu)?;
        for e in 0..size {
            let f = block(&out, e);
            for j in 0..n {
                let v = f.at(0, j);
                if v != 0.0 {
                    g.add(centre as i32 - j as i32, e, d, v);
                }
            }
        }
    }
    Ok(g)
}

fn block(s: &StateB, d: usize) -> &Field {
    match d {
        0 => &s.ifaces,
        1 => &s.avgs,
        _ => &s.interior[d - 2],
    }
}

fn block_mut(s: &mut StateB, d: usize) -> &mut Field {
    match d {
        0 => &mut s.ifaces,
        1 => &mut s.avgs,
        _ => &mut s.interior[d - 2],
    }
}

/// Equispaced wavenumbers on `[0, pi]`; the verdict at `-K` is the same.
pub fn k_samples(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![PI],
        _ => (0..count).map(|j| PI * j as f64 / (count - 1) as f64).collect(),
    }
}

/// Stable at every sampled wavenumber. A CFL number beyond the reach of
/// the characteristic tracing counts as unstable.
pub fn is_stable(spec: &SymbolSpec, k_count: usize) -> Result<bool> {
    let op = match UpdateOperator::new(spec) {
        Ok(op) => op,
        Err(Error::CflExceeded(_)) => return Ok(false),
        Err(e) => return Err(e),
    };
    for k in k_samples(k_count) {
        if !von_neumann_stable(&char_poly(&op.matrix(k))?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Largest `nu = j * resolution <= nu_max` such that every sampled smaller
/// CFL number is stable.
pub fn cfl_max(config: &VariantConfig, nu_max: f64, resolution: f64, k_count: usize) -> Result<f64> {
    let steps = (nu_max / resolution + 1e-9).floor() as usize;
    let mut last = 0.0;
    for j in 1..=steps {
        let nu = j as f64 * resolution;
        let spec = SymbolSpec {
            config: config.clone(),
            nu,
        };
        if !is_stable(&spec, k_count)? {
            break;
        }
        last = nu;
    }
    Ok(last)
}

/// Stability verdicts on a (parameter, CFL) grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityMap {
    pub params: Vec<f64>,
    pub nus: Vec<f64>,
    /// Row-major: `stable[p * nus.len() + j]`.
    pub stable: Vec<bool>,
}

impl StabilityMap {
    pub fn get(&self, p: usize, j: usize) -> bool {
        self.stable[p * self.nus.len() + j]
    }

    /// Largest sampled `nu` with all smaller sampled values stable; 0 if the
    /// first sample is unstable.
    pub fn cfl_max(&self, p: usize) -> f64 {
        let mut last = 0.0;
        for (j, &nu) in self.nus.iter().enumerate() {
            if !self.get(p, j) {
                break;
            }
            last = nu;
        }
        last
    }
}

/// Evaluates `family(param)` at every `(param, nu)` pair in parallel.
pub fn scan_region(
    family: impl Fn(f64) -> Result<VariantConfig> + Sync,
    params: &[f64],
    nus: &[f64],
    k_count: usize,
) -> Result<StabilityMap> {
    if params.is_empty() || nus.is_empty() {
        return Err(Error::InvalidConfig("stability scan needs non-empty ranges".into()));
    }
    let configs = params.iter().map(|&p| family(p)).collect::<Result<Vec<_>>>()?;
    let stable = (0..params.len() * nus.len())
        .into_par_iter()
        .map(|idx| {
            let spec = SymbolSpec {
                config: configs[idx / nus.len()].clone(),
                nu: nus[idx % nus.len()],
            };
            is_stable(&spec, k_count)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityMap {
        params: params.to_vec(),
        nus: nus.to_vec(),
        stable,
    })
}
