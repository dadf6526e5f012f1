//! Degree-of-freedom layouts for the three variants, initialization by cell
//! quadrature, and error/conservation diagnostics.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::models::QVec;
use crate::quadrature::GaussLegendre;

/// Nodes per cell used to initialize averages and moments (exact to degree 11).
pub const INIT_QUADRATURE_NODES: usize = 6;

/// `n` values of an `m`-component quantity, stored component-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    m: usize,
    n: usize,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            data: vec![0.0; m * n],
        }
    }

    pub fn from_fn(m: usize, n: usize, mut f: impl FnMut(usize) -> QVec) -> Self {
        let mut field = Self::zeros(m, n);
        for i in 0..n {
            let v = f(i);
            field.set(i, &v);
        }
        field
    }

    /// Scalar field from plain values.
    pub fn scalar(values: Vec<f64>) -> Self {
        Self {
            m: 1,
            n: values.len(),
            data: values,
        }
    }

    pub fn components(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn at(&self, c: usize, i: usize) -> f64 {
        self.data[c * self.n + i]
    }

    #[inline]
    pub fn at_mut(&mut self, c: usize, i: usize) -> &mut f64 {
        &mut self.data[c * self.n + i]
    }

    #[inline]
    pub fn get(&self, i: usize) -> QVec {
        (0..self.m).map(|c| self.data[c * self.n + i]).collect()
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: &[f64]) {
        debug_assert_eq!(v.len(), self.m);
        for (c, &x) in v.iter().enumerate() {
            self.data[c * self.n + i] = x;
        }
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        &self.data[c * self.n..(c + 1) * self.n]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * self.n..(c + 1) * self.n]
    }

    pub fn raw(&self) -> &[f64] {
        &self.data
    }

    pub fn raw_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Periodic shift: `out[i] = self[i - by]`.
    pub fn rolled(&self, by: isize) -> Self {
        let mut out = self.clone();
        for c in 0..self.m {
            for i in 0..self.n {
                let src = (i as isize - by).rem_euclid(self.n as isize) as usize;
                out.data[c * self.n + i] = self.data[c * self.n + src];
            }
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Flat access to every field of a state, used by the Runge-Kutta stages.
pub trait Dofs: Clone {
    fn fields(&self) -> Vec<&Field>;
    fn fields_mut(&mut self) -> Vec<&mut Field>;

    /// `self <- a * self + b * other`.
    fn combine(&mut self, a: f64, other: &Self, b: f64) {
        for (x, y) in self.fields_mut().into_iter().zip(other.fields()) {
            for (u, v) in x.raw_mut().iter_mut().zip(y.raw()) {
                *u = a * *u + b * v;
            }
        }
    }

    fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        for f in out.fields_mut() {
            f.raw_mut().iter_mut().for_each(|u| *u *= a);
        }
        out
    }
}

/// Variant A: averages plus shared interface values. `ifaces[i]` is the value
/// at interface `i + 1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateA {
    pub avgs: Field,
    pub ifaces: Field,
}

/// Variant B: variant A plus `k` interior point values per cell at offsets
/// `dx * xi[j]` from the cell center.
#[derive(Debug, Clone, PartialEq)]
pub struct StateB {
    pub avgs: Field,
    pub ifaces: Field,
    pub interior: Vec<Field>,
    pub xi: Vec<f64>,
}

/// Variant C: interface values plus moments `0..=k`; `moments[0]` holds the
/// averages.
#[derive(Debug, Clone, PartialEq)]
pub struct StateC {
    pub ifaces: Field,
    pub moments: Vec<Field>,
}

impl Dofs for StateA {
    fn fields(&self) -> Vec<&Field> {
        vec![&self.avgs, &self.ifaces]
    }
    fn fields_mut(&mut self) -> Vec<&mut Field> {
        vec![&mut self.avgs, &mut self.ifaces]
    }
}

impl Dofs for StateB {
    fn fields(&self) -> Vec<&Field> {
        let mut v = vec![&self.avgs, &self.ifaces];
        v.extend(self.interior.iter());
        v
    }
    fn fields_mut(&mut self) -> Vec<&mut Field> {
        let mut v = vec![&mut self.avgs, &mut self.ifaces];
        v.extend(self.interior.iter_mut());
        v
    }
}

impl Dofs for StateC {
    fn fields(&self) -> Vec<&Field> {
        let mut v = vec![&self.ifaces];
        v.extend(self.moments.iter());
        v
    }
    fn fields_mut(&mut self) -> Vec<&mut Field> {
        let mut v = vec![&mut self.ifaces];
        v.extend(self.moments.iter_mut());
        v
    }
}

/// Which degrees of freedom a variant carries.
#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    A,
    /// Interior node offsets in units of `dx`.
    B { xi: Vec<f64> },
    /// Highest moment index `k` (moments `0..=k`).
    C { max_moment: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum State {
    A(StateA),
    B(StateB),
    C(StateC),
}

/// Moment normalization `A_p = (p+1) 2^p / dx^(p+1)`.
pub fn moment_normalization(p: usize, dx: f64) -> f64 {
    (p + 1) as f64 * 2f64.powi(p as i32) / dx.powi(p as i32 + 1)
}

pub fn validate_xi(xi: &[f64]) -> Result<()> {
    if xi.iter().any(|&x| !(x > -0.5 && x < 0.5)) {
        return Err(Error::InvalidConfig(format!(
            "interior nodes must lie strictly inside (-1/2, 1/2): {xi:?}"
        )));
    }
    if xi.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidConfig(format!(
            "interior nodes must be strictly increasing: {xi:?}"
        )));
    }
    Ok(())
}

/// Initializes a state from a pointwise datum. Point values are samples,
/// averages and moments are Gauss-Legendre cell quadratures.
pub fn init_state(
    datum: &dyn Fn(f64) -> QVec,
    m: usize,
    grid: &Grid,
    layout: &Layout,
) -> Result<State> {
    let n = grid.n_cells();
    let dx = grid.dx();
    let gl = GaussLegendre::new(INIT_QUADRATURE_NODES);
    let ifaces = Field::from_fn(m, n, |i| datum(grid.iface(i)));
    // weighted cell mean of datum times xi^p, xi in [-1/2, 1/2]
    let cell_moment = |i: usize, p: usize| -> QVec {
        let mut acc: QVec = (0..m).map(|_| 0.0).collect();
        for (&x, &w) in gl.nodes.iter().zip(&gl.weights) {
            let v = datum(grid.center(i) + dx * x);
            let wp = w * x.powi(p as i32);
            for c in 0..m {
                acc[c] += wp * v[c];
            }
        }
        acc
    };
    let avgs = Field::from_fn(m, n, |i| cell_moment(i, 0));
    Ok(match layout {
        Layout::A => State::A(StateA { avgs, ifaces }),
        Layout::B { xi } => {
            validate_xi(xi)?;
            let interior = xi
                .iter()
                .map(|&s| Field::from_fn(m, n, |i| datum(grid.center(i) + dx * s)))
                .collect();
            State::B(StateB {
                avgs,
                ifaces,
                interior,
                xi: xi.clone(),
            })
        }
        Layout::C { max_moment } => {
            let mut moments = vec![avgs];
            for p in 1..=*max_moment {
                // A_p * dx^(p+1) = (p+1) 2^p
                let scale = (p + 1) as f64 * 2f64.powi(p as i32);
                moments.push(Field::from_fn(m, n, |i| {
                    cell_moment(i, p).iter().map(|v| scale * v).collect()
                }));
            }
            State::C(StateC { ifaces, moments })
        }
    })
}

impl State {
    pub fn ifaces(&self) -> &Field {
        match self {
            State::A(s) => &s.ifaces,
            State::B(s) => &s.ifaces,
            State::C(s) => &s.ifaces,
        }
    }

    pub fn avgs(&self) -> &Field {
        match self {
            State::A(s) => &s.avgs,
            State::B(s) => &s.avgs,
            State::C(s) => &s.moments[0],
        }
    }

    pub fn components(&self) -> usize {
        self.avgs().components()
    }

    pub fn n_cells(&self) -> usize {
        self.avgs().len()
    }

    /// All point values (interfaces and, for variant B, interior nodes).
    pub fn point_fields(&self) -> Vec<&Field> {
        match self {
            State::B(s) => {
                let mut v = vec![&s.ifaces];
                v.extend(s.interior.iter());
                v
            }
            _ => vec![self.ifaces()],
        }
    }

    pub fn all_finite(&self) -> bool {
        match self {
            State::A(s) => s.fields().iter().all(|f| f.all_finite()),
            State::B(s) => s.fields().iter().all(|f| f.all_finite()),
            State::C(s) => s.fields().iter().all(|f| f.all_finite()),
        }
    }

    /// Periodic shift of every field by `by` cells.
    pub fn rolled(&self, by: isize) -> Self {
        match self {
            State::A(s) => State::A(StateA {
                avgs: s.avgs.rolled(by),
                ifaces: s.ifaces.rolled(by),
            }),
            State::B(s) => State::B(StateB {
                avgs: s.avgs.rolled(by),
                ifaces: s.ifaces.rolled(by),
                interior: s.interior.iter().map(|f| f.rolled(by)).collect(),
                xi: s.xi.clone(),
            }),
            State::C(s) => State::C(StateC {
                ifaces: s.ifaces.rolled(by),
                moments: s.moments.iter().map(|f| f.rolled(by)).collect(),
            }),
        }
    }

    /// Largest absolute difference between two states of the same layout.
    pub fn max_abs_diff(&self, other: &State) -> f64 {
        let pairs: Vec<(&Field, &Field)> = match (self, other) {
            (State::A(a), State::A(b)) => a.fields().into_iter().zip(b.fields()).collect(),
            (State::B(a), State::B(b)) => a.fields().into_iter().zip(b.fields()).collect(),
            (State::C(a), State::C(b)) => a.fields().into_iter().zip(b.fields()).collect(),
            _ => return f64::INFINITY,
        };
        pairs
            .into_iter()
            .flat_map(|(x, y)| x.raw().iter().zip(y.raw()).map(|(u, v)| (u - v).abs()))
            .fold(0.0, f64::max)
    }
}

/// Exact solution sampled pointwise and as cell averages.
pub trait ExactSolution {
    fn value(&self, x: f64) -> QVec;
    fn cell_average(&self, grid: &Grid, i: usize) -> QVec;
}

/// L1 errors `(point values, averages)`, summed over components.
pub fn l1_errors(state: &State, exact: &dyn ExactSolution, grid: &Grid) -> (f64, f64) {
    let dx = grid.dx();
    let (ifaces, avgs) = (state.ifaces(), state.avgs());
    let mut err_point = 0.0;
    let mut err_avg = 0.0;
    for i in 0..grid.n_cells() {
        let ep = exact.value(grid.iface(i));
        let ea = exact.cell_average(grid, i);
        for c in 0..ifaces.components() {
            err_point += (ifaces.at(c, i) - ep[c]).abs();
            err_avg += (avgs.at(c, i) - ea[c]).abs();
        }
    }
    (dx * err_point, dx * err_avg)
}

/// `dx * sum_i avg_i`, per component.
pub fn total_conserved(state: &State, grid: &Grid) -> QVec {
    let avgs = state.avgs();
    (0..avgs.components())
        .map(|c| grid.dx() * avgs.comp(c).iter().sum::<f64>())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use smallvec::smallvec;

    fn one(_: f64) -> QVec {
        smallvec![1.0]
    }

    #[test]
    fn constant_datum_every_layout() {
        let g = Grid::unit(7).unwrap();
        for layout in [
            Layout::A,
            Layout::B { xi: vec![-0.3, 0.3] },
            Layout::C { max_moment: 4 },
        ] {
            let s = init_state(&one, 1, &g, &layout).unwrap();
            assert!(s.avgs().raw().iter().all(|&v| (v - 1.0).abs() < 1e-15));
            assert!(s.ifaces().raw().iter().all(|&v| v == 1.0));
            if let State::C(c) = &s {
                for (p, f) in c.moments.iter().enumerate() {
                    let expect = if p % 2 == 0 { 1.0 } else { 0.0 };
                    assert!(f.raw().iter().all(|&v| (v - expect).abs() < 1e-14), "p={p}");
                }
            }
        }
    }

    #[test]
    fn gaussian_interface_sample() {
        let g = Grid::unit(2).unwrap();
        let datum = |x: f64| -> QVec { smallvec![0.8 + (-(x - 0.5).powi(2) / 0.05f64.powi(2)).exp()] };
        let s = init_state(&datum, 1, &g, &Layout::A).unwrap();
        assert!((s.ifaces().at(0, 0) - 1.8).abs() < 1e-15);
    }

    #[test]
    fn moments_of_linear_datum() {
        let g = Grid::new(1, -0.5, 0.5).unwrap();
        let s = init_state(&|x| smallvec![x], 1, &g, &Layout::C { max_moment: 2 }).unwrap();
        let State::C(c) = s else { unreachable!() };
        let got: Vec<f64> = c.moments.iter().map(|f| f.at(0, 0)).collect();
        assert!(got[0].abs() < 1e-15);
        assert!((got[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!(got[2].abs() < 1e-15);
    }

    #[test]
    fn polynomial_initialization_is_exact() {
        // degree-5 datum: moments up to p = 6 still within GL6 exactness
        let g = Grid::new(5, -1.0, 1.5).unwrap();
        let poly = |x: f64| 0.3 - x + 2.0 * x.powi(3) - 0.7 * x.powi(5);
        let s = init_state(&|x| smallvec![poly(x)], 1, &g, &Layout::C { max_moment: 6 }).unwrap();
        let State::C(c) = s else { unreachable!() };
        let dx = g.dx();
        for i in 0..5 {
            let xc = g.center(i);
            for p in 0..=6usize {
                // analytic: A_p * int_{-dx/2}^{dx/2} x^p poly(xc + x) dx via expansion
                let coeffs = [0.3, -1.0, 0.0, 2.0, 0.0, -0.7];
                let mut exact = 0.0;
                for (d, &a) in coeffs.iter().enumerate() {
                    // (xc + x)^d = sum binom(d, r) xc^(d-r) x^r
                    for r in 0..=d {
                        let binom = (0..r).fold(1.0, |acc, t| acc * (d - t) as f64 / (t + 1) as f64);
                        let e = p + r;
                        let integral = if e % 2 == 1 {
                            0.0
                        } else {
                            2.0 * (dx / 2.0).powi(e as i32 + 1) / (e as f64 + 1.0)
                        };
                        exact += a * binom * xc.powi((d - r) as i32) * integral;
                    }
                }
                exact *= moment_normalization(p, dx);
                let got = c.moments[p].at(0, i);
                assert!(
                    (got - exact).abs() <= 1e-13 * exact.abs().max(1.0),
                    "cell {i} p {p}: {got} vs {exact}"
                );
            }
        }
    }

    struct Zero;
    impl ExactSolution for Zero {
        fn value(&self, _: f64) -> QVec {
            smallvec![0.0]
        }
        fn cell_average(&self, _: &Grid, _: usize) -> QVec {
            smallvec![0.0]
        }
    }

    #[test]
    fn l1_definition() {
        let g = Grid::unit(1).unwrap();
        let s = State::A(StateA {
            avgs: Field::scalar(vec![0.5]),
            ifaces: Field::scalar(vec![-0.25]),
        });
        assert_eq!(l1_errors(&s, &Zero, &g), (0.25, 0.5));
    }

    #[test]
    fn conserved_totals() {
        let g = Grid::unit(10).unwrap();
        let s = State::A(StateA {
            avgs: Field::scalar(vec![1.0; 10]),
            ifaces: Field::scalar(vec![0.0; 10]),
        });
        assert!((total_conserved(&s, &g)[0] - 1.0).abs() < 1e-15);
        let g = Grid::new(2, 0.0, 1.0).unwrap();
        let s = State::A(StateA {
            avgs: Field::scalar(vec![1.0, 3.0]),
            ifaces: Field::scalar(vec![0.0; 2]),
        });
        assert_eq!(total_conserved(&s, &g)[0], 2.0);
    }

    #[test]
    fn xi_validation() {
        assert!(validate_xi(&[-0.4, 0.4]).is_ok());
        assert!(validate_xi(&[0.4, -0.4]).is_err());
        assert!(validate_xi(&[-0.5, 0.4]).is_err());
    }
}
