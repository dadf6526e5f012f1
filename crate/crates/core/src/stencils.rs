//! Derivative stencils on mixed average/point-value data.
//!
//! An [`FdTableau`] approximates `q'(x_{i+1/2})` from averages of cells near
//! `i` and interface values near `i+1/2`. An [`MdTableau`] approximates the
//! derivative at an interface of a single cell from its two interface values
//! and its moments.

use std::fmt;

use crate::error::{Error, Result};
use crate::reconstruction::moment_poly;
use crate::state::StateA;
use crate::models::QVec;

/// Position of one stencil entry relative to the anchor interface `i+1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    /// Average of cell `i + j`.
    Avg(i32),
    /// Value at interface `i + j + 1/2`.
    Point(i32),
}

impl Slot {
    /// Position in half cells, measured from the center of cell `i`.
    pub fn half_position(self) -> i32 {
        match self {
            Slot::Avg(j) => 2 * j,
            Slot::Point(j) => 2 * j + 1,
        }
    }

    pub fn from_half_position(h: i32) -> Self {
        if h.rem_euclid(2) == 0 {
            Slot::Avg(h.div_euclid(2))
        } else {
            Slot::Point((h - 1).div_euclid(2))
        }
    }

    /// Mirror image about the anchor interface.
    pub fn mirrored(self) -> Self {
        match self {
            Slot::Avg(j) => Slot::Avg(1 - j),
            Slot::Point(j) => Slot::Point(-j),
        }
    }
}

/// Coefficient `(c0 + c1 * a) / den` of the free parameter `a`.
#[derive(Debug, Clone, Copy)]
struct Affine {
    c0: f64,
    c1: f64,
    den: f64,
}

const fn af(c0: f64, c1: f64, den: f64) -> Affine {
    Affine { c0, c1, den }
}

impl Affine {
    fn eval(self, a: f64) -> f64 {
        (self.c0 + self.c1 * a) / self.den
    }
}

use Slot::{Avg, Point};

struct TableEntry {
    name: &'static str,
    order: usize,
    default_param: Option<f64>,
    coeffs: &'static [(Slot, Affine)],
}

static TABLE: &[TableEntry] = &[
    TableEntry {
        name: "FD2",
        order: 2,
        default_param: Some(1.5),
        coeffs: &[
            (Point(-1), af(-2.0, 1.0, 1.0)),
            (Avg(0), af(2.0, -2.0, 1.0)),
            (Point(0), af(0.0, 1.0, 1.0)),
        ],
    },
    TableEntry {
        name: "FD3",
        order: 3,
        default_param: None,
        coeffs: &[
            (Point(-1), af(2.0, 0.0, 1.0)),
            (Avg(0), af(-6.0, 0.0, 1.0)),
            (Point(0), af(4.0, 0.0, 1.0)),
        ],
    },
    TableEntry {
        name: "FD3A",
        order: 3,
        default_param: None,
        coeffs: &[
            (Point(-1), af(5.0, 0.0, 6.0)),
            (Avg(0), af(-3.0, 0.0, 1.0)),
            (Point(0), af(4.0, 0.0, 3.0)),
            (Avg(1), af(1.0, 0.0, 1.0)),
            (Point(1), af(-1.0, 0.0, 6.0)),
        ],
    },
    TableEntry {
        name: "FD4a",
        order: 4,
        default_param: Some(1.7723),
        coeffs: &[
            (Point(-1), af(2.0, 1.0, 4.0)),
            (Avg(0), af(-8.0, -3.0, 4.0)),
            (Point(0), af(0.0, 1.0, 1.0)),
            (Avg(1), af(8.0, -3.0, 4.0)),
            (Point(1), af(-2.0, 1.0, 4.0)),
        ],
    },
    TableEntry {
        name: "FD4b",
        order: 4,
        default_param: Some(1.0),
        coeffs: &[
            (Avg(-1), af(2.0, -1.0, 6.0)),
            (Point(-1), af(-1.0, 1.0, 1.0)),
            (Avg(0), af(-1.0, -10.0, 6.0)),
            (Point(0), af(0.0, 1.0, 1.0)),
            (Avg(1), af(5.0, -1.0, 6.0)),
        ],
    },
    TableEntry {
        name: "FD4c",
        order: 4,
        default_param: Some(3.5),
        coeffs: &[
            (Point(-2), af(-5.0, 1.0, 1.0)),
            (Avg(-1), af(29.0, -6.0, 2.0)),
            (Point(-1), af(-16.0, 4.0, 1.0)),
            (Avg(0), af(13.0, -6.0, 2.0)),
            (Point(0), af(0.0, 1.0, 1.0)),
        ],
    },
    TableEntry {
        name: "FD5a",
        order: 5,
        default_param: Some(1.6),
        coeffs: &[
            (Avg(-1), af(0.0, -1.0, 18.0)),
            (Point(-1), af(1.0, 1.0, 2.0)),
            (Avg(0), af(-36.0, -19.0, 18.0)),
            (Point(0), af(0.0, 1.0, 1.0)),
            (Avg(1), af(18.0, -5.0, 9.0)),
            (Point(1), af(-3.0, 1.0, 6.0)),
        ],
    },
    TableEntry {
        name: "FD5b",
        order: 5,
        default_param: Some(1.5),
        coeffs: &[
            (Point(-2), af(-3.0, 1.0, 3.0)),
            (Avg(-1), af(57.0, -20.0, 18.0)),
            (Point(-1), af(-4.0, 2.0, 1.0)),
            (Avg(0), af(21.0, -38.0, 18.0)),
            (Point(0), af(0.0, 1.0, 1.0)),
            (Avg(1), af(6.0, -1.0, 9.0)),
        ],
    },
    TableEntry {
        name: "FD6a",
        order: 6,
        default_param: Some(1.88),
        coeffs: &[
            (Avg(-1), af(-1.0, -1.0, 36.0)),
            (Point(-1), af(2.0, 1.0, 3.0)),
            (Avg(0), af(-81.0, -29.0, 36.0)),
            (Point(0), af(0.0, 1.0, 1.0)),
            (Avg(1), af(81.0, -29.0, 36.0)),
            (Point(1), af(-2.0, 1.0, 3.0)),
            (Avg(2), af(1.0, -1.0, 36.0)),
        ],
    },
    TableEntry {
        name: "FD6b",
        order: 6,
        default_param: Some(0.25),
        coeffs: &[
            (Point(-2), af(-1.0, 1.0, 9.0)),
            (Avg(-1), af(19.0, -22.0, 54.0)),
            (Point(-1), af(0.0, 1.0, 1.0)),
            (Avg(0), af(-89.0, -76.0, 54.0)),
            (Point(0), af(0.0, 1.0, 1.0)),
            (Avg(1), af(50.0, -11.0, 27.0)),
            (Point(1), af(-4.0, 1.0, 9.0)),
        ],
    },
    TableEntry {
        name: "FD6c",
        order: 6,
        default_param: Some(2.3),
        coeffs: &[
            (Avg(-2), af(4.0, -1.0, 12.0)),
            (Point(-2), af(-11.0, 3.0, 3.0)),
            (Avg(-1), af(302.0, -87.0, 36.0)),
            (Point(-1), af(-8.0, 3.0, 1.0)),
            (Avg(0), af(86.0, -87.0, 36.0)),
            (Point(0), af(0.0, 1.0, 1.0)),
            (Avg(1), af(20.0, -3.0, 36.0)),
        ],
    },
    TableEntry {
        name: "FD7",
        order: 7,
        default_param: Some(0.68),
        coeffs: &[
            (Avg(-2), af(2.0, -1.0, 48.0)),
            (Point(-2), af(-5.0, 3.0, 9.0)),
            (Avg(-1), af(586.0, -393.0, 432.0)),
            (Point(-1), af(-2.0, 3.0, 2.0)),
            (Avg(0), af(-494.0, -717.0, 432.0)),
            (Point(0), af(0.0, 1.0, 1.0)),
            (Avg(1), af(730.0, -141.0, 432.0)),
            (Point(1), af(-14.0, 3.0, 36.0)),
        ],
    },
    TableEntry {
        name: "FD8a",
        order: 8,
        default_param: Some(4.0 / 3.0),
        coeffs: &[
            (Point(-3), af(-8.0, 3.0, 48.0)),
            (Avg(-2), af(196.0, -75.0, 288.0)),
            (Point(-2), af(-7.0, 3.0, 3.0)),
            (Avg(-1), af(1172.0, -555.0, 288.0)),
            (Point(-1), af(-12.0, 9.0, 4.0)),
            (Avg(0), af(-124.0, -555.0, 288.0)),
            (Point(0), af(0.0, 1.0, 1.0)),
            (Avg(1), af(436.0, -75.0, 288.0)),
            (Point(1), af(-16.0, 3.0, 48.0)),
        ],
    },
    TableEntry {
        name: "FD8c",
        order: 8,
        default_param: Some(1.9),
        coeffs: &[
            (Point(-2), af(1.0, 1.0, 36.0)),
            (Avg(-1), af(-28.0, -25.0, 216.0)),
            (Point(-1), af(8.0, 4.0, 9.0)),
            (Avg(0), af(-540.0, -185.0, 216.0)),
            (Point(0), af(0.0, 1.0, 1.0)),
            (Avg(1), af(540.0, -185.0, 216.0)),
            (Point(1), af(-8.0, 4.0, 9.0)),
            (Avg(2), af(28.0, -25.0, 216.0)),
            (Point(2), af(-1.0, 1.0, 36.0)),
        ],
    },
];

/// Names of every tabulated finite difference.
pub fn fd_names() -> Vec<&'static str> {
    TABLE.iter().map(|e| e.name).collect()
}

fn lookup(name: &str) -> Result<&'static TableEntry> {
    TABLE
        .iter()
        .find(|e| e.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::UnknownTableau(name.to_string()))
}

/// Parameter used when none is given: the stability-optimal value.
pub fn default_param(name: &str) -> Result<Option<f64>> {
    Ok(lookup(name)?.default_param)
}

/// A finite difference for `q'(x_{i+1/2})` on averages and interface values.
#[derive(Debug, Clone, PartialEq)]
pub struct FdTableau {
    name: &'static str,
    param: Option<f64>,
    order: usize,
    flipped: bool,
    terms: Vec<(Slot, f64)>,
}

/// Builds a named tableau. Parametrized formulas fall back to their default
/// parameter when `param` is `None`.
pub fn fd_tableau(name: &str, param: Option<f64>) -> Result<FdTableau> {
    let entry = lookup(name)?;
    let a = match (entry.default_param, param) {
        (None, Some(_)) => return Err(Error::UnexpectedParameter(entry.name.to_string())),
        (None, None) => None,
        (Some(d), p) => Some(p.unwrap_or(d)),
    };
    if let Some(a) = a {
        if !a.is_finite() {
            return Err(Error::InvalidConfig(format!("non-finite parameter {a}")));
        }
    }
    let mut terms: Vec<(Slot, f64)> = entry
        .coeffs
        .iter()
        .map(|&(s, c)| (s, c.eval(a.unwrap_or(0.0))))
        .collect();
    terms.sort_by_key(|(s, _)| s.half_position());
    // FD2 gains an order at a = 4, where it coincides with FD3
    let order = if entry.name == "FD2" && a == Some(4.0) { 3 } else { entry.order };
    Ok(FdTableau {
        name: entry.name,
        param: a,
        order,
        flipped: false,
        terms,
    })
}

/// Mirror image of `t`, approximating the same derivative from the other side.
pub fn fd_flip(t: &FdTableau) -> FdTableau {
    let mut terms: Vec<(Slot, f64)> = t.terms.iter().map(|&(s, b)| (s.mirrored(), -b)).collect();
    terms.sort_by_key(|(s, _)| s.half_position());
    FdTableau {
        terms,
        flipped: !t.flipped,
        ..t.clone()
    }
}

impl FdTableau {
    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn param(&self) -> Option<f64> {
        self.param
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_flipped(&self) -> bool {
        self.flipped
    }

    /// Terms sorted left to right.
    pub fn terms(&self) -> &[(Slot, f64)] {
        &self.terms
    }

    pub fn coeff(&self, slot: Slot) -> f64 {
        self.terms
            .iter()
            .find(|(s, _)| *s == slot)
            .map_or(0.0, |&(_, b)| b)
    }

    /// Leftmost and rightmost half-cell positions touched.
    pub fn span(&self) -> (i32, i32) {
        let first = self.terms.first().map_or(0, |(s, _)| s.half_position());
        let last = self.terms.last().map_or(0, |(s, _)| s.half_position());
        (first, last)
    }

    /// Every slot between the extreme ones, alternating averages and points.
    pub fn window(&self) -> impl Iterator<Item = Slot> {
        let (lo, hi) = self.span();
        (lo..=hi).map(Slot::from_half_position)
    }

    /// `(1/dx) * sum b * value(slot)`.
    #[inline]
    pub fn apply(&self, dx: f64, mut value: impl FnMut(Slot) -> f64) -> f64 {
        self.terms.iter().map(|&(s, b)| b * value(s)).sum::<f64>() / dx
    }
}

impl fmt::Display for FdTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        if let Some(a) = self.param {
            write!(f, "(a={a})")?;
        }
        if self.flipped {
            write!(f, "*")?;
        }
        Ok(())
    }
}

/// Applies `t` at interface `iface + 1/2` of a variant A state, per component.
pub fn fd_apply(t: &FdTableau, state: &StateA, dx: f64, iface: usize) -> QVec {
    let n = state.avgs.len() as i64;
    let idx = |j: i32| (iface as i64 + j as i64).rem_euclid(n) as usize;
    (0..state.avgs.components())
        .map(|c| {
            t.apply(dx, |s| match s {
                Slot::Avg(j) => state.avgs.at(c, idx(j)),
                Slot::Point(j) => state.ifaces.at(c, idx(j)),
            })
        })
        .collect()
}

/// Largest `d` such that `t` differentiates `1, x, ..., x^d` exactly
/// (absolute tolerance 1e-10 relative to the term magnitudes, `dx = 1`).
pub fn verify_order_fd(t: &FdTableau) -> Option<usize> {
    let mut best = None;
    for d in 0..=12u32 {
        let value = |s: Slot| match s {
            Slot::Avg(j) => {
                let (l, r) = (j as f64 - 0.5, j as f64 + 0.5);
                (r.powi(d as i32 + 1) - l.powi(d as i32 + 1)) / (d as f64 + 1.0)
            }
            Slot::Point(j) => (j as f64 + 0.5).powi(d as i32),
        };
        let got = t.apply(1.0, value);
        let scale: f64 = t.terms.iter().map(|&(s, b)| (b * value(s)).abs()).sum::<f64>().max(1.0);
        let exact = if d == 0 { 0.0 } else { d as f64 * 0.5f64.powi(d as i32 - 1) };
        if (got - exact).abs() <= 1e-10 * scale {
            best = Some(d as usize);
        } else {
            break;
        }
    }
    best
}

/// Which end of the cell an [`MdTableau`] differentiates at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A moment difference for one cell: interface coefficients `b_{-1/2}`,
/// `b_{+1/2}` and moment coefficients `b^(p)`, `p = 0..=N-3`.
#[derive(Debug, Clone, PartialEq)]
pub struct MdTableau {
    pub left: f64,
    pub right: f64,
    pub moments: Vec<f64>,
    pub order: usize,
    pub side: Side,
}

/// The unique moment difference of order 3, 5 or 7 at the right interface.
pub fn md_tableau(order: usize) -> Result<MdTableau> {
    let (left, moments, right) = match order {
        3 => (2.0, vec![-6.0], 4.0),
        5 => (4.0, vec![15.0, -15.0, -35.0], 16.0),
        7 => (
            6.0,
            vec![-105.0 / 4.0, 105.0 / 2.0, 315.0 / 2.0, -315.0 / 4.0, -693.0 / 4.0],
            36.0,
        ),
        _ => return Err(Error::UnsupportedOrder(order)),
    };
    Ok(MdTableau {
        left,
        right,
        moments,
        order,
        side: Side::Right,
    })
}

/// Mirror image: the derivative at the opposite interface of the cell.
pub fn md_flip(t: &MdTableau) -> MdTableau {
    MdTableau {
        left: -t.right,
        right: -t.left,
        moments: t
            .moments
            .iter()
            .enumerate()
            .map(|(p, &b)| if p % 2 == 0 { -b } else { b })
            .collect(),
        order: t.order,
        side: match t.side {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        },
    }
}

impl MdTableau {
    /// `(1/dx) * (b_l q_l + sum b^(p) q^(p) + b_r q_r)`.
    #[inline]
    pub fn apply(&self, dx: f64, q_l: f64, moments: &[f64], q_r: f64) -> f64 {
        let inner: f64 = self.moments.iter().zip(moments).map(|(b, m)| b * m).sum();
        (self.left * q_l + inner + self.right * q_r) / dx
    }

    /// Number of moments used (`order - 2`).
    pub fn n_moments(&self) -> usize {
        self.moments.len()
    }
}

/// Re-derives a moment difference by differentiating the moment-constrained
/// reconstruction at the right end of the cell.
pub fn md_derive(order: usize) -> Result<MdTableau> {
    if order < 3 {
        return Err(Error::UnsupportedOrder(order));
    }
    let k = order - 3;
    let n = k + 3;
    // the derivative is linear in the data; probe with unit vectors
    let mut coeffs = vec![0.0; n];
    for (slot, c) in coeffs.iter_mut().enumerate() {
        let mut data = vec![0.0; n];
        data[slot] = 1.0;
        let poly = moment_poly(data[0], data[n - 1], &data[1..n - 1], 1.0)?;
        *c = poly.derivative(0.5);
    }
    Ok(MdTableau {
        left: coeffs[0],
        right: coeffs[n - 1],
        moments: coeffs[1..n - 1].to_vec(),
        order,
        side: Side::Right,
    })
}

/// Largest `d` such that `t` differentiates `1, x, ..., x^d` exactly on the
/// cell `[-1/2, 1/2]`.
pub fn verify_order_md(t: &MdTableau) -> Option<usize> {
    let mut best = None;
    for d in 0..=12i32 {
        let moments: Vec<f64> = (0..t.moments.len())
            .map(|p| {
                let e = p as i32 + d;
                let integral = if e % 2 == 1 {
                    0.0
                } else {
                    2.0 * 0.5f64.powi(e + 1) / (e as f64 + 1.0)
                };
                (p as f64 + 1.0) * 2f64.powi(p as i32) * integral
            })
            .collect();
        let (q_l, q_r) = ((-0.5f64).powi(d), 0.5f64.powi(d));
        let got = t.apply(1.0, q_l, &moments, q_r);
        let x: f64 = match t.side {
            Side::Right => 0.5,
            Side::Left => -0.5,
        };
        let exact = if d == 0 { 0.0 } else { d as f64 * x.powi(d - 1) };
        if (got - exact).abs() <= 1e-10 {
            best = Some(d as usize);
        } else {
            break;
        }
    }
    best
}

/// Chain of tableaus descended by the limit cascade, highest order first.
pub const CASCADE: [(&str, Option<f64>); 6] = [
    ("FD8a", None),
    ("FD7", None),
    ("FD6b", None),
    ("FD5b", None),
    ("FD4b", None),
    ("FD3", None),
];
