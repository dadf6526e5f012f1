//! Monotonicity-driven order reduction for the point-value derivatives.

use crate::reconstruction::{
    is_monotone_data, limited_parabola_or_power, monotone_on_samples, moment_poly, parabolic,
    ReconChoice,
};
use crate::stencils::{FdTableau, Slot};
use crate::Result;

/// Power-law exponents of the fallback slopes are clamped to this range.
pub const EXPONENT_RANGE: (f64, f64) = (1.0 / 50.0, 50.0);

/// Interior samples used to judge monotonicity of moment reconstructions.
pub const MOMENT_SAMPLES: usize = 5;

/// Direction of a finite difference: `Right` differences serve positive
/// speeds (the unflipped tableau), `Left` the flipped one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Right,
    Left,
}

fn is_monotone_sequence(values: impl Iterator<Item = f64>) -> bool {
    let mut up = true;
    let mut down = true;
    let mut prev: Option<f64> = None;
    for v in values {
        if let Some(p) = prev {
            up &= v >= p;
            down &= v <= p;
        }
        prev = Some(v);
    }
    up || down
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Descends `chain` (highest order first, all oriented for `dir`) until a
/// difference is accepted. `value` returns the datum in a slot relative to
/// interface `i+1/2`.
pub fn fd_limit_cascade(chain: &[FdTableau], dx: f64, dir: Direction, value: impl Fn(Slot) -> f64) -> f64 {
    let reference = match dir {
        Direction::Right => value(Slot::Point(0)) - value(Slot::Avg(0)),
        Direction::Left => value(Slot::Avg(1)) - value(Slot::Point(0)),
    };
    let mut last = None;
    for t in chain {
        let d = t.apply(dx, &value);
        if !is_monotone_sequence(t.window().map(&value)) || sign(d) == sign(reference) {
            return d;
        }
        last = Some(d);
    }
    let fd3 = last.unwrap_or(0.0);
    // cell whose power law is differentiated: i for Right, i+1 for Left
    let (q_l, avg, q_r) = match dir {
        Direction::Right => (value(Slot::Point(-1)), value(Slot::Avg(0)), value(Slot::Point(0))),
        Direction::Left => (value(Slot::Point(0)), value(Slot::Avg(1)), value(Slot::Point(1))),
    };
    power_law_slope(q_l, avg, q_r, dx, dir).unwrap_or(fd3)
}

/// Slope of the power law through `(q_l, avg, q_r)` at the right (`Right`)
/// or left (`Left`) end of the cell, taking the form that does not vanish
/// there. The exponent is clamped to [`EXPONENT_RANGE`], since the
/// low-order difference it replaces has the wrong sign. `None` when no
/// monotone power law fits the data.
pub fn power_law_slope(q_l: f64, avg: f64, q_r: f64, dx: f64, end: Direction) -> Option<f64> {
    let exponent = match end {
        Direction::Right => (q_r - avg) / (avg - q_l),
        Direction::Left => (avg - q_l) / (q_r - avg),
    };
    (exponent.is_finite() && exponent >= 0.0)
        .then(|| (q_r - q_l) * exponent.clamp(EXPONENT_RANGE.0, EXPONENT_RANGE.1) / dx)
}

/// Limited reconstruction of one cell together with the derivatives used
/// for the neighbouring point updates.
#[derive(Debug, Clone)]
pub struct LimitedCell {
    pub recon: ReconChoice,
    pub left: f64,
    pub right: f64,
}

/// Moments are dropped from the top while the polynomial is non-monotone.
/// Once only the parabola is left, each end slope is kept if it follows the
/// data and replaced by [`power_law_slope`] otherwise, as for variant A.
pub fn limited_moment_cell(q_l: f64, moments: &[f64], q_r: f64, dx: f64) -> Result<LimitedCell> {
    let half = dx / 2.0;
    let k1 = moments.len();
    for used in (2..=k1).rev() {
        let poly = moment_poly(q_l, q_r, &moments[..used], dx)?;
        if monotone_on_samples(&poly, MOMENT_SAMPLES) {
            let (left, right) = (poly.derivative(-half), poly.derivative(half));
            let recon = if used == k1 {
                ReconChoice::PolyHigh(poly)
            } else {
                ReconChoice::PolyReduced { level: k1 - used, poly }
            };
            return Ok(LimitedCell { recon, left, right });
        }
    }
    let avg = moments[0];
    let parabola = parabolic(q_l, avg, q_r, dx);
    let (mut left, mut right) = (parabola.derivative(-half), parabola.derivative(half));
    if is_monotone_data(q_l, avg, q_r) {
        if sign(right) != sign(q_r - avg) {
            right = power_law_slope(q_l, avg, q_r, dx, Direction::Right).unwrap_or(right);
        }
        if sign(left) != sign(avg - q_l) {
            left = power_law_slope(q_l, avg, q_r, dx, Direction::Left).unwrap_or(left);
        }
    }
    Ok(LimitedCell {
        recon: limited_parabola_or_power(q_l, avg, q_r, dx),
        left,
        right,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stencils::{fd_flip, fd_tableau};

    fn chain(names: &[&str]) -> Vec<FdTableau> {
        names.iter().map(|n| fd_tableau(n, None).unwrap()).collect()
    }

    #[test]
    fn non_monotone_window_accepts_top_order() {
        let c = chain(&["FD6b", "FD5b", "FD4b", "FD3"]);
        let data = |s: Slot| match s.half_position() {
            h if h % 3 == 0 => 1.0,
            _ => 0.0,
        };
        assert_eq!(fd_limit_cascade(&c, 1.0, Direction::Right, data), c[0].apply(1.0, data));
    }

    #[test]
    fn correct_sign_accepts_top_order() {
        let c = chain(&["FD6b", "FD3"]);
        let data = |s: Slot| s.half_position() as f64 * 0.5;
        let d = fd_limit_cascade(&c, 1.0, Direction::Right, data);
        assert!((d - 1.0).abs() < 1e-13);
    }

    #[test]
    fn power_law_fallback_for_wrong_sign_fd3() {
        // increasing data with the average close to the right value
        let c = chain(&["FD3"]);
        let data = |s: Slot| match s {
            Slot::Point(-1) => 0.0,
            Slot::Avg(0) => 0.9,
            Slot::Point(0) => 1.0,
            _ => 1.0,
        };
        // FD3 = 0 - 5.4 + 4 = -1.4 < 0 while q_{1/2} - avg > 0
        let d = fd_limit_cascade(&c, 1.0, Direction::Right, data);
        // D1 = (1 - 0) * (0.1 / 0.9)
        assert!((d - 0.1 / 0.9).abs() < 1e-15);
    }

    #[test]
    fn small_exponent_is_clamped() {
        let c = chain(&["FD3"]);
        let data = |s: Slot| match s {
            Slot::Point(-1) => 0.0,
            Slot::Avg(0) => 1.0,
            _ => 1.0,
        };
        // FD3 = -6 + 4 = -2 against a flat right end
        let d = fd_limit_cascade(&c, 1.0, Direction::Right, data);
        assert!((d - 1.0 / 50.0).abs() < 1e-15);
    }

    #[test]
    fn flipped_direction_mirrors() {
        let c: Vec<FdTableau> = chain(&["FD3"]).iter().map(fd_flip).collect();
        // mirror image of the power-law case: cell i+1 data decreasing left to right
        let data = |s: Slot| match s {
            Slot::Point(0) => 1.0,
            Slot::Avg(1) => 0.9,
            Slot::Point(1) => 0.0,
            _ => 1.0,
        };
        let d = fd_limit_cascade(&c, 1.0, Direction::Left, data);
        // s = (0.9 - 1)/(0 - 0.9), D1* = (0 - 1) * s
        assert!((d + 0.1 / 0.9).abs() < 1e-15);
    }

    #[test]
    fn smooth_moments_unlimited() {
        // q = x on [-1/2, 1/2]: moments (0, 1/3, 0)
        let cell = limited_moment_cell(-0.5, &[0.0, 1.0 / 3.0, 0.0], 0.5, 1.0).unwrap();
        assert!((cell.left - 1.0).abs() < 1e-12 && (cell.right - 1.0).abs() < 1e-12);
        assert!(matches!(cell.recon, ReconChoice::PolyHigh(_)));
    }

    #[test]
    fn monotone_power_law_limiting() {
        // steep rise at the right end: average close to the left value
        let cell = limited_moment_cell(0.0, &[0.1, 0.0, 0.0], 1.0, 1.0).unwrap();
        // the parabola slope 6 * 0.1 - 2 = -1.4 at the left end is replaced
        assert!((cell.left - 0.1 / 0.9).abs() < 1e-12);
        // 4 - 0.6 at the right end follows the data
        assert!((cell.right - 3.4).abs() < 1e-12);
        assert!(cell.recon.is_power_law());
    }

    #[test]
    fn parabola_stage_matches_fd3_cascade() {
        let fd3 = chain(&["FD3"]);
        let fd3_star: Vec<FdTableau> = fd3.iter().map(fd_flip).collect();
        for (q_l, avg, q_r) in [(0.0, 0.9, 1.0), (-1.0, 2.0, 2.0), (1.0, 0.3, 0.0), (0.0, 0.5, 1.0), (0.0, 1.2, 1.0)] {
            let cell = limited_moment_cell(q_l, &[avg], q_r, 1.0).unwrap();
            // the cell as seen from its right interface, then from its left one
            let right = |s: Slot| match s {
                Slot::Point(-1) => q_l,
                Slot::Avg(0) => avg,
                _ => q_r,
            };
            let left = |s: Slot| match s {
                Slot::Point(0) => q_l,
                Slot::Avg(1) => avg,
                _ => q_r,
            };
            assert_eq!(cell.right, fd_limit_cascade(&fd3, 1.0, Direction::Right, right));
            assert_eq!(cell.left, fd_limit_cascade(&fd3_star, 1.0, Direction::Left, left));
        }
    }
}
