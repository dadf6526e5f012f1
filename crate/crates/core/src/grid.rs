use crate::error::{Error, Result};

/// Equidistant periodic grid. Cell `i` covers `[x_min + i dx, x_min + (i+1) dx)`
/// and interface `i + 1/2` sits at its right end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_cells: usize,
    x_min: f64,
    x_max: f64,
}

impl Grid {
    pub fn new(n_cells: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::InvalidConfig("grid needs at least one cell".into()));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "invalid domain [{x_min}, {x_max}]"
            )));
        }
        Ok(Self { n_cells, x_min, x_max })
    }

    pub fn unit(n_cells: usize) -> Result<Self> {
        Self::new(n_cells, 0.0, 1.0)
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.n_cells as f64
    }

    /// Position of interface `i + 1/2`.
    pub fn iface(&self, i: usize) -> f64 {
        self.x_min + (i + 1) as f64 * self.dx()
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx()
    }

    /// Periodic index reduction.
    #[inline]
    pub fn wrap(&self, i: isize) -> usize {
        i.rem_euclid(self.n_cells as isize) as usize
    }

    #[inline]
    pub fn shift(&self, i: usize, by: isize) -> usize {
        self.wrap(i as isize + by)
    }

    /// Maps `x` into `[x_min, x_max)`.
    pub fn periodic(&self, x: f64) -> f64 {
        self.x_min + (x - self.x_min).rem_euclid(self.length())
    }
}
