//! Quadrature rules: Gauss-Legendre for spatial integrals over a cell,
//! Gauss-Lobatto and equidistant (Newton-Cotes) rules for the time-averaged
//! interface flux.

use crate::error::{Error, Result};

/// Gauss-Legendre rule on `[-1/2, 1/2]`, weights summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // map [-1, 1] -> [-1/2, 1/2], weights normalized to unit length
            nodes[i] = -0.5 * x;
            nodes[n - 1 - i] = 0.5 * x;
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Self { nodes, weights }
    }

    /// Mean of `f` over `[-1/2, 1/2]`.
    pub fn mean(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Time quadrature on `[0, 1]` with both endpoints as nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

/// Gauss-Lobatto rule with `m` points on `[0, 1]`; exact to degree `2m - 3`.
pub fn lobatto_rule(m: usize) -> Result<QuadratureRule> {
    let (nodes, weights) = match m {
        3 => (vec![0.0, 0.5, 1.0], vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]),
        4 => {
            let s5 = 5f64.sqrt();
            (
                vec![0.0, (5.0 - s5) / 10.0, (5.0 + s5) / 10.0, 1.0],
                vec![1.0 / 12.0, 5.0 / 12.0, 5.0 / 12.0, 1.0 / 12.0],
            )
        }
        5 => {
            let s = (3.0f64 / 7.0).sqrt();
            (
                vec![0.0, (1.0 - s) / 2.0, 0.5, (1.0 + s) / 2.0, 1.0],
                vec![
                    1.0 / 20.0,
                    49.0 / 180.0,
                    16.0 / 45.0,
                    49.0 / 180.0,
                    1.0 / 20.0,
                ],
            )
        }
        _ => return Err(Error::UnsupportedQuadrature(m)),
    };
    Ok(QuadratureRule { nodes, weights })
}

/// Closed Newton-Cotes rule with `m` equidistant points on `[0, 1]`.
pub fn equidistant_rule(m: usize) -> Result<QuadratureRule> {
    if !(2..=9).contains(&m) {
        return Err(Error::UnsupportedQuadrature(m));
    }
    let nodes: Vec<f64> = (0..m).map(|l| l as f64 / (m - 1) as f64).collect();
    // moment conditions sum_l w_l t_l^d = 1/(d+1), d = 0..m-1
    let vander = nalgebra::DMatrix::from_fn(m, m, |d, l| nodes[l].powi(d as i32));
    let rhs = nalgebra::DVector::from_fn(m, |d, _| 1.0 / (d as f64 + 1.0));
    let w = vander
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularSystem)?;
    Ok(QuadratureRule {
        nodes,
        weights: w.iter().copied().collect(),
    })
}
