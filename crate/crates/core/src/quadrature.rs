//! Gauss-Legendre rules mapped to `[0, 1]`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

pub const DEFAULT_NODES: usize = 64;
pub const MIN_NODES: usize = 4;

/// A fixed-order Gauss-Legendre rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    nodes: Arc<[(f64, f64)]>,
}

impl QuadratureSpec {
    pub fn new(nodes: usize) -> Result<Self> {
        if nodes < MIN_NODES {
            return Err(Error::param(
                "nodes",
                format!("need at least {MIN_NODES} quadrature nodes, got {nodes}"),
            ));
        }
        Ok(Self {
            nodes: gauss_legendre_unit(nodes).into(),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `(node, weight)` pairs on `[0, 1]`; weights sum to one.
    pub fn points(&self) -> &[(f64, f64)] {
        &self.nodes
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::new(DEFAULT_NODES).expect("default node count is valid")
    }
}

/// Legendre `P_n(x)` and its derivative by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes and weights on `[-1, 1]` by Newton iteration from the Tricomi initial guesses,
/// then mapped affinely to `[0, 1]`.
fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.0); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is the i-th largest root; fill symmetric pairs.
        out[n - 1 - i] = ((1.0 + x) / 2.0, w / 2.0);
        out[i] = ((1.0 - x) / 2.0, w / 2.0);
    }
    out
}
