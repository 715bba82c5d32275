use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::OutputDomain;
use crate::error::{Error, Result};

/// Measure a quadrature rule integrates against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// `dμ(ξ) = (1 - ξ²)^{-1/2} dξ`; nodes are canonical coordinates `ξ`.
    ChebyshevMu,
    /// Lebesgue `dy`; nodes are physical coordinates `y`.
    LebesgueY,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub measure: Measure,
}

impl QuadratureRule {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>, measure: Measure) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: nodes.len(),
                actual: weights.len(),
            });
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::Validation("quadrature weights must be positive".into()));
        }
        if measure == Measure::ChebyshevMu && nodes.iter().any(|x| x.abs() >= 1.0) {
            return Err(Error::Validation(
                "Chebyshev-measure nodes must lie strictly inside (-1, 1)".into(),
            ));
        }
        Ok(Self {
            nodes,
            weights,
            measure,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .sum()
    }

    /// Canonical coordinate of every node.
    pub fn canonical_nodes(&self, domain: &OutputDomain) -> Vec<f64> {
        match self.measure {
            Measure::ChebyshevMu => self.nodes.clone(),
            Measure::LebesgueY => self
                .nodes
                .iter()
                .map(|&y| domain.to_canonical_unchecked(y))
                .collect(),
        }
    }

    /// Physical coordinate of every node.
    pub fn physical_nodes(&self, domain: &OutputDomain) -> Vec<f64> {
        match self.measure {
            Measure::ChebyshevMu => self
                .nodes
                .iter()
                .map(|&xi| domain.from_canonical(xi))
                .collect(),
            Measure::LebesgueY => self.nodes.clone(),
        }
    }
}

/// Default Gauss–Chebyshev node count for an order-`K` basis.
pub fn default_mu_nodes(order: usize) -> usize {
    (2 * order + 2).max(129)
}

/// Default node count for uniform `y` grids.
pub const DEFAULT_Y_NODES: usize = 401;

/// Gauss–Chebyshev (first kind) rule for `dμ`, nodes in ascending order.
///
/// Exact for polynomial integrands of degree `≤ 2N - 1`.
pub fn gauss_chebyshev_rule(n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::Validation("Gauss–Chebyshev rule needs N ≥ 1".into()));
    }
    let nf = n as f64;
    let nodes = (1..=n)
        .map(|i| {
            // cos((2i - 1)π / 2N), enumerated from the left end
            let theta = (2 * (n - i) + 1) as f64 * PI / (2.0 * nf);
            let xi = theta.cos();
            if xi.abs() < 1e-15 {
                0.0
            } else {
                xi
            }
        })
        .collect();
    QuadratureRule::new(nodes, vec![PI / nf; n], Measure::ChebyshevMu)
}

/// Trapezoid rule on `N` equally spaced nodes covering `[a, b]`.
pub fn uniform_y_rule(n: usize, domain: &OutputDomain) -> Result<QuadratureRule> {
    if n < 2 {
        return Err(Error::Validation("uniform rule needs N ≥ 2".into()));
    }
    let h = domain.length() / (n - 1) as f64;
    let nodes = (0..n).map(|i| domain.lower() + i as f64 * h).collect();
    let mut weights = vec![h; n];
    weights[0] = 0.5 * h;
    weights[n - 1] = 0.5 * h;
    QuadratureRule::new(nodes, weights, Measure::LebesgueY)
}

/// Trapezoid rule on `N` equally spaced nodes inset by `(b - a) / 2N` from
/// both ends, for integrands carrying the endpoint-singular weight `w(ξ)`.
pub fn interior_y_rule(n: usize, domain: &OutputDomain) -> Result<QuadratureRule> {
    if n < 2 {
        return Err(Error::Validation("interior rule needs N ≥ 2".into()));
    }
    let h = domain.length() / n as f64;
    let nodes = (0..n)
        .map(|i| domain.lower() + (i as f64 + 0.5) * h)
        .collect();
    let mut weights = vec![h; n];
    weights[0] = 0.5 * h;
    weights[n - 1] = 0.5 * h;
    QuadratureRule::new(nodes, weights, Measure::LebesgueY)
}

/// Gauss–Legendre rule on `[a, b]` for `dy`; exact for polynomials of
/// degree `≤ 2N - 1`. Nodes by Newton iteration on `P_N`.
pub fn gauss_legendre_y_rule(n: usize, domain: &OutputDomain) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::Validation("Gauss–Legendre rule needs N ≥ 1".into()));
    }
    let (xs, ws) = gauss_legendre_unit(n);
    let half = 0.5 * domain.length();
    let nodes = xs.iter().map(|&x| domain.midpoint() + half * x).collect();
    let weights = ws.iter().map(|&w| half * w).collect();
    QuadratureRule::new(nodes, weights, Measure::LebesgueY)
}

/// Nodes (ascending) and weights of the `N`-point Gauss–Legendre rule on `[-1, 1]`.
pub(crate) fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // i-th root from the right; mirror onto the left half
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
