//! Operator matrices realizing integrals of the basis as quadratic forms.
//!
//! Every symmetric matrix is assembled on its upper triangle and mirrored, so
//! `A == Aᵀ` holds bit-for-bit.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::chebyshev::{basis_derivatives_into, basis_values_into, kappa};
use super::quadrature::{
    default_mu_nodes, gauss_chebyshev_rule, gauss_legendre_y_rule, Measure, QuadratureRule,
};
use super::BasisSpec;
use crate::error::{Error, Result};

/// Nodes per basis function for the dense Lebesgue rule.
pub const DENSE_NODES_PER_MODE: usize = 40;

/// Shaping function `V(y) ≥ 0` for the potential-energy regularizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Potential {
    Zero,
    Constant { value: f64 },
    /// `V(y) = strength · (y - center)²`
    Harmonic { center: f64, strength: f64 },
}

impl Default for Potential {
    fn default() -> Self {
        Potential::Harmonic {
            center: 0.0,
            strength: 1.0,
        }
    }
}

impl Potential {
    pub fn eval(&self, y: f64) -> f64 {
        match *self {
            Potential::Zero => 0.0,
            Potential::Constant { value } => value,
            Potential::Harmonic { center, strength } => strength * (y - center).powi(2),
        }
    }
}

fn symmetric_from_rows<F>(n: usize, mut entry: F) -> Array2<f64>
where
    F: FnMut(usize, usize) -> f64,
{
    let mut m = Array2::zeros((n, n));
    for j in 0..n {
        for k in j..n {
            let v = entry(j, k);
            m[[j, k]] = v;
            m[[k, j]] = v;
        }
    }
    m
}

/// Accumulates `∑_i weight_i · u_i u_iᵀ` where `u_i` is produced per node.
fn weighted_outer_sum(
    size: usize,
    nodes: impl Iterator<Item = (f64, f64)>,
    fill: impl Fn(f64, &mut [f64]),
) -> Array2<f64> {
    let mut acc = Array2::<f64>::zeros((size, size));
    let mut u = vec![0.0; size];
    for (x, w) in nodes {
        if w == 0.0 {
            continue;
        }
        fill(x, &mut u);
        for j in 0..size {
            let uj = w * u[j];
            for k in j..size {
                acc[[j, k]] += uj * u[k];
            }
        }
    }
    symmetric_from_rows(size, |j, k| acc[[j, k]])
}

fn dense_rule(spec: &BasisSpec) -> Result<QuadratureRule> {
    gauss_legendre_y_rule(DENSE_NODES_PER_MODE * spec.size(), &spec.domain)
}

/// `G_jk = ∑_i φ_j(ξ_i) φ_k(ξ_i) w_i` under the rule's measure.
pub fn gram_matrix(spec: &BasisSpec, rule: &QuadratureRule) -> Array2<f64> {
    observable_matrix(|_| 1.0, spec, rule)
}

/// `F_jk = ∑_i φ_j o(y_i) φ_k w_i`, with `o` a function of the physical
/// coordinate `y`.
pub fn observable_matrix(
    o: impl Fn(f64) -> f64,
    spec: &BasisSpec,
    rule: &QuadratureRule,
) -> Array2<f64> {
    let domain = spec.domain;
    let pairs = rule.nodes.iter().zip(&rule.weights).map(|(&x, &w)| {
        let (xi, y) = match rule.measure {
            Measure::ChebyshevMu => (x, domain.from_canonical(x)),
            Measure::LebesgueY => (domain.to_canonical_unchecked(x), x),
        };
        (xi, w * o(y))
    });
    weighted_outer_sum(spec.size(), pairs, basis_values_into)
}

/// Stiffness matrix `K_jk = ∫ (dφ_j/dy)(dφ_k/dy) dy` on a dense Gauss–Legendre rule.
pub fn stiffness_matrix(spec: &BasisSpec) -> Result<Array2<f64>> {
    let rule = dense_rule(spec)?;
    let jac = spec.domain.jacobian();
    let domain = spec.domain;
    let pairs = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&y, &w)| (domain.to_canonical_unchecked(y), w * jac * jac));
    Ok(weighted_outer_sum(spec.size(), pairs, basis_derivatives_into))
}

/// Potential matrix `M_jk = ∫ V(y) φ_j φ_k dy` on a dense Gauss–Legendre rule.
pub fn potential_matrix(v: impl Fn(f64) -> f64, spec: &BasisSpec) -> Result<Array2<f64>> {
    let rule = dense_rule(spec)?;
    let values: Vec<f64> = rule.nodes.iter().map(|&y| v(y)).collect();
    if let Some((y, val)) = rule
        .nodes
        .iter()
        .zip(&values)
        .find(|(_, val)| !(**val >= 0.0) || !val.is_finite())
    {
        return Err(Error::Validation(format!(
            "potential must be finite and nonnegative, V({y}) = {val}"
        )));
    }
    let domain = spec.domain;
    let pairs = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .zip(values)
        .map(|((&y, &w), val)| (domain.to_canonical_unchecked(y), w * val));
    Ok(weighted_outer_sum(spec.size(), pairs, basis_values_into))
}

/// Lebesgue Gram matrix `∫ φ_j φ_k dy` on the dense rule.
pub fn lebesgue_gram_matrix(spec: &BasisSpec) -> Result<Array2<f64>> {
    let rule = dense_rule(spec)?;
    Ok(gram_matrix(spec, &rule))
}

/// First-derivative matrix `D_jk = ∫ φ_j (dφ_k/dy) dy` (not symmetric).
pub fn derivative_matrix(spec: &BasisSpec) -> Result<Array2<f64>> {
    let rule = dense_rule(spec)?;
    let n = spec.size();
    let jac = spec.domain.jacobian();
    let mut d = Array2::zeros((n, n));
    let mut phi = vec![0.0; n];
    let mut dphi = vec![0.0; n];
    for (&y, &w) in rule.nodes.iter().zip(&rule.weights) {
        let xi = spec.domain.to_canonical_unchecked(y);
        basis_values_into(xi, &mut phi);
        basis_derivatives_into(xi, &mut dphi);
        for j in 0..n {
            let pj = w * jac * phi[j];
            for k in 0..n {
                d[[j, k]] += pj * dphi[k];
            }
        }
    }
    Ok(d)
}

/// `∫_0^θ cos(jt) cos(kt) dt`.
fn cos_product_integral(j: usize, k: usize, theta: f64) -> f64 {
    let s = |m: i64| {
        if m == 0 {
            theta
        } else {
            (m as f64 * theta).sin() / m as f64
        }
    };
    0.5 * (s(j as i64 - k as i64) + s((j + k) as i64))
}

/// Matrix of the indicator observable `1{lo < y ≤ hi}` under `dμ`, in closed
/// form via `ξ = cos θ`; exact for any bounds within the domain.
pub fn interval_indicator_matrix(spec: &BasisSpec, lo: f64, hi: f64) -> Result<Array2<f64>> {
    let xi_lo = spec.domain.to_canonical(lo)?;
    let xi_hi = spec.domain.to_canonical(hi)?;
    if xi_lo > xi_hi {
        return Err(Error::Validation(format!(
            "interval bounds out of order: ({lo}, {hi}]"
        )));
    }
    // ξ ∈ (ξ_lo, ξ_hi] ⇔ θ ∈ [acos ξ_hi, acos ξ_lo)
    let t_hi = xi_lo.clamp(-1.0, 1.0).acos();
    let t_lo = xi_hi.clamp(-1.0, 1.0).acos();
    Ok(symmetric_from_rows(spec.size(), |j, k| {
        kappa(j)
            * kappa(k)
            * (cos_product_integral(j, k, t_hi) - cos_product_integral(j, k, t_lo))
    }))
}

/// Matrix of the exceedance indicator `1{y > t}` under `dμ`.
pub fn exceedance_matrix(spec: &BasisSpec, threshold: f64) -> Result<Array2<f64>> {
    interval_indicator_matrix(spec, threshold, spec.domain.upper())
}

/// Immutable bundle of every matrix used as a quadratic form for one basis.
#[derive(Debug, Clone)]
pub struct BasisOperators {
    pub spec: BasisSpec,
    pub potential_kind: Potential,
    /// Gauss–Chebyshev rule used for all `dμ` integrals.
    pub mu_rule: QuadratureRule,
    pub gram: Array2<f64>,
    pub gram_y: Array2<f64>,
    pub stiffness: Array2<f64>,
    pub potential: Array2<f64>,
    pub moment_y: Array2<f64>,
    pub moment_y2: Array2<f64>,
    pub derivative: Array2<f64>,
}

impl BasisOperators {
    pub fn new(spec: BasisSpec, potential: Potential) -> Result<Self> {
        let mu_rule = gauss_chebyshev_rule(default_mu_nodes(spec.order))?;
        let gram = gram_matrix(&spec, &mu_rule);
        let moment_y = observable_matrix(|y| y, &spec, &mu_rule);
        let moment_y2 = observable_matrix(|y| y * y, &spec, &mu_rule);
        Ok(Self {
            spec,
            potential_kind: potential,
            gram,
            gram_y: lebesgue_gram_matrix(&spec)?,
            stiffness: stiffness_matrix(&spec)?,
            potential: potential_matrix(|y| potential.eval(y), &spec)?,
            moment_y,
            moment_y2,
            derivative: derivative_matrix(&spec)?,
            mu_rule,
        })
    }

    pub fn size(&self) -> usize {
        self.spec.size()
    }

    /// Named matrices in a stable order, for export.
    pub fn named_matrices(&self) -> Vec<(&'static str, &Array2<f64>)> {
        vec![
            ("gram", &self.gram),
            ("gram_y", &self.gram_y),
            ("stiffness", &self.stiffness),
            ("potential", &self.potential),
            ("moment_y", &self.moment_y),
            ("moment_y2", &self.moment_y2),
            ("derivative", &self.derivative),
        ]
    }
}
