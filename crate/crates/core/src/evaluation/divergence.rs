//! Entropy and divergences of densities sharing one grid and weight vector.

use crate::error::{Error, Result};

/// Floor of `q` inside `KL(p‖q)`.
pub const KL_FLOOR: f64 = 1e-12;

/// Guard inside the entropy logarithm.
pub const ENTROPY_GUARD: f64 = 1e-300;

fn check(p: &[f64], q: &[f64], w: &[f64]) -> Result<()> {
    if p.len() != w.len() || q.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            actual: if p.len() != w.len() { p.len() } else { q.len() },
        });
    }
    Ok(())
}

/// `-∑ p_i log(p_i + η) ω_i`.
pub fn entropy(p: &[f64], w: &[f64]) -> f64 {
    -p.iter()
        .zip(w)
        .map(|(&pi, &wi)| pi * (pi + ENTROPY_GUARD).ln() * wi)
        .sum::<f64>()
}

fn kl_unfloored(p: &[f64], q: &[f64], w: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .zip(w)
        .filter(|((&pi, _), _)| pi > 0.0)
        .map(|((&pi, &qi), &wi)| pi * (pi / qi).ln() * wi)
        .sum()
}

/// `∑ p_i log(p_i / max(q_i, 1e-12)) ω_i`, with `0 log 0 = 0`.
pub fn kl_divergence(p: &[f64], q: &[f64], w: &[f64]) -> Result<f64> {
    check(p, q, w)?;
    let floored: Vec<f64> = q.iter().map(|&v| v.max(KL_FLOOR)).collect();
    Ok(kl_unfloored(p, &floored, w))
}

/// `∑ (p_i - q_i)² ω_i`.
pub fn l2_distance(p: &[f64], q: &[f64], w: &[f64]) -> Result<f64> {
    check(p, q, w)?;
    Ok(p.iter()
        .zip(q)
        .zip(w)
        .map(|((a, b), wi)| (a - b).powi(2) * wi)
        .sum())
}

/// `½ KL(p‖m) + ½ KL(q‖m)` with `m = (p + q) / 2`.
pub fn js_divergence(p: &[f64], q: &[f64], w: &[f64]) -> Result<f64> {
    check(p, q, w)?;
    let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
    Ok((0.5 * kl_unfloored(p, &m, w) + 0.5 * kl_unfloored(q, &m, w)).max(0.0))
}
