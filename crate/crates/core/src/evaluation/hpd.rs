//! Highest-density sets and their weighted Jaccard overlap.

use serde::Serialize;

use crate::error::{Error, Result};

/// Grid cells of a highest-density set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HpdSet {
    /// Membership per grid index.
    pub mask: Vec<bool>,
    /// Density of the last cell admitted.
    pub threshold: f64,
    /// `∑ p_i ω_i` over the set.
    pub mass: f64,
}

impl HpdSet {
    pub fn indices(&self) -> Vec<usize> {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Cells ordered by density (ties by index) and admitted until their mass
/// reaches `γ`. Zero-density cells are never admitted.
pub fn hpd_set(p: &[f64], w: &[f64], gamma: f64) -> Result<HpdSet> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Validation(format!("HPD level {gamma} not in (0, 1)")));
    }
    if p.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            actual: p.len(),
        });
    }
    let mut order: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
    order.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    let mut mask = vec![false; p.len()];
    let mut mass = 0.0;
    let mut threshold = 0.0;
    for i in order {
        if mass >= gamma {
            break;
        }
        mask[i] = true;
        mass += p[i] * w[i];
        threshold = p[i];
    }
    Ok(HpdSet {
        mask,
        threshold,
        mass,
    })
}

/// `ω(A ∩ B) / ω(A ∪ B)`; `None` when both sets are empty.
pub fn jaccard(a: &[bool], b: &[bool], w: &[f64]) -> Result<Option<f64>> {
    if a.len() != w.len() || b.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            actual: a.len().min(b.len()),
        });
    }
    let mut inter = 0.0;
    let mut union = 0.0;
    for ((&x, &y), &wi) in a.iter().zip(b).zip(w) {
        if x && y {
            inter += wi;
        }
        if x || y {
            union += wi;
        }
    }
    Ok((union > 0.0).then(|| inter / union))
}
