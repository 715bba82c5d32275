//! Peak detection with topographic prominence, mode matching and the
//! count, location and allocation errors.

use serde::Serialize;

use crate::amplitude::DensityColumn;
use crate::error::{Error, Result};

use super::assignment::solve_rectangular;

/// Retained maxima of one density column.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ModeSet {
    pub indices: Vec<usize>,
    pub locations: Vec<f64>,
    pub prominences: Vec<f64>,
    /// Negative second difference in grid units, per `y²`.
    pub curvatures: Vec<f64>,
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Local maxima as `(left, right)` index ranges of flat tops. Runs touching
/// either end of the column are not maxima.
fn local_maxima(p: &[f64]) -> Vec<(usize, usize)> {
    let n = p.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if p[i - 1] < p[i] {
            let mut ahead = i + 1;
            while ahead + 1 < n && p[ahead] == p[i] {
                ahead += 1;
            }
            if p[ahead] < p[i] {
                out.push((i, ahead - 1));
                i = ahead;
            }
        }
        i += 1;
    }
    out
}

/// Height above the higher of the two bracketing minima, each found by
/// walking outward until the signal rises above the peak.
fn prominence(p: &[f64], peak: usize) -> f64 {
    let h = p[peak];
    let mut left_min = h;
    for &v in p[..peak].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &p[peak + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

/// Second-difference curvature across a flat top `[l, r]`, using the outer
/// neighbours; positive for a maximum.
fn curvature(p: &[f64], y: &[f64], l: usize, r: usize) -> f64 {
    let h1 = y[l] - y[l - 1];
    let h2 = y[r + 1] - y[r];
    let d1 = (p[l] - p[l - 1]) / h1;
    let d2 = (p[r + 1] - p[r]) / h2;
    -2.0 * (d2 - d1) / (h1 + h2)
}

/// Maxima whose prominence is at least `rho` and whose second difference is
/// negative; a flat top counts once, at its middle index.
pub fn detect_modes(column: &DensityColumn, rho: f64) -> ModeSet {
    let p = &column.values;
    let y = &column.grid;
    let mut set = ModeSet::default();
    if p.len() < 3 {
        return set;
    }
    for (l, r) in local_maxima(p) {
        let mid = (l + r) / 2;
        let prom = prominence(p, mid);
        let kappa = curvature(p, y, l, r);
        if prom >= rho && kappa > 0.0 {
            set.indices.push(mid);
            set.locations.push(y[mid]);
            set.prominences.push(prom);
            set.curvatures.push(kappa);
        }
    }
    set
}

pub fn mode_count_error(a: &ModeSet, b: &ModeSet) -> usize {
    a.len().abs_diff(b.len())
}

/// Partial matching between predicted and true modes.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Assignment {
    /// `(pred, true)` positions within the two mode sets, by predicted index.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_pred: Vec<usize>,
    pub unmatched_true: Vec<usize>,
    pub total_cost: f64,
}

/// Minimum-cost matching under `C_rs = |y_r - y_s| / s + λ_κ |κ_r - κ_s|`.
pub fn match_modes(pred: &ModeSet, truth: &ModeSet, scale: f64, lambda_kappa: f64) -> Result<Assignment> {
    if !(scale > 0.0) || !(lambda_kappa >= 0.0) {
        return Err(Error::Validation(format!(
            "matching needs s > 0 and λ_κ ≥ 0, got s = {scale}, λ_κ = {lambda_kappa}"
        )));
    }
    let cost: Vec<Vec<f64>> = (0..pred.len())
        .map(|r| {
            (0..truth.len())
                .map(|s| {
                    (pred.locations[r] - truth.locations[s]).abs() / scale
                        + lambda_kappa * (pred.curvatures[r] - truth.curvatures[s]).abs()
                })
                .collect()
        })
        .collect();
    let rows = solve_rectangular(&cost);
    let mut out = Assignment::default();
    let mut used = vec![false; truth.len()];
    for (r, col) in rows.iter().enumerate() {
        match col {
            Some(s) => {
                used[*s] = true;
                out.total_cost += cost[r][*s];
                out.pairs.push((r, *s));
            }
            None => out.unmatched_pred.push(r),
        }
    }
    out.unmatched_true = (0..truth.len()).filter(|&s| !used[s]).collect();
    Ok(out)
}

/// Mean `|y_pred - y_true|` over matched pairs; `None` without pairs.
pub fn location_error(assignment: &Assignment, pred: &ModeSet, truth: &ModeSet) -> Option<f64> {
    if assignment.pairs.is_empty() {
        return None;
    }
    let sum: f64 = assignment
        .pairs
        .iter()
        .map(|&(r, s)| (pred.locations[r] - truth.locations[s]).abs())
        .sum();
    Some(sum / assignment.pairs.len() as f64)
}

/// Nearest-true-mode label for every grid point; ties go to the lower mode.
pub fn voronoi_basins(truth: &ModeSet, y_grid: &[f64]) -> Result<Vec<usize>> {
    if truth.is_empty() {
        return Err(Error::Validation("basins need at least one true mode".into()));
    }
    Ok(y_grid
        .iter()
        .map(|&y| {
            let mut best = 0;
            let mut best_d = (y - truth.locations[0]).abs();
            for (s, &loc) in truth.locations.iter().enumerate().skip(1) {
                let d = (y - loc).abs();
                if d < best_d {
                    best = s;
                    best_d = d;
                }
            }
            best
        })
        .collect())
}

/// `α_s = ∑_{i ∈ B_s} p_i ω_i`.
pub fn allocation_vector(column: &DensityColumn, basins: &[usize], n_basins: usize) -> Result<Vec<f64>> {
    if basins.len() != column.len() {
        return Err(Error::DimensionMismatch {
            expected: column.len(),
            actual: basins.len(),
        });
    }
    let mut alpha = vec![0.0; n_basins];
    for ((&b, p), w) in basins.iter().zip(&column.values).zip(&column.weights) {
        alpha[b] += p * w;
    }
    Ok(alpha)
}

/// `½ ‖a - b‖₁`.
pub fn allocation_error(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>())
}
