//! Boundary peeling with optional Savitzky–Golay smoothing.

use ndarray::{s, Array2};

use crate::error::{Error, Result};
use crate::problems::{ColumnStatus, EvalGrid, ReferenceGrid};

pub const SG_WINDOW: usize = 11;
pub const SG_ORDER: usize = 3;

/// Smallest row count a peel may leave.
pub const MIN_ROWS: usize = 10;

/// Rows removed at each end: `⌈fraction · n⌉`.
pub fn peel_rows(n: usize, fraction: f64) -> usize {
    let raw = fraction * n as f64;
    // guard against products such as 0.05 · 400 landing a hair above an integer
    (raw - 1e-9).ceil().max(0.0) as usize
}

/// Solves the small dense system `a x = b` by partial-pivot elimination.
fn solve_small(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Least-squares weights that evaluate a degree-`order` fit through
/// `window` samples at sample `pos`.
fn sg_weights(window: usize, order: usize, pos: usize) -> Vec<f64> {
    let m = order + 1;
    let t: Vec<f64> = (0..window).map(|i| i as f64 - pos as f64).collect();
    let gram: Vec<Vec<f64>> = (0..m)
        .map(|a| (0..m).map(|b| t.iter().map(|x| x.powi((a + b) as i32)).sum()).collect())
        .collect();
    // fit at t = 0 is the first polynomial coefficient: e₀ᵀ (VᵀV)⁻¹ Vᵀ
    let mut e0 = vec![0.0; m];
    e0[0] = 1.0;
    let r = solve_small(gram, e0);
    t.iter()
        .map(|x| (0..m).map(|a| r[a] * x.powi(a as i32)).sum())
        .collect()
}

/// Savitzky–Golay filter on sample indices; near the ends the fit uses the
/// first or last full window.
pub fn savitzky_golay(values: &[f64], window: usize, order: usize) -> Vec<f64> {
    let n = values.len();
    if n < window {
        return values.to_vec();
    }
    let half = window / 2;
    let tables: Vec<Vec<f64>> = (0..window).map(|p| sg_weights(window, order, p)).collect();
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(half).min(n - window);
            let w = &tables[i - start];
            w.iter().zip(&values[start..start + window]).map(|(a, b)| a * b).sum()
        })
        .collect()
}

/// Drops `⌈fraction · N_y⌉` rows at both ends, optionally smooths, clips
/// negatives and renormalizes each column under the retained weights.
pub fn peel_and_renormalize(field: &ReferenceGrid, fraction: f64, smooth: bool) -> Result<ReferenceGrid> {
    if !(0.0..0.5).contains(&fraction) {
        return Err(Error::Validation(format!("peel fraction {fraction} not in [0, 0.5)")));
    }
    let n_y = field.n_y();
    let k = peel_rows(n_y, fraction);
    if n_y < 2 * k + MIN_ROWS {
        return Err(Error::Validation(format!(
            "peeling {k} rows from each end of {n_y} leaves fewer than {MIN_ROWS}"
        )));
    }
    if k == 0 && !smooth {
        return Ok(field.clone());
    }
    let rows = k..n_y - k;
    let grid = EvalGrid {
        x_grid: field.grid.x_grid.clone(),
        y_grid: field.grid.y_grid[rows.clone()].to_vec(),
        weights: field.grid.weights[rows.clone()].to_vec(),
        measure: field.grid.measure,
    };
    let mut values: Array2<f64> = field.values.slice(s![rows, ..]).to_owned();
    let mut status = field.status.clone();
    for (j, mut col) in values.columns_mut().into_iter().enumerate() {
        if status[j] == ColumnStatus::EmptySupport {
            continue;
        }
        let mut v = col.to_vec();
        if smooth {
            v = savitzky_golay(&v, SG_WINDOW, SG_ORDER);
        }
        v.iter_mut().for_each(|x| *x = x.max(0.0));
        let mass: f64 = v.iter().zip(&grid.weights).map(|(a, b)| a * b).sum();
        if mass > 0.0 {
            col.iter_mut().zip(&v).for_each(|(c, x)| *c = x / mass);
        } else {
            col.fill(0.0);
            status[j] = ColumnStatus::EmptySupport;
        }
    }
    let mut provenance = field.provenance.clone();
    if let Some(obj) = provenance.as_object_mut() {
        obj.insert(
            "peel".into(),
            serde_json::json!({"fraction": fraction, "rows_per_end": k, "smooth": smooth}),
        );
    }
    Ok(ReferenceGrid {
        grid,
        values,
        status,
        provenance,
    })
}
