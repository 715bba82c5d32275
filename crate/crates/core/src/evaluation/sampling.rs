//! Inverse-CDF sampling and quantiles of gridded densities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::amplitude::DensityColumn;
use crate::error::{Error, Result};

/// Cell boundaries: grid midpoints inside, the outer nodes at the ends.
fn cells(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut edges = Vec::with_capacity(n + 1);
    edges.push(grid[0]);
    for i in 1..n {
        edges.push(0.5 * (grid[i - 1] + grid[i]));
    }
    edges.push(grid[n - 1]);
    edges
}

/// Cumulative cell masses `p_i ω_i`, normalized to end at 1.
fn cumulative(column: &DensityColumn) -> Result<Vec<f64>> {
    let mut cdf = Vec::with_capacity(column.len() + 1);
    cdf.push(0.0);
    let mut acc = 0.0;
    for (p, w) in column.values.iter().zip(&column.weights) {
        acc += p.max(0.0) * w;
        cdf.push(acc);
    }
    if !(acc > 0.0) {
        return Err(Error::Validation("density column has no mass".into()));
    }
    cdf.iter_mut().for_each(|c| *c /= acc);
    Ok(cdf)
}

fn invert(cdf: &[f64], edges: &[f64], u: f64) -> f64 {
    // first cell whose upper cumulative value reaches u and has mass
    let mut i = cdf.partition_point(|&c| c < u).clamp(1, cdf.len() - 1);
    while i + 1 < cdf.len() && cdf[i] == cdf[i - 1] {
        i += 1;
    }
    let (c0, c1) = (cdf[i - 1], cdf[i]);
    let frac = if c1 > c0 { ((u - c0) / (c1 - c0)).clamp(0.0, 1.0) } else { 0.5 };
    edges[i - 1] + frac * (edges[i] - edges[i - 1])
}

/// `n` draws by inverting the piecewise-linear CDF of the cell masses.
pub fn sample_from_density(column: &DensityColumn, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Validation("sample count must be at least 1".into()));
    }
    if column.is_empty() {
        return Err(Error::Validation("empty density column".into()));
    }
    let cdf = cumulative(column)?;
    let edges = cells(&column.grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| invert(&cdf, &edges, rng.gen::<f64>())).collect())
}

/// Quantile `q` of the same piecewise-linear CDF.
pub fn density_quantile(column: &DensityColumn, q: f64) -> Result<f64> {
    let cdf = cumulative(column)?;
    Ok(invert(&cdf, &cells(&column.grid), q.clamp(0.0, 1.0)))
}

/// Inter-quartile range of a density column.
pub fn density_iqr(column: &DensityColumn) -> Result<f64> {
    Ok(density_quantile(column, 0.75)? - density_quantile(column, 0.25)?)
}
