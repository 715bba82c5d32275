//! Mode detection with prominence, optimal matching and mass allocation.

use born_density::amplitude::DensityColumn;
use born_density::evaluation::{allocation_error, allocation_vector, detect_modes, match_modes, voronoi_basins, solve_rectangular};
use born_density::spectral_basis::Measure;

fn bumps(grid: &[f64], centers: &[(f64, f64)]) -> Vec<f64> {
    grid.iter()
        .map(|&y| centers.iter().map(|&(m, w)| w * (-(y - m).powi(2) / 0.02).exp()).sum())
        .collect()
}

fn main() -> born_density::Result<()> {
    let n = 401;
    let grid: Vec<f64> = (0..n).map(|i| -2.0 + 4.0 * i as f64 / (n - 1) as f64).collect();
    let weights = vec![4.0 / (n - 1) as f64; n];
    let column = |v| DensityColumn::new(grid.clone(), v, weights.clone(), Measure::LebesgueY);

    let truth = column(bumps(&grid, &[(-1.0, 1.0), (0.2, 0.6), (1.3, 0.8)]))?;
    let model = column(bumps(&grid, &[(-0.9, 1.0), (1.25, 1.1)]))?;

    let (mt, mm) = (detect_modes(&truth, 1e-4), detect_modes(&model, 1e-4));
    println!("true modes {:.3?}", mt.locations);
    println!("model modes {:.3?}", mm.locations);

    let assignment = match_modes(&mm, &mt, 0.5, 0.0)?;
    println!("pairs {:?}, unmatched true {:?}, cost {:.4}", assignment.pairs, assignment.unmatched_true, assignment.total_cost);

    let basins = voronoi_basins(&mt, &truth.grid)?;
    let a_true = allocation_vector(&truth, &basins, mt.locations.len())?;
    let a_model = allocation_vector(&model, &basins, mt.locations.len())?;
    println!("basin masses {a_true:.3?} vs {a_model:.3?}");
    println!("allocation error {:.4}", allocation_error(&a_true, &a_model)?);

    let cost = vec![vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0]];
    println!("rectangular assignment {:?}", solve_rectangular(&cost));
    Ok(())
}
