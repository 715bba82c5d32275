//! Monte Carlo posteriors against closed-form oracles.

use born_density::problems::{
    central_x_grid, column_total_variation, find_problem, generate_dataset, monte_carlo_posterior,
    reference_posterior, EvalGrid, ForwardProblem, ReferenceGrid,
};
use born_density::spectral_basis::Measure;

fn setup() -> (ForwardProblem, EvalGrid) {
    let problem = find_problem("eq21").unwrap();
    let data = generate_dataset(&problem, 10_000, 7).unwrap();
    let xs = central_x_grid(&data.x, 41, 0.98).unwrap();
    let grid = EvalGrid::new(xs, 401, &problem.t_domain, Measure::LebesgueY).unwrap();
    (problem, grid)
}

/// Exact limit of kernel conditioning: the posterior given `x' ∈ [x - b, x + b]`
/// under uniform noise is proportional to the overlap of `[g - h, g + h]`
/// with that window.
fn windowed_posterior(problem: &ForwardProblem, grid: &EvalGrid, bandwidth: f64) -> ReferenceGrid {
    let h = problem.noise_halfwidth;
    let columns = grid
        .x_grid
        .iter()
        .map(|&x| {
            grid.y_grid
                .iter()
                .map(|&t| {
                    let g = problem.g(t);
                    ((g + h).min(x + bandwidth) - (g - h).max(x - bandwidth)).max(0.0)
                })
                .collect()
        })
        .collect();
    ReferenceGrid::from_columns(grid.clone(), columns, serde_json::json!({"kind": "windowed"})).unwrap()
}

fn median_tv(a: &ReferenceGrid, b: &ReferenceGrid) -> f64 {
    let mut tv: Vec<f64> = (0..a.n_x()).map(|j| column_total_variation(a, b, j)).collect();
    tv.sort_by(f64::total_cmp);
    tv[tv.len() / 2]
}

#[test]
fn monte_carlo_matches_windowed_oracle() {
    let (problem, grid) = setup();
    let oracle = windowed_posterior(&problem, &grid, 0.02);
    let mc = monte_carlo_posterior(&problem, &grid, 1_000_000, 0.02, 1).unwrap();
    let worst = (0..grid.n_x())
        .map(|j| column_total_variation(&oracle, &mc, j))
        .fold(0.0f64, f64::max);
    assert!(worst < 0.05, "max TV to windowed oracle {worst}");
    assert!((0..grid.n_x()).all(|j| mc.is_valid(j)));
}

#[test]
fn monte_carlo_error_shrinks_with_draws() {
    let (problem, grid) = setup();
    let exact = reference_posterior(&problem, &grid).unwrap();
    let medians: Vec<f64> = [10_000, 100_000, 1_000_000]
        .iter()
        .map(|&m| median_tv(&exact, &monte_carlo_posterior(&problem, &grid, m, 0.02, 3).unwrap()))
        .collect();
    assert!(medians.windows(2).all(|w| w[1] <= w[0]), "{medians:?}");
}

#[test]
fn kernel_bias_is_set_by_the_bandwidth() {
    // each indicator edge is smeared over 2b/|g'|, costing b/(4h) of total
    // variation per isolated band
    let (problem, grid) = setup();
    let exact = reference_posterior(&problem, &grid).unwrap();
    for bandwidth in [0.005, 0.02] {
        let bias = median_tv(&exact, &windowed_posterior(&problem, &grid, bandwidth));
        let floor = bandwidth / (4.0 * problem.noise_halfwidth);
        assert!(bias > 0.5 * floor && bias < 2.0 * floor, "b = {bandwidth}: {bias} vs {floor}");
    }
}

#[test]
fn serialized_reference_round_trips() {
    let (problem, grid) = setup();
    let exact = reference_posterior(&problem, &grid).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("reference.csv");
    exact.save(&path).unwrap();
    let back = ReferenceGrid::load(&path).unwrap();
    assert_eq!(back.values, exact.values);
    assert_eq!(back.grid, exact.grid);
    assert!(dir.path().join("reference.json").exists());
}
