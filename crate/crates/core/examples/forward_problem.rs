//! The benchmark inverse problem: data, analytic posterior, Monte Carlo check.

use born_density::problems::{
    builtin_problems, column_total_variation, find_problem, generate_dataset, monte_carlo_posterior,
    reference_posterior, EvalGrid,
};
use born_density::spectral_basis::Measure;

fn main() -> born_density::Result<()> {
    for p in builtin_problems() {
        println!("{:>5}: {}", p.name, p.formula());
    }
    let problem = find_problem("eq21")?;
    let data = generate_dataset(&problem, 10_000, 7)?;
    println!("first pairs: {:?}", data.x.iter().zip(&data.t).take(3).collect::<Vec<_>>());

    let xs = vec![-1.0, -0.3, 0.0, 0.3, 1.0];
    let grid = EvalGrid::new(xs, 401, &problem.t_domain, Measure::LebesgueY)?;
    let exact = reference_posterior(&problem, &grid)?;
    let mc = monte_carlo_posterior(&problem, &grid, 2_000_000, 0.02, 1)?;
    for j in 0..grid.n_x() {
        println!(
            "x = {:+.1}: mass {:.6}, TV(exact, MC) = {:.4}, MC status {:?}",
            grid.x_grid[j],
            exact.column_mass(j),
            column_total_variation(&exact, &mc, j),
            mc.status[j]
        );
    }
    Ok(())
}
