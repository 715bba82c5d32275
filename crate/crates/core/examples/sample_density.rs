//! Inverse-CDF sampling from a posterior column and its quantiles.

use born_density::evaluation::{density_iqr, density_quantile, sample_from_density};
use born_density::problems::{find_problem, reference_posterior, EvalGrid};
use born_density::spectral_basis::Measure;

fn main() -> born_density::Result<()> {
    let problem = find_problem("eq21")?;
    let grid = EvalGrid::new(vec![0.0], 2001, &problem.t_domain, Measure::LebesgueY)?;
    let column = reference_posterior(&problem, &grid)?.column(0);

    let draws = sample_from_density(&column, 1200, 3)?;
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    println!("1200 draws at x = 0: mean {mean:+.4}, min {:+.3}, max {:+.3}",
        draws.iter().cloned().fold(f64::INFINITY, f64::min),
        draws.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    for q in [0.05, 0.5, 0.95] {
        println!("quantile {q}: {:+.4}", density_quantile(&column, q)?);
    }
    println!("IQR {:.4}", density_iqr(&column)?);

    // coarse histogram
    let mut bins = [0usize; 16];
    for d in &draws {
        let b = (((d + 2.0) / 4.0) * 16.0).floor().clamp(0.0, 15.0) as usize;
        bins[b] += 1;
    }
    for (i, count) in bins.iter().enumerate() {
        println!("{:+.2} {}", -2.0 + 0.25 * i as f64, "#".repeat(count / 8));
    }
    Ok(())
}
