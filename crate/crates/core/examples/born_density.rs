//! A two-mode density from interference alone: no mixture components.

use born_density::amplitude::{density_lebesgue, density_mu, interference_decomposition, CoefficientVector};
use born_density::spectral_basis::{gauss_chebyshev_rule, interior_y_rule, OutputDomain};

fn main() -> born_density::Result<()> {
    let domain = OutputDomain::new(-2.0, 2.0)?;
    // three real modes whose cross terms cancel in the middle
    let c = CoefficientVector::new(vec![0.5, 0.7, 0.0, -0.5], vec![0.0; 4])?;

    let rule = gauss_chebyshev_rule(129)?;
    let p_mu = density_mu(&c, &rule)?;
    println!("mass under dμ: {:.12}", p_mu.mass());

    let y_rule = interior_y_rule(400, &domain)?;
    let p_y = density_lebesgue(&c, &y_rule, &domain)?;
    let peaks: Vec<f64> = (1..p_y.len() - 1)
        .filter(|&i| p_y.values[i] > p_y.values[i - 1] && p_y.values[i] >= p_y.values[i + 1])
        .map(|i| p_y.grid[i])
        .collect();
    println!("local maxima of p(y): {peaks:.3?}");

    let xi = [-0.5, 0.0, 0.5];
    let (diag, cross) = interference_decomposition(&c, &xi);
    for i in 0..xi.len() {
        println!("ξ = {:+.1}: diagonal {:.4}, interference {:+.4}", xi[i], diag[i], cross[i]);
    }
    Ok(())
}
