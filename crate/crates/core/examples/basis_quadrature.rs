//! Orthonormal Chebyshev basis on [-2, 2] and its quadrature rules.

use born_density::spectral_basis::{
    basis_phi, gauss_chebyshev_rule, gauss_legendre_y_rule, gram_matrix, BasisSpec, OutputDomain,
};

fn main() -> born_density::Result<()> {
    let domain = OutputDomain::new(-2.0, 2.0)?;
    let spec = BasisSpec::new(35, domain);
    let rule = gauss_chebyshev_rule(129)?;

    let g = gram_matrix(&spec, &rule);
    let mut worst = 0.0f64;
    for j in 0..spec.size() {
        for k in 0..spec.size() {
            let target = if j == k { 1.0 } else { 0.0 };
            worst = worst.max((g[[j, k]] - target).abs());
        }
    }
    println!("K = {}: max |G - I| = {worst:.2e} on {} Gauss–Chebyshev nodes", spec.order, rule.len());

    // φ_3 at a few physical points
    for y in [-1.5, 0.0, 0.7] {
        let xi = domain.to_canonical(y)?;
        println!("phi_3(y = {y:>4}) = {:+.6}", basis_phi(3, xi));
    }

    let gl = gauss_legendre_y_rule(40, &domain)?;
    println!("∫ y² dy on [-2, 2] = {:.12} (exact 16/3)", gl.integrate(|y| y * y));
    Ok(())
}
