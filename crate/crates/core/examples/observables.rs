//! Moments, tail probabilities, energies and the position–momentum
//! diagnostic of a projected Gaussian state.

use born_density::operators::{
    exceedance_probability, expectation, kinetic_energy, potential_energy, project_function, uncertainty_product,
    variance, ObservableSet,
};
use born_density::spectral_basis::{BasisOperators, BasisSpec, OutputDomain, Potential};

fn main() -> born_density::Result<()> {
    let spec = BasisSpec::new(35, OutputDomain::new(-2.0, 2.0)?);
    let ops = BasisOperators::new(spec, Potential::default())?;
    let c = project_function(|xi| (-16.0 * xi * xi).exp(), spec.order);

    println!("E[y]   = {:+.6}", expectation(&c, &ops.moment_y));
    println!("Var[y] = {:.6}", variance(&c, &ops.moment_y, &ops.moment_y2));
    println!("P(y > 0.5) = {:.6}", exceedance_probability(&c, &spec, 0.5)?);
    println!("kinetic {:.4}, potential {:.4}", kinetic_energy(&c, &ops.stiffness), potential_energy(&c, &ops.potential));

    let u = uncertainty_product(&c, &ops)?;
    println!(
        "ΔY ΔP = {:.4} (boundary mass {:.1e}, flagged: {})",
        u.product, u.boundary_mass, u.boundary_flag
    );

    let mut set = ObservableSet::from_operators(&ops);
    set.insert_function("cos(y)", f64::cos);
    set.insert_interval(-0.25, 0.25)?;
    for (label, value) in set.evaluate(&c) {
        println!("{label:>16}: {value:.6}");
    }
    Ok(())
}
