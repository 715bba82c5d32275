//! Effect of the kinetic and potential penalties on the learned states.

use born_density::coeffnet::{train, Model, TrainConfig};
use born_density::problems::{find_problem, generate_dataset};

fn main() -> born_density::Result<()> {
    let problem = find_problem("eq21")?;
    let data = generate_dataset(&problem, 2000, 7)?;
    let probes: Vec<f64> = (0..11).map(|i| -1.5 + 0.3 * i as f64).collect();
    for (lambda_kin, lambda_pot) in [(0.0, 0.0), (1e-3, 0.0), (1e-3, 1.0), (1e-1, 0.0)] {
        let config = TrainConfig {
            epochs: 6,
            hidden: vec![32, 32],
            lambda_kin,
            lambda_pot,
            ..Default::default()
        };
        let model = Model::new(train(&data, config)?)?;
        let (mut kin, mut pot) = (0.0, 0.0);
        for &x in &probes {
            let row = model.observables(x, &[])?;
            kin += row.kinetic / probes.len() as f64;
            pot += row.potential / probes.len() as f64;
        }
        println!("λ_kin {lambda_kin:<6} λ_pot {lambda_pot:<4} → ⟨K⟩ {kin:9.3}  ⟨V⟩ {pot:.4}");
    }
    Ok(())
}
