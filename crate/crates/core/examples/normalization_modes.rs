//! Analytic versus trapezoid normalization on the same data.

use born_density::coeffnet::{train, Model, Normalization, TrainConfig};
use born_density::problems::{find_problem, generate_dataset};

fn main() -> born_density::Result<()> {
    let problem = find_problem("eq21")?;
    let data = generate_dataset(&problem, 3000, 7)?;
    for normalization in [Normalization::Analytic, Normalization::Trapezoid] {
        let config = TrainConfig {
            epochs: 10,
            hidden: vec![64, 64],
            normalization,
            ..Default::default()
        };
        let model = Model::new(train(&data, config)?)?;
        let mut worst = 0.0f64;
        for i in 0..21 {
            let c = model.coefficients(-1.5 + 0.15 * i as f64)?;
            worst = worst.max(model.normalization_error(&c)?);
        }
        println!(
            "{normalization:?}: best val NLL {:.4}, max |mass - 1| {worst:.2e}",
            model.checkpoint.best_val_nll().unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
