//! Multimodal evaluation of a small trained model against the exact posterior.

use born_density::coeffnet::{train, Model, TrainConfig};
use born_density::evaluation::{evaluate_fields, EvalConfig};
use born_density::problems::{central_x_grid, find_problem, generate_dataset, reference_posterior, EvalGrid};
use born_density::spectral_basis::Measure;

fn main() -> born_density::Result<()> {
    let problem = find_problem("eq21")?;
    let data = generate_dataset(&problem, 4000, 7)?;
    let config = TrainConfig {
        epochs: 15,
        hidden: vec![64, 64],
        ..Default::default()
    };
    let model = Model::new(train(&data, config)?)?;

    let xs = central_x_grid(&data.x, 81, 0.98)?;
    let grid = EvalGrid::new(xs, 401, &problem.t_domain, Measure::LebesgueY)?;
    let reference = reference_posterior(&problem, &grid)?;
    let field = model.density_field(&grid)?;

    let eval = EvalConfig {
        peel: 0.05,
        ..Default::default()
    };
    let report = evaluate_fields(&reference, &field, &eval)?;
    let a = &report.aggregates;
    let show = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.4}"));
    println!("columns: {}", a.valid_columns);
    println!("E_count mean {}", show(a.e_count.mean));
    println!("E_loc   mean {}", show(a.e_loc.mean));
    println!("E_alloc mean {}", show(a.e_alloc.mean));
    println!("JS      mean {} (unpeeled {})", show(a.js.mean), show(a.js_full.mean));
    for (g, s) in eval.gammas.iter().zip(&a.jaccard) {
        println!("Jaccard γ={g}: {}", show(s.mean));
    }

    let dir = std::env::temp_dir().join("born_density_eval");
    report.save(&dir, &reference, &field)?;
    println!("report and charts in {}", dir.display());
    Ok(())
}
