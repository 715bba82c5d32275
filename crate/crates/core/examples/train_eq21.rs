//! Train the coefficient network on the benchmark problem.
//!
//! `cargo run --release --example train_eq21 -- [epochs] [out.json]`

use born_density::coeffnet::{save_checkpoint, TrainConfig, Trainer};
use born_density::problems::{find_problem, generate_dataset};

fn main() -> born_density::Result<()> {
    let mut args = std::env::args().skip(1);
    let epochs = args.next().and_then(|a| a.parse().ok()).unwrap_or(20);
    let out = args.next().unwrap_or_else(|| "target/eq21_checkpoint.json".into());

    let problem = find_problem("eq21")?;
    let data = generate_dataset(&problem, 10_000, 7)?;
    let config = TrainConfig {
        epochs,
        ..Default::default()
    };
    let mut trainer = Trainer::new(&data, config)?;
    while let Some(r) = trainer.run_epoch()? {
        println!("epoch {:>3}  train {:.4}  val {:.4}", r.epoch, r.train_nll, r.val_nll);
    }
    let ckpt = trainer.checkpoint();
    println!("best epoch {} with validation NLL {:.4}", ckpt.best_epoch, ckpt.best_val_nll().unwrap_or(f64::NAN));
    save_checkpoint(&ckpt, std::path::Path::new(&out))?;
    println!("saved {out}");
    Ok(())
}
