//! Dump the cached basis matrices as CSV for comparison with other tools.

use born_density::io::write_matrix_csv;
use born_density::spectral_basis::{BasisOperators, BasisSpec, OutputDomain, Potential};

fn main() -> born_density::Result<()> {
    let order = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(8);
    let ops = BasisOperators::new(BasisSpec::new(order, OutputDomain::new(-2.0, 2.0)?), Potential::default())?;
    let dir = std::env::temp_dir().join(format!("born_density_matrices_k{order}"));
    std::fs::create_dir_all(&dir)?;
    for (name, m) in ops.named_matrices() {
        write_matrix_csv(std::fs::File::create(dir.join(format!("{name}.csv")))?, m)?;
        let trace: f64 = m.diag().sum();
        println!("{name:>10}: {}×{}, trace {trace:.6}", m.nrows(), m.ncols());
    }
    println!("written to {}", dir.display());
    Ok(())
}
