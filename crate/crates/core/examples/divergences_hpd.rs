//! Information-theoretic distances and HPD-set overlap between two densities.

use born_density::evaluation::{entropy, hpd_set, jaccard, js_divergence, kl_divergence, l2_distance};

fn main() -> born_density::Result<()> {
    let n = 200;
    let h = 4.0 / n as f64;
    let w = vec![h; n];
    let y: Vec<f64> = (0..n).map(|i| -2.0 + (i as f64 + 0.5) * h).collect();
    let normal = |m: f64, s: f64| -> Vec<f64> {
        let v: Vec<f64> = y.iter().map(|&t| (-(t - m).powi(2) / (2.0 * s * s)).exp()).collect();
        let z: f64 = v.iter().sum::<f64>() * h;
        v.into_iter().map(|x| x / z).collect()
    };
    let p = normal(0.0, 0.4);
    let q = normal(0.3, 0.5);

    println!("H(p) = {:.4}, H(q) = {:.4}", entropy(&p, &w), entropy(&q, &w));
    println!("KL(p‖q) = {:.4}", kl_divergence(&p, &q, &w)?);
    println!("JS(p, q) = {:.4} (bounded by ln 2)", js_divergence(&p, &q, &w)?);
    println!("L2(p, q) = {:.4}", l2_distance(&p, &q, &w)?);
    for gamma in [0.5, 0.8, 0.95] {
        let (a, b) = (hpd_set(&p, &w, gamma)?, hpd_set(&q, &w, gamma)?);
        println!("γ = {gamma}: |HPD_p| = {}, Jaccard {:?}", a.indices().len(), jaccard(&a.mask, &b.mask, &w)?);
    }
    Ok(())
}
