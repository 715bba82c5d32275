//! Observables as quadratic forms `cᴴ F c`: expectations, variances,
//! exceedance probabilities, energies and the position/momentum spread.

use std::collections::BTreeMap;

use ndarray::Array2;
use serde::Serialize;

use crate::amplitude::CoefficientVector;
use crate::error::{Error, Result};
use crate::spectral_basis::{
    basis_values_into, exceedance_matrix, gauss_chebyshev_rule, interval_indicator_matrix,
    observable_matrix, BasisOperators, BasisSpec, QuadratureRule,
};

/// Fraction of the domain at each end counted as boundary.
pub const BOUNDARY_FRACTION: f64 = 0.01;

/// Boundary mass at or above this marks the momentum spread as unreliable.
pub const BOUNDARY_MASS_FLAG: f64 = 1e-3;

/// `Re(cᴴ F c)`.
pub fn expectation(c: &CoefficientVector, f: &Array2<f64>) -> f64 {
    c.quadratic_form(f)
}

/// `⟨o²⟩ - ⟨o⟩²`.
pub fn variance(c: &CoefficientVector, f_o: &Array2<f64>, f_o2: &Array2<f64>) -> f64 {
    let m = expectation(c, f_o);
    expectation(c, f_o2) - m * m
}

/// `P(y > t)` under the model density.
pub fn exceedance_probability(c: &CoefficientVector, spec: &BasisSpec, threshold: f64) -> Result<f64> {
    check_size(c, spec.size())?;
    Ok(expectation(c, &exceedance_matrix(spec, threshold)?))
}

/// `cᴴ 𝐊 c = ∫ |∂_y ψ|² dy`.
pub fn kinetic_energy(c: &CoefficientVector, stiffness: &Array2<f64>) -> f64 {
    c.quadratic_form(stiffness)
}

/// `cᴴ 𝐌 c = ∫ V |ψ|² dy`.
pub fn potential_energy(c: &CoefficientVector, potential: &Array2<f64>) -> f64 {
    c.quadratic_form(potential)
}

fn check_size(c: &CoefficientVector, size: usize) -> Result<()> {
    if c.len() != size {
        return Err(Error::DimensionMismatch {
            expected: size,
            actual: c.len(),
        });
    }
    Ok(())
}

/// Position and momentum spreads of one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UncertaintyReport {
    pub delta_y: f64,
    pub delta_p: f64,
    pub product: f64,
    /// Model mass within [`BOUNDARY_FRACTION`] of either end.
    pub boundary_mass: f64,
    /// Set when `boundary_mass ≥ BOUNDARY_MASS_FLAG`; the product is then
    /// reported but carries no bound.
    pub boundary_flag: bool,
}

/// `ΔY` from the model density; `ΔP² = ⟨ψ'|ψ'⟩ - |⟨ψ|-iψ'⟩|²` for the
/// `dy`-normalized amplitude, from the stiffness and derivative matrices.
pub fn uncertainty_product(c: &CoefficientVector, ops: &BasisOperators) -> Result<UncertaintyReport> {
    check_size(c, ops.size())?;
    let norm_mu = c.norm_sq();
    let norm_y = c.quadratic_form(&ops.gram_y);
    if !(norm_mu > 0.0 && norm_y > 0.0) {
        return Err(Error::DegenerateState {
            norm_sq: norm_mu,
            threshold: crate::amplitude::DEGENERATE_NORM,
        });
    }
    let mean_y = expectation(c, &ops.moment_y) / norm_mu;
    let var_y = (expectation(c, &ops.moment_y2) / norm_mu - mean_y * mean_y).max(0.0);

    let grad_sq = c.quadratic_form(&ops.stiffness) / norm_y;
    let d_re = c.quadratic_form(&ops.derivative) / norm_y;
    let d_im = c.quadratic_form_imag(&ops.derivative) / norm_y;
    let var_p = (grad_sq - (d_re * d_re + d_im * d_im)).max(0.0);

    let domain = ops.spec.domain;
    let band = BOUNDARY_FRACTION * domain.length();
    let lower = interval_indicator_matrix(&ops.spec, domain.lower(), domain.lower() + band)?;
    let upper = interval_indicator_matrix(&ops.spec, domain.upper() - band, domain.upper())?;
    let boundary_mass = (c.quadratic_form(&lower) + c.quadratic_form(&upper)) / norm_mu;

    let (delta_y, delta_p) = (var_y.sqrt(), var_p.sqrt());
    Ok(UncertaintyReport {
        delta_y,
        delta_p,
        product: delta_y * delta_p,
        boundary_mass,
        boundary_flag: boundary_mass >= BOUNDARY_MASS_FLAG,
    })
}

/// Unit-norm coefficients of `f(ξ)` projected onto `φ_0..φ_K` under `dμ`.
pub fn project_function(f: impl Fn(f64) -> f64, order: usize) -> CoefficientVector {
    let rule = gauss_chebyshev_rule(4 * (order + 1) + 256).expect("node count is positive");
    let mut re = vec![0.0; order + 1];
    let mut phi = vec![0.0; order + 1];
    for (&xi, &w) in rule.nodes.iter().zip(&rule.weights) {
        basis_values_into(xi, &mut phi);
        let v = f(xi) * w;
        for (r, p) in re.iter_mut().zip(&phi) {
            *r += v * p;
        }
    }
    let norm = re.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        re.iter_mut().for_each(|v| *v /= norm);
    }
    CoefficientVector::real(re)
}

/// Labelled observable matrices for one basis.
#[derive(Debug, Clone)]
pub struct ObservableSet {
    spec: BasisSpec,
    rule: QuadratureRule,
    matrices: BTreeMap<String, Array2<f64>>,
}

impl ObservableSet {
    /// Starts with `y` and `y2`.
    pub fn new(spec: BasisSpec, rule: QuadratureRule) -> Self {
        let mut set = Self {
            spec,
            rule,
            matrices: BTreeMap::new(),
        };
        set.insert_function("y", |y| y);
        set.insert_function("y2", |y| y * y);
        set
    }

    pub fn from_operators(ops: &BasisOperators) -> Self {
        let mut matrices = BTreeMap::new();
        matrices.insert("y".to_string(), ops.moment_y.clone());
        matrices.insert("y2".to_string(), ops.moment_y2.clone());
        Self {
            spec: ops.spec,
            rule: ops.mu_rule.clone(),
            matrices,
        }
    }

    pub fn insert_function(&mut self, label: &str, o: impl Fn(f64) -> f64) -> &Array2<f64> {
        let m = observable_matrix(o, &self.spec, &self.rule);
        self.matrices.insert(label.to_string(), m);
        &self.matrices[label]
    }

    /// Adds `1{y > t}` under the label `exceed:<t>`.
    pub fn insert_exceedance(&mut self, threshold: f64) -> Result<String> {
        let label = format!("exceed:{threshold}");
        let m = exceedance_matrix(&self.spec, threshold)?;
        self.matrices.insert(label.clone(), m);
        Ok(label)
    }

    /// Adds `1{lo < y ≤ hi}` under the label `interval:<lo>:<hi>`.
    pub fn insert_interval(&mut self, lo: f64, hi: f64) -> Result<String> {
        let label = format!("interval:{lo}:{hi}");
        let m = interval_indicator_matrix(&self.spec, lo, hi)?;
        self.matrices.insert(label.clone(), m);
        Ok(label)
    }

    pub fn get(&self, label: &str) -> Option<&Array2<f64>> {
        self.matrices.get(label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.matrices.keys().map(String::as_str)
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    /// Expectation of every observable, in label order.
    pub fn evaluate(&self, c: &CoefficientVector) -> Vec<(String, f64)> {
        self.matrices
            .iter()
            .map(|(k, m)| (k.clone(), expectation(c, m)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::amplitude::{density_mu, normalize_coefficients, PROJECTION_EPS};
    use crate::spectral_basis::{default_mu_nodes, OutputDomain, Potential};

    fn ops(order: usize) -> BasisOperators {
        let spec = BasisSpec::new(order, OutputDomain::new(-2.0, 2.0).unwrap());
        BasisOperators::new(spec, Potential::default()).unwrap()
    }

    fn random_unit(rng: &mut ChaCha8Rng, size: usize) -> CoefficientVector {
        let z = CoefficientVector::new(
            (0..size).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            (0..size).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        normalize_coefficients(&z, &Array2::eye(size), PROJECTION_EPS).coefficients
    }

    #[test]
    fn expectation_examples() {
        let o = ops(6);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = random_unit(&mut rng, 7);
        assert!((expectation(&c, &Array2::eye(7)) - 1.0).abs() < 1e-10);
        assert!(expectation(&CoefficientVector::basis(7, 0), &o.moment_y).abs() < 1e-12);
        let mut re = vec![0.0; 7];
        re[0] = FRAC_1_SQRT_2;
        re[1] = FRAC_1_SQRT_2;
        let m = expectation(&CoefficientVector::real(re), &o.moment_y);
        // y = 2ξ and ⟨φ_0, ξ φ_1⟩ = 1/√2
        assert!((m - 2.0 * FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn variance_examples() {
        let o = ops(6);
        let e0 = CoefficientVector::basis(7, 0);
        assert!((variance(&e0, &o.moment_y, &o.moment_y2) - 2.0).abs() < 1e-12);
        let set = {
            let mut s = ObservableSet::from_operators(&o);
            s.insert_function("k", |_| 3.0);
            s.insert_function("k2", |_| 9.0);
            s
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let c = random_unit(&mut rng, 7);
            let v = variance(&c, set.get("k").unwrap(), set.get("k2").unwrap());
            assert!(v.abs() < 1e-10);
            assert!(variance(&c, &o.moment_y, &o.moment_y2) >= -1e-9);
        }
    }

    #[test]
    fn exceedance_examples() {
        let o = ops(8);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let c = random_unit(&mut rng, 9);
            assert!((exceedance_probability(&c, &o.spec, -2.0).unwrap() - 1.0).abs() < 1e-9);
            assert!(exceedance_probability(&c, &o.spec, 2.0).unwrap().abs() < 1e-9);
            let t = rng.gen_range(-2.0..2.0);
            let above = exceedance_probability(&c, &o.spec, t).unwrap();
            let below = expectation(&c, &interval_indicator_matrix(&o.spec, -2.0, t).unwrap());
            assert!((above + below - 1.0).abs() < 1e-9);
            assert!((-1e-9..=1.0 + 1e-9).contains(&above));
        }
        assert!(exceedance_probability(&CoefficientVector::basis(9, 0), &o.spec, 2.5).is_err());
    }

    #[test]
    fn quadratic_forms_match_direct_integrals() {
        let o = ops(10);
        let rule = gauss_chebyshev_rule(default_mu_nodes(10)).unwrap();
        let domain = o.spec.domain;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut set = ObservableSet::new(o.spec, rule.clone());
        set.insert_function("y3", |y| y.powi(3));
        set.insert_function("y4", |y| y.powi(4));
        for _ in 0..20 {
            let c = random_unit(&mut rng, 11);
            let d = density_mu(&c, &rule).unwrap();
            for (label, p) in [("y", 1), ("y2", 2), ("y3", 3), ("y4", 4)] {
                let direct: f64 = d
                    .grid
                    .iter()
                    .zip(&d.values)
                    .zip(&d.weights)
                    .map(|((xi, v), w)| domain.from_canonical(*xi).powi(p) * v * w)
                    .sum();
                assert!((expectation(&c, set.get(label).unwrap()) - direct).abs() < 1e-8);
            }
            // indicator against a fine Chebyshev-node sum
            let fine = gauss_chebyshev_rule(20_000).unwrap();
            let fd = density_mu(&c, &fine).unwrap();
            let t = 0.3;
            let direct: f64 = fd
                .grid
                .iter()
                .zip(&fd.values)
                .zip(&fd.weights)
                .filter(|((xi, _), _)| domain.from_canonical(**xi) > t)
                .map(|((_, v), w)| v * w)
                .sum();
            let label = set.insert_exceedance(t).unwrap();
            assert!((expectation(&c, set.get(&label).unwrap()) - direct).abs() < 2e-3);
        }
    }

    #[test]
    fn energies() {
        let o = ops(8);
        let e0 = CoefficientVector::basis(9, 0);
        assert_eq!(kinetic_energy(&e0, &o.stiffness), 0.0);
        assert!((kinetic_energy(&CoefficientVector::basis(9, 1), &o.stiffness) - 2.0 / PI).abs() < 1e-10);
        assert!(
            kinetic_energy(&CoefficientVector::basis(9, 8), &o.stiffness)
                > kinetic_energy(&CoefficientVector::basis(9, 1), &o.stiffness)
        );
        assert!((potential_energy(&e0, &o.potential) - 16.0 / (3.0 * PI)).abs() < 1e-10);
        let zero = crate::spectral_basis::potential_matrix(|_| 0.0, &o.spec).unwrap();
        assert_eq!(potential_energy(&e0, &zero), 0.0);
        // a state concentrated near y = 0 has lower potential energy than e_0
        let narrow = project_function(|xi| (-16.0 * xi * xi).exp(), 8);
        let scale = narrow.quadratic_form(&o.gram_y);
        let e_narrow = potential_energy(&narrow, &o.potential) / scale;
        let e_flat = potential_energy(&e0, &o.potential) / e0.quadratic_form(&o.gram_y);
        assert!(e_narrow < e_flat);
    }

    #[test]
    fn energies_nonnegative_on_random_states() {
        let o = ops(12);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let c = random_unit(&mut rng, 13);
            assert!(kinetic_energy(&c, &o.stiffness) >= -1e-9);
            assert!(potential_energy(&c, &o.potential) >= -1e-9);
        }
    }

    #[test]
    fn uncertainty_of_constant_mode() {
        let o = ops(10);
        let r = uncertainty_product(&CoefficientVector::basis(11, 0), &o).unwrap();
        assert_eq!(r.delta_p, 0.0);
        assert_eq!(r.product, 0.0);
        assert!(r.boundary_flag);
        assert!(r.delta_y <= 2.0);
    }

    #[test]
    fn uncertainty_of_damped_gaussian() {
        let o = ops(35);
        let c = project_function(|xi| (-16.0 * xi * xi).exp(), 35);
        let r = uncertainty_product(&c, &o).unwrap();
        assert!(r.boundary_mass < 1e-3);
        assert!(!r.boundary_flag);
        assert!(r.product >= 0.5 * 0.95, "product {}", r.product);
        assert!(r.delta_y <= 2.0);
    }

    #[test]
    fn uncertainty_is_gauge_invariant_for_complex_states() {
        let o = ops(9);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let c = random_unit(&mut rng, 10);
            let a = uncertainty_product(&c, &o).unwrap();
            let b = uncertainty_product(&c.rotate(rng.gen_range(0.0..TAU)), &o).unwrap();
            assert!((a.product - b.product).abs() < 1e-10);
            assert!(a.delta_y <= 2.0);
        }
    }

    #[test]
    fn project_function_recovers_polynomials() {
        let c = project_function(|xi| 2.0 * xi * xi - 1.0, 5);
        assert!((c.re[2].abs() - 1.0).abs() < 1e-12);
        assert!(c.re.iter().enumerate().all(|(k, v)| k == 2 || v.abs() < 1e-12));
    }

    proptest! {
        #[test]
        fn quadratic_forms_phase_invariant(
            re in prop::collection::vec(-1.0f64..1.0, 7),
            im in prop::collection::vec(-1.0f64..1.0, 7),
            phase in 0.0f64..TAU,
        ) {
            let o = ops(6);
            let c = CoefficientVector::new(re, im).unwrap();
            let r = c.rotate(phase);
            for m in [&o.moment_y, &o.moment_y2, &o.stiffness, &o.potential] {
                prop_assert!((expectation(&c, m) - expectation(&r, m)).abs() < 1e-12);
            }
        }
    }
}
