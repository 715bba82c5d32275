//! Training configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral_basis::Potential;

/// How the amplitude is normalized during training.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `cᴴ G c = 1` under `dμ`, exact.
    #[default]
    Analytic,
    /// `∫ |ψ(f(y))|² dy = 1` by the trapezoid rule on a uniform `y` grid.
    Trapezoid,
}

/// Where the `λ‖·‖²` coefficient penalty is applied.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientPenalty {
    /// On the raw network output `z`, before projection.
    #[default]
    Raw,
    /// On the projected coefficients `c`; constant under exact normalization.
    Projected,
}

/// Observable used in an extra `λ_j cᴴ F_j c` penalty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PenaltyObservable {
    /// `y^power`.
    Moment { power: u32 },
    /// `1{y > threshold}`.
    Exceedance { threshold: f64 },
    /// `1{lo < y ≤ hi}`.
    Interval { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorPenalty {
    pub weight: f64,
    pub observable: PenaltyObservable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Truncation order `K`.
    pub order: usize,
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    /// `λ` of the coefficient penalty.
    pub l2_coeff: f64,
    pub coeff_penalty: CoefficientPenalty,
    pub lambda_kin: f64,
    pub lambda_pot: f64,
    pub potential: Potential,
    pub operator_penalties: Vec<OperatorPenalty>,
    pub epochs: usize,
    pub batch_train: usize,
    pub batch_val: usize,
    pub seed: u64,
    pub patience: usize,
    pub normalization: Normalization,
    /// Drop the imaginary half of the output before projection.
    pub real_only: bool,
    pub val_fraction: f64,
    pub projection_eps: f64,
    /// Node count of the trapezoid normalization grid.
    pub trapezoid_nodes: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            order: 24,
            hidden: vec![256, 256, 256],
            learning_rate: 1e-3,
            l2_coeff: 1e-5,
            coeff_penalty: CoefficientPenalty::Raw,
            lambda_kin: 0.0,
            lambda_pot: 0.0,
            potential: Potential::default(),
            operator_penalties: Vec::new(),
            epochs: 150,
            batch_train: 128,
            batch_val: 256,
            seed: 0,
            patience: 30,
            normalization: Normalization::Analytic,
            real_only: false,
            val_fraction: 0.2,
            projection_eps: crate::amplitude::PROJECTION_EPS,
            trapezoid_nodes: crate::spectral_basis::DEFAULT_Y_NODES,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Validation(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if !(self.learning_rate > 0.0) || !(self.projection_eps > 0.0) {
            return bad("learning rate and projection ε must be positive");
        }
        if [self.l2_coeff, self.lambda_kin, self.lambda_pot]
            .iter()
            .any(|v| !(*v >= 0.0) || !v.is_finite())
        {
            return bad("penalty weights must be finite and nonnegative");
        }
        if self.operator_penalties.iter().any(|p| !(p.weight >= 0.0)) {
            return bad("operator penalty weights must be nonnegative");
        }
        if self.batch_train == 0 || self.batch_val == 0 {
            return bad("batch sizes must be at least 1");
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("need at least one hidden layer of nonzero width");
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return bad("validation fraction must lie in (0, 1)");
        }
        if self.trapezoid_nodes < 2 {
            return bad("trapezoid grid needs at least 2 nodes");
        }
        Ok(())
    }
}
