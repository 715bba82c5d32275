//! Versioned checkpoints and frozen-model evaluation.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::amplitude::{chebyshev_weight, synthesize_psi, CoefficientVector};
use crate::error::{Error, Result};
use crate::problems::{EvalGrid, ReferenceGrid};
use crate::operators::{uncertainty_product, UncertaintyReport};
use crate::spectral_basis::{
    exceedance_matrix, gauss_legendre_y_rule, observable_matrix, BasisOperators, BasisSpec, Measure,
    OutputDomain, DENSE_NODES_PER_MODE,
};

use super::adam::AdamState;
use super::config::{Normalization, TrainConfig};
use super::mlp::MlpParams;
use super::objective::Objective;
use super::train::EpochRecord;

pub const CHECKPOINT_VERSION: u32 = 1;

/// `x ↦ (x - mean) / std` with statistics of the training inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputScaling {
    pub mean: f64,
    pub std: f64,
}

impl InputScaling {
    pub fn fit(xs: &[f64]) -> Self {
        let n = xs.len().max(1) as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let std = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
        Self { mean, std }
    }

    pub fn apply(&self, x: f64) -> f64 {
        (x - self.mean) / self.std
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub version: u32,
    pub problem: String,
    pub config: TrainConfig,
    pub basis: BasisSpec,
    pub input_scaling: InputScaling,
    /// Smallest and largest training input.
    pub input_range: (f64, f64),
    /// Best-validation parameters.
    pub params: MlpParams,
    /// Optimizer state after the last epoch run.
    pub optimizer: Option<AdamState>,
    pub history: Vec<EpochRecord>,
    /// 1-based; 0 when no epoch completed.
    pub best_epoch: usize,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u32,
}

impl Checkpoint {
    pub fn normalization(&self) -> Normalization {
        self.config.normalization
    }

    pub fn best_val_nll(&self) -> Option<f64> {
        self.history
            .get(self.best_epoch.checked_sub(1)?)
            .map(|r| r.val_nll)
    }

    /// `epoch,total,train_nll,val_nll` rows.
    pub fn write_history_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "epoch,total,train_nll,val_nll")?;
        for r in &self.history {
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e}",
                r.epoch, r.train_loss, r.train_nll, r.val_nll
            )?;
        }
        Ok(())
    }
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer(&mut out, ckpt)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let text = fs::read_to_string(path)?;
    let malformed = |e: serde_json::Error| Error::Malformed(format!("{}: {e}", path.display()));
    let probe: VersionProbe = serde_json::from_str(&text).map_err(malformed)?;
    if probe.version != CHECKPOINT_VERSION {
        return Err(Error::CheckpointVersion {
            found: probe.version,
            expected: CHECKPOINT_VERSION,
        });
    }
    serde_json::from_str(&text).map_err(malformed)
}

/// Projected coefficients for one input.
pub fn forward_to_coefficients(
    x: &[f64],
    params: &MlpParams,
    normalizer: &Array2<f64>,
    eps: f64,
    real_only: bool,
) -> Result<CoefficientVector> {
    let n = normalizer.nrows();
    let z = super::mlp::mlp_forward(x, params)?;
    if z.len() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            actual: z.len(),
        });
    }
    let im = if real_only { vec![0.0; n] } else { z[n..].to_vec() };
    let raw = CoefficientVector {
        re: z[..n].to_vec(),
        im,
    };
    Ok(crate::amplitude::normalize_coefficients(&raw, normalizer, eps).coefficients)
}

/// A frozen network with its basis operators.
#[derive(Debug, Clone)]
pub struct Model {
    pub checkpoint: Checkpoint,
    pub ops: BasisOperators,
    pub objective: Objective,
}

impl Model {
    pub fn new(checkpoint: Checkpoint) -> Result<Self> {
        let ops = BasisOperators::new(checkpoint.basis, checkpoint.config.potential)?;
        let objective = Objective::new(&ops, &checkpoint.config)?;
        if checkpoint.params.output_dim() != 2 * ops.size() {
            return Err(Error::DimensionMismatch {
                expected: 2 * ops.size(),
                actual: checkpoint.params.output_dim(),
            });
        }
        Ok(Self {
            checkpoint,
            ops,
            objective,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::new(load_checkpoint(path)?)
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.ops.spec
    }

    pub fn coefficients(&self, x: f64) -> Result<CoefficientVector> {
        forward_to_coefficients(
            &[self.checkpoint.input_scaling.apply(x)],
            &self.checkpoint.params,
            &self.objective.normalizer,
            self.objective.eps,
            self.objective.real_only,
        )
    }

    /// The model's own density at `y_grid`, expressed against `measure`.
    ///
    /// Analytic models define `p_μ = |ψ|² / ‖c‖²`; trapezoid models define
    /// `p_y = |ψ|² / cᴴ B c`. The two are related by `p_y = p_μ w f'`.
    pub fn density_values(&self, c: &CoefficientVector, y_grid: &[f64], measure: Measure) -> Result<Vec<f64>> {
        let domain = self.ops.spec.domain;
        let xi: Vec<f64> = y_grid
            .iter()
            .map(|&y| domain.to_canonical(y))
            .collect::<Result<_>>()?;
        let psi = synthesize_psi(c, &xi).modulus_sq();
        let norm = c.quadratic_form(&self.objective.normalizer);
        if !(norm > 0.0) {
            return Err(Error::DegenerateState {
                norm_sq: norm,
                threshold: crate::amplitude::DEGENERATE_NORM,
            });
        }
        let jac = domain.jacobian();
        Ok(psi
            .iter()
            .zip(&xi)
            .map(|(m, &x)| {
                let factor = match (self.objective.normalization, measure) {
                    (Normalization::Analytic, Measure::ChebyshevMu)
                    | (Normalization::Trapezoid, Measure::LebesgueY) => 1.0,
                    (Normalization::Analytic, Measure::LebesgueY) => chebyshev_weight(x) * jac,
                    (Normalization::Trapezoid, Measure::ChebyshevMu) => 1.0 / (chebyshev_weight(x) * jac),
                };
                m * factor / norm
            })
            .collect())
    }

    /// Deviation of the model density's total mass from 1: by Gauss
    /// quadrature under `dμ` for analytic models, exactly for trapezoid ones.
    pub fn normalization_error(&self, c: &CoefficientVector) -> Result<f64> {
        match self.objective.normalization {
            Normalization::Analytic => {
                let d = crate::amplitude::density_mu(c, &self.ops.mu_rule)?;
                Ok((d.mass() - 1.0).abs())
            }
            Normalization::Trapezoid => {
                let exact = c.quadratic_form(&self.ops.gram_y);
                Ok((exact / c.quadratic_form(&self.objective.normalizer) - 1.0).abs())
            }
        }
    }

    /// Moments, exceedances and energies of the state at `x`, each taken
    /// under the density the model defines.
    pub fn observables(&self, x: f64, thresholds: &[f64]) -> Result<ObservableRow> {
        let domain = self.ops.spec.domain;
        for &t in thresholds {
            domain.to_canonical(t)?;
        }
        let c = self.coefficients(x)?;
        let (mean, second, exceedance) = match self.objective.normalization {
            Normalization::Analytic => {
                let norm = c.norm_sq();
                let exceed = thresholds
                    .iter()
                    .map(|&t| Ok((t, c.quadratic_form(&exceedance_matrix(&self.ops.spec, t)?) / norm)))
                    .collect::<Result<Vec<_>>>()?;
                (
                    c.quadratic_form(&self.ops.moment_y) / norm,
                    c.quadratic_form(&self.ops.moment_y2) / norm,
                    exceed,
                )
            }
            Normalization::Trapezoid => {
                // |ψ|² is polynomial in y, so Gauss–Legendre on the tail is exact
                let spec = &self.ops.spec;
                let n = DENSE_NODES_PER_MODE * spec.size();
                let rule = gauss_legendre_y_rule(n, &domain)?;
                let norm = c.quadratic_form(&self.ops.gram_y);
                let m1 = c.quadratic_form(&observable_matrix(|y| y, spec, &rule)) / norm;
                let m2 = c.quadratic_form(&observable_matrix(|y| y * y, spec, &rule)) / norm;
                let exceed = thresholds
                    .iter()
                    .map(|&t| {
                        if t >= domain.upper() {
                            return Ok((t, 0.0));
                        }
                        let tail = gauss_legendre_y_rule(n, &OutputDomain::new(t, domain.upper())?)?;
                        Ok((t, c.quadratic_form(&observable_matrix(|_| 1.0, spec, &tail)) / norm))
                    })
                    .collect::<Result<Vec<_>>>()?;
                (m1, m2, exceed)
            }
        };
        Ok(ObservableRow {
            x,
            mean,
            variance: (second - mean * mean).max(0.0),
            exceedance,
            kinetic: c.quadratic_form(&self.ops.stiffness),
            potential: c.quadratic_form(&self.ops.potential),
            uncertainty: uncertainty_product(&c, &self.ops)?,
        })
    }

    /// Model densities on every column of `grid`, renormalized under its weights.
    pub fn density_field(&self, grid: &EvalGrid) -> Result<ReferenceGrid> {
        use rayon::prelude::*;
        let columns = grid
            .x_grid
            .par_iter()
            .map(|&x| {
                let c = self.coefficients(x)?;
                self.density_values(&c, &grid.y_grid, grid.measure)
            })
            .collect::<Result<Vec<_>>>()?;
        let provenance = serde_json::json!({
            "kind": "model",
            "problem": self.checkpoint.problem,
            "order": self.checkpoint.basis.order,
            "normalization": self.checkpoint.config.normalization,
            "best_epoch": self.checkpoint.best_epoch,
        });
        ReferenceGrid::from_columns(grid.clone(), columns, provenance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableRow {
    pub x: f64,
    pub mean: f64,
    pub variance: f64,
    /// `(t, P(y > t))` pairs.
    pub exceedance: Vec<(f64, f64)>,
    pub kinetic: f64,
    pub potential: f64,
    pub uncertainty: UncertaintyReport,
}
