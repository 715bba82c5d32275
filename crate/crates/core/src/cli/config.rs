//! Run configuration: one JSON document drives every subcommand.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coeffnet::TrainConfig;
use crate::error::{Error, Result};
use crate::evaluation::EvalConfig;
use crate::problems::{find_problem, generate_dataset, Dataset, ForwardProblem};
use crate::spectral_basis::Measure;

/// Evaluation grid layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n_x: usize,
    pub n_y: usize,
    /// Central quantile range of the inputs spanned by the x grid.
    pub central_fraction: f64,
    pub measure: Measure,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n_x: 121,
            n_y: crate::spectral_basis::DEFAULT_Y_NODES,
            central_fraction: 0.98,
            measure: Measure::ChebyshevMu,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: String,
    /// Existing dataset CSV; generated from `problem` when absent.
    pub dataset: Option<PathBuf>,
    pub n_samples: usize,
    /// Seed for dataset generation; training has its own in `train.seed`.
    pub seed: u64,
    pub output_dir: PathBuf,
    pub train: TrainConfig,
    pub grid: GridConfig,
    pub eval: EvalConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: "eq21".into(),
            dataset: None,
            n_samples: 10_000,
            seed: 7,
            output_dir: PathBuf::from("runs/default"),
            train: TrainConfig::default(),
            grid: GridConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        find_problem(&self.problem)?;
        self.train.validate()?;
        self.eval.validate()?;
        if self.n_samples == 0 {
            return Err(Error::Validation("n_samples must be at least 1".into()));
        }
        if self.grid.n_x == 0 || self.grid.n_y < 2 {
            return Err(Error::Validation("grid needs n_x ≥ 1 and n_y ≥ 2".into()));
        }
        if !(self.grid.central_fraction > 0.0 && self.grid.central_fraction <= 1.0) {
            return Err(Error::Validation("central_fraction must lie in (0, 1]".into()));
        }
        Ok(())
    }

    pub fn forward_problem(&self) -> Result<ForwardProblem> {
        find_problem(&self.problem)
    }

    /// The configured dataset, loaded or regenerated.
    pub fn dataset(&self) -> Result<Dataset> {
        match &self.dataset {
            Some(path) => Dataset::load(path),
            None => generate_dataset(&self.forward_problem()?, self.n_samples, self.seed),
        }
    }

    /// Writes the fully resolved configuration, defaults included.
    pub fn write_resolved(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("resolved_config.json");
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolved_config_lists_every_default() {
        let value = serde_json::to_value(RunConfig::default()).unwrap();
        for key in ["problem", "dataset", "n_samples", "seed", "output_dir", "train", "grid", "eval"] {
            assert!(value.get(key).is_some(), "{key}");
        }
        assert_eq!(value["train"]["order"], 24);
        assert_eq!(value["eval"]["rho_model"], 0.4);
        let back: RunConfig = serde_json::from_value(value).unwrap();
        assert_eq!(back, RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json(r#"{"problme": "eq21"}"#).is_err());
        assert!(RunConfig::from_json(r#"{"train": {"k": 3}}"#).is_err());
        let c = RunConfig::from_json(r#"{"train": {"order": 35}, "grid": {"n_x": 11}}"#).unwrap();
        assert_eq!((c.train.order, c.grid.n_x, c.grid.n_y), (35, 11, 401));
    }

    #[test]
    fn unknown_problem_fails_validation() {
        let c = RunConfig {
            problem: "nosuch".into(),
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
