//! Minibatch training with early stopping.

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::amplitude::chebyshev_weight;
use crate::error::{Error, Result};
use crate::problems::Dataset;
use crate::spectral_basis::{basis_values_into, BasisOperators, BasisSpec};

use super::adam::{adam_step, AdamState};
use super::checkpoint::{Checkpoint, InputScaling, CHECKPOINT_VERSION};
use super::config::{Normalization, TrainConfig};
use super::mlp::MlpParams;
use super::objective::Objective;

/// One epoch of the training history. NLL values are with respect to `dμ`
/// in both normalization modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_nll: f64,
    pub val_nll: f64,
}

/// Inputs and target basis rows of a dataset, ready for batching.
struct Prepared {
    x: Array2<f64>,
    phi: Array2<f64>,
    /// Added to a per-sample NLL to express it against `dμ`.
    offset: Vec<f64>,
}

/// Stateful training loop; one call of [`Trainer::run_epoch`] per epoch.
pub struct Trainer {
    config: TrainConfig,
    spec: BasisSpec,
    objective: Objective,
    params: MlpParams,
    adam: AdamState,
    rng: ChaCha8Rng,
    data: Prepared,
    train_idx: Vec<usize>,
    val_idx: Vec<usize>,
    scaling: InputScaling,
    input_range: (f64, f64),
    problem: String,
    history: Vec<EpochRecord>,
    best: Option<(usize, f64, MlpParams)>,
    stale: usize,
    done: bool,
}

impl Trainer {
    pub fn new(dataset: &Dataset, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        if dataset.len() < 2 {
            return Err(Error::Validation(format!(
                "dataset needs at least 2 pairs for a train/validation split, got {}",
                dataset.len()
            )));
        }
        if dataset.x.len() != dataset.t.len() {
            return Err(Error::DimensionMismatch {
                expected: dataset.x.len(),
                actual: dataset.t.len(),
            });
        }
        let spec = BasisSpec::new(config.order, dataset.domain);
        let ops = BasisOperators::new(spec, config.potential)?;
        let objective = Objective::new(&ops, &config)?;

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut order: Vec<usize> = (0..dataset.len()).collect();
        order.shuffle(&mut rng);
        let n_val = ((config.val_fraction * dataset.len() as f64).round() as usize).clamp(1, dataset.len() - 1);
        let val_idx = order[..n_val].to_vec();
        let train_idx = order[n_val..].to_vec();

        let train_x: Vec<f64> = train_idx.iter().map(|&i| dataset.x[i]).collect();
        let scaling = InputScaling::fit(&train_x);
        let input_range = train_x
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        let n = spec.size();
        let mut phi = Array2::zeros((dataset.len(), n));
        let mut offset = Vec::with_capacity(dataset.len());
        let mut row = vec![0.0; n];
        for (i, &t) in dataset.t.iter().enumerate() {
            let xi = spec.domain.to_canonical(t)?;
            basis_values_into(xi, &mut row);
            phi.row_mut(i).assign(&ndarray::ArrayView1::from(&row));
            offset.push(match config.normalization {
                Normalization::Analytic => 0.0,
                Normalization::Trapezoid => chebyshev_weight(xi).ln() + spec.domain.jacobian().ln(),
            });
        }
        let x = Array2::from_shape_fn((dataset.len(), 1), |(i, _)| scaling.apply(dataset.x[i]));
        let params = MlpParams::init(1, &config.hidden, 2 * n, config.seed.wrapping_add(1));
        let adam = AdamState::new(&params);
        Ok(Self {
            spec,
            objective,
            adam,
            params,
            rng,
            data: Prepared { x, phi, offset },
            train_idx,
            val_idx,
            scaling,
            input_range,
            problem: dataset.problem.clone(),
            history: Vec::new(),
            best: None,
            stale: 0,
            done: false,
            config,
        })
    }

    pub fn history(&self) -> &[EpochRecord] {
        &self.history
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    /// Mean `dμ`-NLL over `idx` in batches of `batch_val`.
    fn mean_nll(&self, idx: &[usize]) -> Result<f64> {
        let mut total = 0.0;
        for chunk in idx.chunks(self.config.batch_val) {
            let x = self.data.x.select(Axis(0), chunk);
            let phi = self.data.phi.select(Axis(0), chunk);
            let z = self.params.forward(x.view())?;
            let c = self.objective.project(z.view());
            let nll = self.objective.sample_nll(&c, &phi);
            total += nll.sum() + chunk.iter().map(|&i| self.data.offset[i]).sum::<f64>();
        }
        Ok(total / idx.len() as f64)
    }

    /// Runs one epoch; `None` once training has finished.
    pub fn run_epoch(&mut self) -> Result<Option<EpochRecord>> {
        if self.done {
            return Ok(None);
        }
        let epoch = self.history.len() + 1;
        let mut order = self.train_idx.clone();
        order.shuffle(&mut self.rng);
        let (mut loss_sum, mut nll_sum) = (0.0, 0.0);
        for (batch, chunk) in order.chunks(self.config.batch_train).enumerate() {
            let x = self.data.x.select(Axis(0), chunk);
            let phi = self.data.phi.select(Axis(0), chunk);
            let cache = self.params.forward_cached(x.view())?;
            let (parts, dz) = self.objective.loss_and_grad(cache.output.view(), &phi);
            if !parts.total.is_finite() {
                self.done = true;
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch,
                    detail: format!("loss parts {parts:?}"),
                });
            }
            let grads = self.params.backward(&cache, dz);
            adam_step(&mut self.params, &grads, &mut self.adam, self.config.learning_rate);
            if !self.params.is_finite() {
                self.done = true;
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch,
                    detail: "parameters became non-finite".into(),
                });
            }
            let k = chunk.len() as f64;
            loss_sum += parts.total * k;
            nll_sum += parts.nll * k + chunk.iter().map(|&i| self.data.offset[i]).sum::<f64>();
        }
        let n_train = order.len() as f64;
        let val_nll = self.mean_nll(&self.val_idx)?;
        if !val_nll.is_finite() {
            self.done = true;
            return Err(Error::NonFiniteLoss {
                epoch,
                batch: 0,
                detail: "validation NLL is not finite".into(),
            });
        }
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / n_train,
            train_nll: nll_sum / n_train,
            val_nll,
        };
        self.history.push(record);
        match &self.best {
            Some((_, best, _)) if val_nll >= *best => self.stale += 1,
            _ => {
                self.best = Some((epoch, val_nll, self.params.clone()));
                self.stale = 0;
            }
        }
        if epoch >= self.config.epochs || self.stale >= self.config.patience {
            self.done = true;
        }
        Ok(Some(record))
    }

    /// Checkpoint holding the best-validation parameters seen so far.
    pub fn checkpoint(&self) -> Checkpoint {
        let (best_epoch, params) = match &self.best {
            Some((e, _, p)) => (*e, p.clone()),
            None => (0, self.params.clone()),
        };
        Checkpoint {
            version: CHECKPOINT_VERSION,
            problem: self.problem.clone(),
            config: self.config.clone(),
            basis: self.spec,
            input_scaling: self.scaling,
            input_range: self.input_range,
            params,
            optimizer: Some(self.adam.clone()),
            history: self.history.clone(),
            best_epoch,
        }
    }

    /// Runs to completion.
    pub fn run(mut self) -> Result<Checkpoint> {
        while self.run_epoch()?.is_some() {}
        Ok(self.checkpoint())
    }
}

/// Trains on `dataset` and returns the best-validation checkpoint.
pub fn train(dataset: &Dataset, config: TrainConfig) -> Result<Checkpoint> {
    Trainer::new(dataset, config)?.run()
}
