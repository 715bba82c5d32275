//! Coefficient network: a GELU MLP mapping inputs to projected complex
//! spectral coefficients, trained by exact likelihood with Adam.

mod adam;
mod checkpoint;
mod config;
mod mlp;
mod objective;
mod train;

pub use adam::{adam_step, AdamState, ADAM_EPS, BETA1, BETA2};
pub use checkpoint::{
    forward_to_coefficients, load_checkpoint, save_checkpoint, Checkpoint, InputScaling, Model,
    ObservableRow,
    CHECKPOINT_VERSION,
};
pub use config::{CoefficientPenalty, Normalization, OperatorPenalty, PenaltyObservable, TrainConfig};
pub use mlp::{gelu, gelu_derivative, mlp_forward, Dense, ForwardCache, MlpParams};
pub use objective::{nll_loss, LossParts, Objective, Projected, NLL_EPS};
pub use train::{train, EpochRecord, Trainer};

use ndarray::Array2;

/// Total loss of a batch for the given parameters.
pub fn total_loss(objective: &Objective, params: &MlpParams, x: &Array2<f64>, phi: &Array2<f64>) -> crate::Result<LossParts> {
    let z = params.forward(x.view())?;
    Ok(objective.loss(z.view(), phi))
}

/// Loss and parameter gradients of a batch.
pub fn backward(
    objective: &Objective,
    params: &MlpParams,
    x: &Array2<f64>,
    phi: &Array2<f64>,
) -> crate::Result<(LossParts, MlpParams)> {
    let cache = params.forward_cached(x.view())?;
    let (parts, dz) = objective.loss_and_grad(cache.output.view(), phi);
    Ok((parts, params.backward(&cache, dz)))
}

#[cfg(test)]
mod tests;
