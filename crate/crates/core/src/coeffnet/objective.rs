//! Training objective on a batch of raw outputs: projection, likelihood,
//! quadratic penalties and the gradient with respect to the raw outputs.

use ndarray::{s, Array1, Array2, ArrayView2, Axis};

use crate::amplitude::{synthesize_psi, CoefficientVector};
use crate::error::Result;
use crate::spectral_basis::{
    exceedance_matrix, gram_matrix, interval_indicator_matrix, observable_matrix, uniform_y_rule,
    BasisOperators,
};

use super::config::{CoefficientPenalty, Normalization, PenaltyObservable, TrainConfig};

/// Stabilizer inside the likelihood logarithm.
pub const NLL_EPS: f64 = 1e-12;

/// `-mean log(|ψ(ξ_i)|² + η)` for normalized coefficients.
pub fn nll_loss(coeffs: &[CoefficientVector], xi: &[f64]) -> f64 {
    let total: f64 = coeffs
        .iter()
        .zip(xi)
        .map(|(c, &x)| {
            let m = synthesize_psi(c, &[x]).modulus_sq()[0];
            -(m + NLL_EPS).ln()
        })
        .sum();
    total / coeffs.len() as f64
}

/// Batch means of the loss parts.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossParts {
    pub total: f64,
    pub nll: f64,
    pub penalty: f64,
}

/// Everything the loss needs besides the network.
#[derive(Debug, Clone)]
pub struct Objective {
    pub normalization: Normalization,
    /// `Q` in `c = z / √(zᴴ Q z + ε)`.
    pub normalizer: Array2<f64>,
    /// Sum of all `λ F` quadratic penalties on `c`.
    pub penalty: Array2<f64>,
    /// `λ` applied to `‖z‖²`, zero when the penalty acts on `c`.
    pub raw_l2: f64,
    pub real_only: bool,
    pub eps: f64,
    size: usize,
}

/// Coefficients of a batch: real and imaginary parts and the scale `s`.
pub struct Projected {
    pub re: Array2<f64>,
    pub im: Array2<f64>,
    pub scale: Array1<f64>,
}

fn row_dot(a: &Array2<f64>, b: &Array2<f64>) -> Array1<f64> {
    (a * b).sum_axis(Axis(1))
}

impl Objective {
    pub fn new(ops: &BasisOperators, config: &TrainConfig) -> Result<Self> {
        let spec = &ops.spec;
        let n = spec.size();
        let normalizer = match config.normalization {
            Normalization::Analytic => ops.gram.clone(),
            Normalization::Trapezoid => {
                gram_matrix(spec, &uniform_y_rule(config.trapezoid_nodes, &spec.domain)?)
            }
        };
        let mut penalty = Array2::<f64>::zeros((n, n));
        penalty.scaled_add(config.lambda_kin, &ops.stiffness);
        penalty.scaled_add(config.lambda_pot, &ops.potential);
        for p in &config.operator_penalties {
            let f = match p.observable {
                PenaltyObservable::Moment { power } => {
                    observable_matrix(|y| y.powi(power as i32), spec, &ops.mu_rule)
                }
                PenaltyObservable::Exceedance { threshold } => exceedance_matrix(spec, threshold)?,
                PenaltyObservable::Interval { lo, hi } => interval_indicator_matrix(spec, lo, hi)?,
            };
            penalty.scaled_add(p.weight, &f);
        }
        let raw_l2 = match config.coeff_penalty {
            CoefficientPenalty::Raw => config.l2_coeff,
            CoefficientPenalty::Projected => {
                penalty.scaled_add(config.l2_coeff, &Array2::eye(n));
                0.0
            }
        };
        Ok(Self {
            normalization: config.normalization,
            normalizer,
            penalty,
            raw_l2,
            real_only: config.real_only,
            eps: config.projection_eps,
            size: n,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn split(&self, z: ArrayView2<f64>) -> (Array2<f64>, Array2<f64>) {
        let n = self.size;
        let re = z.slice(s![.., ..n]).to_owned();
        let im = if self.real_only {
            Array2::zeros(re.raw_dim())
        } else {
            z.slice(s![.., n..2 * n]).to_owned()
        };
        (re, im)
    }

    /// `c = z / √(zᴴ Q z + ε)` row by row.
    pub fn project(&self, z: ArrayView2<f64>) -> Projected {
        let (zr, zi) = self.split(z);
        let q = row_dot(&zr, &zr.dot(&self.normalizer)) + row_dot(&zi, &zi.dot(&self.normalizer));
        let scale = q.mapv(|v| (v + self.eps).sqrt());
        let inv = scale.mapv(|s| 1.0 / s).insert_axis(Axis(1));
        Projected {
            re: &zr * &inv,
            im: &zi * &inv,
            scale,
        }
    }

    /// Per-sample likelihood terms `-log(|ψ|² + η)` for basis rows `phi`.
    pub fn sample_nll(&self, c: &Projected, phi: &Array2<f64>) -> Array1<f64> {
        let pr = row_dot(phi, &c.re);
        let pi = row_dot(phi, &c.im);
        ndarray::Zip::from(&pr)
            .and(&pi)
            .map_collect(|&a, &b| -(a * a + b * b + NLL_EPS).ln())
    }

    /// Loss parts for raw outputs `z` (`B × 2(K+1)`) and target basis rows
    /// `phi` (`B × (K+1)`).
    pub fn loss(&self, z: ArrayView2<f64>, phi: &Array2<f64>) -> LossParts {
        self.evaluate(z, phi, false).0
    }

    /// Loss parts and `∂L/∂z`.
    pub fn loss_and_grad(&self, z: ArrayView2<f64>, phi: &Array2<f64>) -> (LossParts, Array2<f64>) {
        let (parts, grad) = self.evaluate(z, phi, true);
        (parts, grad.expect("requested"))
    }

    fn evaluate(&self, z: ArrayView2<f64>, phi: &Array2<f64>, want_grad: bool) -> (LossParts, Option<Array2<f64>>) {
        let b = z.nrows() as f64;
        let n = self.size;
        let c = self.project(z);
        let pr = row_dot(phi, &c.re);
        let pi = row_dot(phi, &c.im);
        let m = &pr * &pr + &pi * &pi;
        let nll = m.mapv(|v| -(v + NLL_EPS).ln()).sum() / b;
        let ar = c.re.dot(&self.penalty);
        let ai = c.im.dot(&self.penalty);
        let quad = (row_dot(&c.re, &ar) + row_dot(&c.im, &ai)).sum() / b;
        let raw = if self.raw_l2 > 0.0 {
            self.raw_l2 * z.slice(s![.., ..if self.real_only { n } else { 2 * n }]).mapv(|v| v * v).sum() / b
        } else {
            0.0
        };
        let parts = LossParts {
            total: nll + quad + raw,
            nll,
            penalty: quad + raw,
        };
        if !want_grad {
            return (parts, None);
        }

        // ∂L/∂c, per sample (the 1/B factor is applied at the end)
        let coef = (&m + NLL_EPS).mapv(|v| -2.0 / v).insert_axis(Axis(1));
        let gr = phi * &(&pr.clone().insert_axis(Axis(1)) * &coef) + &ar * 2.0;
        let gi = phi * &(&pi.clone().insert_axis(Axis(1)) * &coef) + &ai * 2.0;
        // through c = z / s: (g - Q c (cᵀ g)) / s
        let t = (row_dot(&c.re, &gr) + row_dot(&c.im, &gi)).insert_axis(Axis(1));
        let inv_s = c.scale.mapv(|s| 1.0 / (s * b)).insert_axis(Axis(1));
        let dzr = (&gr - &(c.re.dot(&self.normalizer) * &t)) * &inv_s;
        let dzi = (&gi - &(c.im.dot(&self.normalizer) * &t)) * &inv_s;

        let mut grad = Array2::zeros(z.raw_dim());
        grad.slice_mut(s![.., ..n]).assign(&dzr);
        if !self.real_only {
            grad.slice_mut(s![.., n..2 * n]).assign(&dzi);
        }
        if self.raw_l2 > 0.0 {
            let factor = 2.0 * self.raw_l2 / b;
            let width = if self.real_only { n } else { 2 * n };
            let mut g = grad.slice_mut(s![.., ..width]);
            g.scaled_add(factor, &z.slice(s![.., ..width]));
        }
        (parts, Some(grad))
    }
}
