//! Dense GELU network on batches, with its reverse pass.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const INV_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// `u Φ(u)` with the exact normal CDF.
#[inline]
pub fn gelu(u: f64) -> f64 {
    0.5 * u * (1.0 + libm::erf(u * INV_SQRT_2))
}

/// `Φ(u) + u φ(u)`.
#[inline]
pub fn gelu_derivative(u: f64) -> f64 {
    0.5 * (1.0 + libm::erf(u * INV_SQRT_2)) + u * INV_SQRT_2PI * (-0.5 * u * u).exp()
}

/// One affine layer; `weight` is `outputs × inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DenseRecord", into = "DenseRecord")]
pub struct Dense {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DenseRecord {
    inputs: usize,
    outputs: usize,
    weight: Vec<f64>,
    bias: Vec<f64>,
}

impl From<Dense> for DenseRecord {
    fn from(d: Dense) -> Self {
        let (outputs, inputs) = d.weight.dim();
        Self {
            inputs,
            outputs,
            weight: d.weight.iter().copied().collect(),
            bias: d.bias.to_vec(),
        }
    }
}

impl TryFrom<DenseRecord> for Dense {
    type Error = Error;

    fn try_from(r: DenseRecord) -> Result<Self> {
        if r.bias.len() != r.outputs {
            return Err(Error::Malformed(format!(
                "layer bias has {} entries, expected {}",
                r.bias.len(),
                r.outputs
            )));
        }
        let weight = Array2::from_shape_vec((r.outputs, r.inputs), r.weight)
            .map_err(|e| Error::Malformed(format!("layer weight: {e}")))?;
        Ok(Self {
            weight,
            bias: Array1::from(r.bias),
        })
    }
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weight: Array2::zeros((outputs, inputs)),
            bias: Array1::zeros(outputs),
        }
    }
}

/// Parameters of `input → hidden… → output`, GELU after every hidden layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub layers: Vec<Dense>,
}

/// Activations kept for the reverse pass.
pub struct ForwardCache {
    /// Input followed by each hidden activation.
    pub activations: Vec<Array2<f64>>,
    /// Hidden pre-activations.
    pub pre: Vec<Array2<f64>>,
    pub output: Array2<f64>,
}

impl MlpParams {
    /// Uniform fan-in initialization: `±√(6/fan_in)` for hidden layers,
    /// `±√(3/fan_in)` for the output; zero biases.
    pub fn init(input_dim: usize, hidden: &[usize], output_dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dims = vec![input_dim];
        dims.extend_from_slice(hidden);
        dims.push(output_dim);
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(l, w)| {
                let gain = if l == last { 3.0 } else { 6.0 };
                let bound = (gain / w[0] as f64).sqrt();
                let dist = Uniform::new_inclusive(-bound, bound);
                Dense {
                    weight: Array2::from_shape_simple_fn((w[1], w[0]), || dist.sample(&mut rng)),
                    bias: Array1::zeros(w[1]),
                }
            })
            .collect();
        Self { layers }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|l| Dense::zeros(l.weight.ncols(), l.weight.nrows()))
                .collect(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weight.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].weight.nrows()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    /// Every tensor as a flat slice: weight, bias, weight, bias, …
    pub fn tensors(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| {
                [
                    l.weight.as_slice().expect("standard layout"),
                    l.bias.as_slice().expect("standard layout"),
                ]
            })
            .collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| {
                [
                    l.weight.as_slice_mut().expect("standard layout"),
                    l.bias.as_slice_mut().expect("standard layout"),
                ]
            })
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: x.ncols(),
            });
        }
        Ok(())
    }

    /// Batched forward pass; rows of `x` are samples.
    pub fn forward(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        let mut a = x.to_owned();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let mut h = a.dot(&layer.weight.t());
            h += &layer.bias;
            if l < last {
                h.mapv_inplace(gelu);
            }
            a = h;
        }
        Ok(a)
    }

    pub fn forward_cached(&self, x: ArrayView2<f64>) -> Result<ForwardCache> {
        self.check_input(&x)?;
        let mut activations = vec![x.to_owned()];
        let mut pre = Vec::with_capacity(self.layers.len() - 1);
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let mut h = activations[l].dot(&layer.weight.t());
            h += &layer.bias;
            if l < last {
                activations.push(h.mapv(gelu));
                pre.push(h);
            } else {
                return Ok(ForwardCache {
                    activations,
                    pre,
                    output: h,
                });
            }
        }
        unreachable!("network has at least one layer")
    }

    /// Parameter gradients given `∂L/∂output`.
    pub fn backward(&self, cache: &ForwardCache, d_output: Array2<f64>) -> MlpParams {
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut delta = d_output;
        for l in (0..self.layers.len()).rev() {
            let a_prev = &cache.activations[l];
            grads.push(Dense {
                // the product of two transposes may come back column-major
                weight: delta.t().dot(a_prev).as_standard_layout().into_owned(),
                bias: delta.sum_axis(Axis(0)),
            });
            if l > 0 {
                let mut d_prev = delta.dot(&self.layers[l].weight);
                d_prev.zip_mut_with(&cache.pre[l - 1], |d, &h| *d *= gelu_derivative(h));
                delta = d_prev;
            }
        }
        grads.reverse();
        MlpParams { layers: grads }
    }
}

/// Raw network output for one input.
pub fn mlp_forward(x: &[f64], params: &MlpParams) -> Result<Vec<f64>> {
    let view = ArrayView2::from_shape((1, x.len()), x).expect("one row");
    Ok(params.forward(view)?.into_raw_vec_and_offset().0)
}
