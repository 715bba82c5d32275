//! Complex wave amplitudes over the Chebyshev basis: synthesis, Born
//! normalization, densities under both measures and the interference split.
//!
//! Complex quantities are carried as paired real arrays.

use std::io::Write;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral_basis::{basis_values_into, Measure, OutputDomain, QuadratureRule};

/// Squared norms below this are rejected when a density is evaluated.
pub const DEGENERATE_NORM: f64 = 1e-30;

/// Default `ε` of the unit-sphere projection.
pub const PROJECTION_EPS: f64 = 1e-12;

/// Complex spectral coefficients `c ∈ ℂ^{K+1}` of one amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl CoefficientVector {
    pub fn new(re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::DimensionMismatch {
                expected: re.len(),
                actual: im.len(),
            });
        }
        if re.iter().chain(&im).any(|v| !v.is_finite()) {
            return Err(Error::Validation("coefficients must be finite".into()));
        }
        Ok(Self { re, im })
    }

    pub fn zeros(size: usize) -> Self {
        Self {
            re: vec![0.0; size],
            im: vec![0.0; size],
        }
    }

    pub fn real(re: Vec<f64>) -> Self {
        let im = vec![0.0; re.len()];
        Self { re, im }
    }

    /// Unit basis vector `e_k`.
    pub fn basis(size: usize, k: usize) -> Self {
        let mut c = Self::zeros(size);
        c.re[k] = 1.0;
        c
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    /// `∑ |c_k|²`.
    pub fn norm_sq(&self) -> f64 {
        self.re.iter().chain(&self.im).map(|v| v * v).sum()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(r, i)| r.hypot(*i))
            .collect()
    }

    pub fn phases(&self) -> Vec<f64> {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(r, i)| i.atan2(*r))
            .collect()
    }

    /// Multiplies by the complex scalar `re + i·im`.
    pub fn scale(&self, re: f64, im: f64) -> Self {
        let (r, i) = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(a, b)| (a * re - b * im, a * im + b * re))
            .unzip();
        Self { re: r, im: i }
    }

    /// Global phase rotation `e^{iφ} c`.
    pub fn rotate(&self, phase: f64) -> Self {
        self.scale(phase.cos(), phase.sin())
    }

    /// `Re(cᴴ A c)` for a real matrix `A`; for symmetric `A` this is the full value.
    pub fn quadratic_form(&self, a: &Array2<f64>) -> f64 {
        real_quadratic(a, &self.re) + real_quadratic(a, &self.im)
    }

    /// `Im(cᴴ A c) = reᵀ A im - imᵀ A re`, nonzero only for non-symmetric `A`.
    pub fn quadratic_form_imag(&self, a: &Array2<f64>) -> f64 {
        bilinear(a, &self.re, &self.im) - bilinear(a, &self.im, &self.re)
    }
}

fn bilinear(a: &Array2<f64>, u: &[f64], v: &[f64]) -> f64 {
    let n = u.len();
    let mut acc = 0.0;
    for j in 0..n {
        if u[j] == 0.0 {
            continue;
        }
        let row: f64 = (0..n).map(|k| a[[j, k]] * v[k]).sum();
        acc += u[j] * row;
    }
    acc
}

fn real_quadratic(a: &Array2<f64>, v: &[f64]) -> f64 {
    bilinear(a, v, v)
}

/// Values of `ψ` on a grid, as separate real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct Amplitude {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl Amplitude {
    pub fn modulus_sq(&self) -> Vec<f64> {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(r, i)| r * r + i * i)
            .collect()
    }
}

/// `ψ(ξ) = ∑_k c_k φ_k(ξ)` at every grid point.
pub fn synthesize_psi(c: &CoefficientVector, xi_grid: &[f64]) -> Amplitude {
    let mut phi = vec![0.0; c.len()];
    let mut re = Vec::with_capacity(xi_grid.len());
    let mut im = Vec::with_capacity(xi_grid.len());
    for &xi in xi_grid {
        basis_values_into(xi, &mut phi);
        re.push(phi.iter().zip(&c.re).map(|(p, v)| p * v).sum());
        im.push(phi.iter().zip(&c.im).map(|(p, v)| p * v).sum());
    }
    Amplitude { re, im }
}

/// Result of the unit-sphere projection.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub coefficients: CoefficientVector,
    /// `zᴴ G z` before projection.
    pub raw_norm_sq: f64,
    /// Set when `zᴴ G z` is below [`DEGENERATE_NORM`].
    pub degenerate: bool,
}

/// `c = z / √(zᴴ G z + ε)`.
pub fn normalize_coefficients(z: &CoefficientVector, gram: &Array2<f64>, eps: f64) -> Projection {
    let q = z.quadratic_form(gram);
    let s = (q + eps).sqrt();
    let coefficients = if s > 0.0 {
        z.scale(1.0 / s, 0.0)
    } else {
        CoefficientVector::zeros(z.len())
    };
    Projection {
        coefficients,
        raw_norm_sq: q,
        degenerate: q < DEGENERATE_NORM,
    }
}

/// A density sampled on a grid together with its quadrature weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityColumn {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
    pub measure: Measure,
    /// Grid points moved off an endpoint before evaluation.
    #[serde(default)]
    pub clipped: usize,
}

impl DensityColumn {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, weights: Vec<f64>, measure: Measure) -> Result<Self> {
        if grid.len() != values.len() || grid.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                actual: values.len().min(weights.len()),
            });
        }
        Ok(Self {
            grid,
            values,
            weights,
            measure,
            clipped: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `∑ p_i ω_i`.
    pub fn mass(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| p * w)
            .sum()
    }

    /// Same density with the grid relabelled (e.g. from `ξ` to `y`).
    pub fn with_grid(mut self, grid: Vec<f64>) -> Result<Self> {
        if grid.len() != self.values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.values.len(),
                actual: grid.len(),
            });
        }
        self.grid = grid;
        Ok(self)
    }

    /// Writes `grid,value,weight` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "grid,value,weight")?;
        for ((g, v), w) in self.grid.iter().zip(&self.values).zip(&self.weights) {
            writeln!(out, "{g:.16e},{v:.16e},{w:.16e}")?;
        }
        Ok(())
    }
}

fn checked_norm(c: &CoefficientVector, gram: Option<&Array2<f64>>) -> Result<f64> {
    let norm_sq = match gram {
        Some(g) => c.quadratic_form(g),
        None => c.norm_sq(),
    };
    if !(norm_sq >= DEGENERATE_NORM) {
        return Err(Error::DegenerateState {
            norm_sq,
            threshold: DEGENERATE_NORM,
        });
    }
    Ok(norm_sq)
}

/// Density with respect to `dμ`: `|ψ(ξ_i)|² / ‖c‖²` on the rule's nodes.
pub fn density_mu(c: &CoefficientVector, rule: &QuadratureRule) -> Result<DensityColumn> {
    if rule.measure != Measure::ChebyshevMu {
        return Err(Error::Validation("density_mu needs a Chebyshev-measure rule".into()));
    }
    let norm_sq = checked_norm(c, None)?;
    let values = synthesize_psi(c, &rule.nodes)
        .modulus_sq()
        .into_iter()
        .map(|v| v / norm_sq)
        .collect();
    DensityColumn::new(rule.nodes.clone(), values, rule.weights.clone(), Measure::ChebyshevMu)
}

/// `w(ξ) = (1 - ξ²)^{-1/2}`.
#[inline]
pub fn chebyshev_weight(xi: f64) -> f64 {
    1.0 / (1.0 - xi * xi).sqrt()
}

/// Density with respect to `dy`: `|ψ(f(y))|² w(f(y)) f' / ‖c‖²`.
///
/// Nodes sitting on an endpoint are moved inward by `1e-9 (b - a)`; the
/// number moved is recorded in [`DensityColumn::clipped`].
pub fn density_lebesgue(
    c: &CoefficientVector,
    rule: &QuadratureRule,
    domain: &OutputDomain,
) -> Result<DensityColumn> {
    if rule.measure != Measure::LebesgueY {
        return Err(Error::Validation("density_lebesgue needs a Lebesgue rule".into()));
    }
    let norm_sq = checked_norm(c, None)?;
    let delta = 1e-9 * domain.length();
    let mut clipped = 0;
    let mut grid = Vec::with_capacity(rule.len());
    for &y in &rule.nodes {
        if !domain.contains(y) {
            return Err(Error::Domain {
                value: y,
                lower: domain.lower(),
                upper: domain.upper(),
            });
        }
        let yc = y.clamp(domain.lower() + delta, domain.upper() - delta);
        if yc != y {
            clipped += 1;
        }
        grid.push(yc);
    }
    let xi: Vec<f64> = grid.iter().map(|&y| domain.to_canonical_unchecked(y)).collect();
    let jac = domain.jacobian();
    let values = synthesize_psi(c, &xi)
        .modulus_sq()
        .into_iter()
        .zip(&xi)
        .map(|(m, &x)| m * chebyshev_weight(x) * jac / norm_sq)
        .collect();
    let mut col = DensityColumn::new(grid, values, rule.weights.clone(), Measure::LebesgueY)?;
    col.clipped = clipped;
    Ok(col)
}

/// Splits `|ψ|²` into the diagonal part `∑|c_k|² φ_k²` and the interference
/// part `2 ∑_{j<k} |c_j||c_k| cos(θ_j - θ_k) φ_j φ_k`.
pub fn interference_decomposition(c: &CoefficientVector, xi_grid: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = c.len();
    let mags = c.magnitudes();
    let phases = c.phases();
    let mut phi = vec![0.0; n];
    let mut diagonal = Vec::with_capacity(xi_grid.len());
    let mut cross = Vec::with_capacity(xi_grid.len());
    for &xi in xi_grid {
        basis_values_into(xi, &mut phi);
        let d: f64 = (0..n).map(|k| (mags[k] * phi[k]).powi(2)).sum();
        let mut x = 0.0;
        for j in 0..n {
            for k in (j + 1)..n {
                x += mags[j] * mags[k] * (phases[j] - phases[k]).cos() * phi[j] * phi[k];
            }
        }
        diagonal.push(d);
        cross.push(2.0 * x);
    }
    (diagonal, cross)
}

/// `|∫|ψ|² dμ - ‖c‖²|` by the given Chebyshev-measure rule.
pub fn norm_quadrature_check(c: &CoefficientVector, rule: &QuadratureRule) -> Result<f64> {
    if rule.measure != Measure::ChebyshevMu {
        return Err(Error::Validation("norm check needs a Chebyshev-measure rule".into()));
    }
    let quad: f64 = synthesize_psi(c, &rule.nodes)
        .modulus_sq()
        .iter()
        .zip(&rule.weights)
        .map(|(m, w)| m * w)
        .sum();
    Ok((quad - c.norm_sq()).abs())
}
