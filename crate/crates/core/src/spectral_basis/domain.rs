use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bounded output interval `[a, b]` together with its affine map onto the
/// canonical Chebyshev interval `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct OutputDomain {
    a: f64,
    b: f64,
}

impl OutputDomain {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Validation(format!(
                "domain bounds must be finite, got [{a}, {b}]"
            )));
        }
        if a >= b {
            return Err(Error::Validation(format!(
                "domain requires a < b, got [{a}, {b}]"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn lower(&self) -> f64 {
        self.a
    }

    pub fn upper(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    /// Constant derivative `dξ/dy = 2 / (b - a)` of the canonical map.
    pub fn jacobian(&self) -> f64 {
        2.0 / (self.b - self.a)
    }

    pub fn contains(&self, y: f64) -> bool {
        y >= self.a && y <= self.b
    }

    /// Maps `y ∈ [a, b]` to `ξ ∈ [-1, 1]`.
    pub fn to_canonical(&self, y: f64) -> Result<f64> {
        if !self.contains(y) {
            return Err(Error::Domain {
                value: y,
                lower: self.a,
                upper: self.b,
            });
        }
        Ok(self.to_canonical_unchecked(y))
    }

    #[inline]
    pub fn to_canonical_unchecked(&self, y: f64) -> f64 {
        2.0 * (y - self.a) / (self.b - self.a) - 1.0
    }

    /// Inverse of [`to_canonical`](Self::to_canonical).
    #[inline]
    pub fn from_canonical(&self, xi: f64) -> f64 {
        self.a + 0.5 * (xi + 1.0) * (self.b - self.a)
    }
}

impl TryFrom<[f64; 2]> for OutputDomain {
    type Error = Error;

    fn try_from(bounds: [f64; 2]) -> Result<Self> {
        Self::new(bounds[0], bounds[1])
    }
}

impl From<OutputDomain> for [f64; 2] {
    fn from(d: OutputDomain) -> Self {
        [d.a, d.b]
    }
}
