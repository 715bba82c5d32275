//! Chebyshev polynomials of the first kind and the orthonormal basis built
//! from them under the weight `w(ξ) = (1 - ξ²)^{-1/2}`.

use std::f64::consts::{FRAC_1_PI, PI};

use serde::{Deserialize, Serialize};

use super::OutputDomain;
use crate::error::{Error, Result};

/// Inputs within this distance of `±1` are clamped onto the interval.
pub const ENDPOINT_CLAMP: f64 = 1e-12;

/// Truncation order and output domain of a Chebyshev expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSpec {
    pub order: usize,
    pub domain: OutputDomain,
}

impl BasisSpec {
    pub fn new(order: usize, domain: OutputDomain) -> Self {
        Self { order, domain }
    }

    /// Number of basis functions, `K + 1`.
    pub fn size(&self) -> usize {
        self.order + 1
    }

    /// `φ_k(ξ)` with the index checked against the truncation order.
    pub fn phi(&self, k: usize, xi: f64) -> Result<f64> {
        if k > self.order {
            return Err(Error::Index {
                index: k,
                order: self.order,
            });
        }
        Ok(basis_phi(k, xi))
    }
}

#[inline]
fn clamp_canonical(xi: f64) -> f64 {
    if xi > 1.0 && xi - 1.0 <= ENDPOINT_CLAMP {
        1.0
    } else if xi < -1.0 && -1.0 - xi <= ENDPOINT_CLAMP {
        -1.0
    } else {
        xi
    }
}

/// Normalization constant `κ_k`: `π^{-1/2}` for `k = 0`, `(2/π)^{1/2}` otherwise.
#[inline]
pub fn kappa(k: usize) -> f64 {
    if k == 0 {
        FRAC_1_PI.sqrt()
    } else {
        (2.0 / PI).sqrt()
    }
}

/// `T_k(ξ)` by the three-term recurrence.
pub fn chebyshev_t(k: usize, xi: f64) -> f64 {
    let xi = clamp_canonical(xi);
    match k {
        0 => 1.0,
        1 => xi,
        _ => {
            let (mut prev, mut cur) = (1.0, xi);
            for _ in 1..k {
                let next = 2.0 * xi * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// `U_k(ξ)`, Chebyshev polynomial of the second kind.
pub fn chebyshev_u(k: usize, xi: f64) -> f64 {
    let xi = clamp_canonical(xi);
    match k {
        0 => 1.0,
        1 => 2.0 * xi,
        _ => {
            let (mut prev, mut cur) = (1.0, 2.0 * xi);
            for _ in 1..k {
                let next = 2.0 * xi * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// `T_k'(ξ) = k U_{k-1}(ξ)`, with the closed-form limit at the endpoints.
pub fn chebyshev_t_derivative(k: usize, xi: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let xi = clamp_canonical(xi);
    let kf = k as f64;
    if (1.0 - xi).abs() <= ENDPOINT_CLAMP {
        kf * kf
    } else if (1.0 + xi).abs() <= ENDPOINT_CLAMP {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sign * kf * kf
    } else {
        kf * chebyshev_u(k - 1, xi)
    }
}

/// Orthonormal basis function `φ_k(ξ) = κ_k T_k(ξ)`.
#[inline]
pub fn basis_phi(k: usize, xi: f64) -> f64 {
    kappa(k) * chebyshev_t(k, xi)
}

/// Fills `out[k] = φ_k(ξ)` for `k = 0..out.len()` in one recurrence pass.
pub fn basis_values_into(xi: f64, out: &mut [f64]) {
    let xi = clamp_canonical(xi);
    let n = out.len();
    if n == 0 {
        return;
    }
    let (mut prev, mut cur) = (1.0, xi);
    out[0] = kappa(0);
    if n > 1 {
        out[1] = kappa(1) * xi;
    }
    for slot in out.iter_mut().skip(2) {
        let next = 2.0 * xi * cur - prev;
        prev = cur;
        cur = next;
        *slot = kappa(1) * cur;
    }
}

pub fn basis_values(xi: f64, size: usize) -> Vec<f64> {
    let mut out = vec![0.0; size];
    basis_values_into(xi, &mut out);
    out
}

/// Fills `out[k] = dφ_k/dξ`.
pub fn basis_derivatives_into(xi: f64, out: &mut [f64]) {
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = kappa(k) * chebyshev_t_derivative(k, xi);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_values() {
        assert_eq!(chebyshev_t(0, 0.37), 1.0);
        assert_eq!(chebyshev_t(1, 0.5), 0.5);
        let oracle = (2.0 * 0.5f64.acos()).cos();
        assert!((chebyshev_t(2, 0.5) - oracle).abs() < 1e-15);
        assert!((chebyshev_t(2, 0.5) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn recurrence_agrees_with_cosine_form() {
        for k in 0..=64 {
            for i in 0..1000 {
                let xi = -1.0 + 2.0 * i as f64 / 999.0;
                let oracle = (k as f64 * xi.acos()).cos();
                assert!(
                    (chebyshev_t(k, xi) - oracle).abs() < 1e-10,
                    "k={k} xi={xi}"
                );
            }
        }
    }

    #[test]
    fn phi_constants() {
        assert!((basis_phi(0, 0.3) - 0.564_189_583_547_756_3).abs() < 1e-12);
        assert!((basis_phi(1, 1.0) - 0.797_884_560_802_865_4).abs() < 1e-12);
    }

    #[test]
    fn phi_index_checked() {
        let spec = BasisSpec::new(3, OutputDomain::new(-1.0, 1.0).unwrap());
        assert!(spec.phi(3, 0.1).is_ok());
        assert!(matches!(spec.phi(4, 0.1), Err(Error::Index { index: 4, order: 3 })));
    }

    #[test]
    fn clamps_rounding_overshoot() {
        assert_eq!(chebyshev_t(3, 1.0 + 1e-13), 1.0);
        assert_eq!(chebyshev_t(3, -1.0 - 1e-13), -1.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for k in 0..12 {
            for &xi in &[-0.9, -0.31, 0.0, 0.42, 0.88] {
                let h = 1e-6;
                let fd = (chebyshev_t(k, xi + h) - chebyshev_t(k, xi - h)) / (2.0 * h);
                let d = chebyshev_t_derivative(k, xi);
                assert!((d - fd).abs() < 1e-6 * (1.0 + d.abs()), "k={k} xi={xi}");
            }
        }
    }

    #[test]
    fn derivative_endpoint_limits() {
        for k in 1..10 {
            let kf = (k * k) as f64;
            assert_eq!(chebyshev_t_derivative(k, 1.0), kf);
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            assert_eq!(chebyshev_t_derivative(k, -1.0), sign * kf);
            // the recurrence lands on the same value just inside the interval
            let inside = k as f64 * chebyshev_u(k - 1, 1.0 - 1e-9);
            assert!((inside - kf).abs() < 1e-5 * kf);
        }
    }

    #[test]
    fn batch_values_match_single() {
        let mut out = vec![0.0; 9];
        basis_values_into(-0.73, &mut out);
        for (k, v) in out.iter().enumerate() {
            assert!((v - basis_phi(k, -0.73)).abs() < 1e-15);
        }
    }
}
