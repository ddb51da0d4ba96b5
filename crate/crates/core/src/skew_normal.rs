//! Skew-normal distribution kernel.
//!
//! The standard density is `2 φ(z) Φ(λz)`; location `ξ` and scale `ω` enter
//! through `x = ξ + ω z`. Everything here is a pure function of its inputs.

use std::f64::consts::{FRAC_2_PI, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::special::{inv_mills, log_norm_cdf, log_phi};

/// Supremum of `|γ|` over all shapes, approached as `|λ| → ∞`.
pub const SKEWNESS_BOUND: f64 = 0.995_271_9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SkewNormalError {
    #[error("skew-normal scale must be positive and finite, got {0}")]
    Scale(f64),
    #[error("skew-normal {name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
}

/// Location / scale / shape triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewNormalParams {
    xi: f64,
    omega: f64,
    lambda: f64,
}

impl SkewNormalParams {
    pub fn new(xi: f64, omega: f64, lambda: f64) -> Result<Self, SkewNormalError> {
        if !xi.is_finite() {
            return Err(SkewNormalError::NonFinite { name: "location", value: xi });
        }
        if !lambda.is_finite() {
            return Err(SkewNormalError::NonFinite { name: "shape", value: lambda });
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(SkewNormalError::Scale(omega));
        }
        Ok(Self { xi, omega, lambda })
    }

    /// Unit-scale, zero-location member with shape `lambda`.
    pub fn standard(lambda: f64) -> Result<Self, SkewNormalError> {
        Self::new(0.0, 1.0, lambda)
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Mean, variance and standardized third moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewNormalMoments {
    pub mean: f64,
    pub variance: f64,
    pub skewness_gamma: f64,
}

/// `λ / √(1 + λ²)`.
#[inline]
pub fn delta(lambda: f64) -> f64 {
    if lambda.abs() > 1e150 {
        return lambda.signum();
    }
    lambda / (1.0 + lambda * lambda).sqrt()
}

/// `ln(2 φ(z) Φ(λz))`.
#[inline]
pub fn log_pdf_standard(z: f64, lambda: f64) -> f64 {
    std::f64::consts::LN_2 + log_phi(z) + log_norm_cdf(lambda * z)
}

/// Log density at `x` under `params`.
pub fn log_pdf(x: f64, params: &SkewNormalParams) -> f64 {
    let z = (x - params.xi) / params.omega;
    log_pdf_standard(z, params.lambda) - params.omega.ln()
}

/// Partial derivatives of [`log_pdf_standard`] with respect to `z` and `λ`.
#[inline]
pub fn grad_log_pdf_standard(z: f64, lambda: f64) -> (f64, f64) {
    let r = inv_mills(lambda * z);
    (-z + lambda * r, z * r)
}

/// One draw from `SN(0, 1, λ)` through the half-normal convolution
/// `δ|U₀| + √(1-δ²) U₁`.
pub fn sample<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> f64 {
    let u0: f64 = rng.sample(StandardNormal);
    let u1: f64 = rng.sample(StandardNormal);
    if lambda == 0.0 {
        return u1;
    }
    let d = delta(lambda);
    d * u0.abs() + (1.0 - d * d).sqrt() * u1
}

/// Skewness index as a function of the shape alone.
pub fn skewness_gamma(lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let d = delta(lambda);
    let m = d * FRAC_2_PI.sqrt();
    let v = 1.0 - m * m;
    0.5 * (4.0 - PI) * m * m * m / (v * v.sqrt())
}

pub fn moments(params: &SkewNormalParams) -> SkewNormalMoments {
    let d = delta(params.lambda);
    let m = d * FRAC_2_PI.sqrt();
    SkewNormalMoments {
        mean: params.xi + params.omega * m,
        variance: params.omega * params.omega * (1.0 - m * m),
        skewness_gamma: skewness_gamma(params.lambda),
    }
}
