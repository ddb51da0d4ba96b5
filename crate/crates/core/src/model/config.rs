use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Which skewness coordinates are free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SkewMode {
    /// Random-walk shape with free origin `α₀` and free `σ_λ`.
    #[default]
    Dynamic,
    /// `σ_λ ≡ 0`; constant shape `α₀`.
    Static,
    /// `σ_λ ≡ 0` and `α₀ ≡ 0`; Gaussian observation errors.
    None,
}

impl SkewMode {
    pub fn alpha_free(self) -> bool {
        self != SkewMode::None
    }

    pub fn sigma_lambda_free(self) -> bool {
        self == SkewMode::Dynamic
    }
}

impl fmt::Display for SkewMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SkewMode::Dynamic => "dynamic",
            SkewMode::Static => "static",
            SkewMode::None => "none",
        })
    }
}

impl FromStr for SkewMode {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dynamic" => Ok(SkewMode::Dynamic),
            "static" => Ok(SkewMode::Static),
            "none" => Ok(SkewMode::None),
            other => Err(ModelError::Config(format!("unknown skew mode {other:?}"))),
        }
    }
}

/// Prior hyperparameters plus the skewness variant.
///
/// `sigma2_shape`/`sigma2_scale` parameterize an inverse-gamma prior on
/// `σ_h²`. The gamma hyperpriors on the shrinkage rates use shape/rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub mu_mean: f64,
    pub mu_sd: f64,
    pub phi_mean: f64,
    pub phi_sd: f64,
    pub sigma2_shape: f64,
    pub sigma2_scale: f64,
    pub kappa_sigma_shape: f64,
    pub kappa_sigma_rate: f64,
    pub kappa_alpha_shape: f64,
    pub kappa_alpha_rate: f64,
    pub skew_mode: SkewMode,
}

impl ModelConfig {
    /// Priors used for the bond-yield applications.
    pub fn bonds() -> Self {
        Self {
            mu_mean: 4.0,
            mu_sd: 10.0,
            phi_mean: 0.95,
            phi_sd: 0.5,
            sigma2_shape: 0.1,
            sigma2_scale: 0.1,
            kappa_sigma_shape: 0.1,
            kappa_sigma_rate: 0.1,
            kappa_alpha_shape: 0.1,
            kappa_alpha_rate: 0.1,
            skew_mode: SkewMode::Dynamic,
        }
    }

    /// Priors used for the currency carry application.
    pub fn fx() -> Self {
        Self { sigma2_shape: 2.0, sigma2_scale: 2.0, ..Self::bonds() }
    }

    pub fn profile(name: &str) -> Result<Self, ModelError> {
        match name {
            "bonds" => Ok(Self::bonds()),
            "fx" => Ok(Self::fx()),
            other => Err(ModelError::Config(format!("unknown profile {other:?} (expected bonds or fx)"))),
        }
    }

    pub fn with_skew_mode(mut self, mode: SkewMode) -> Self {
        self.skew_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("mu_sd", self.mu_sd),
            ("phi_sd", self.phi_sd),
            ("sigma2_shape", self.sigma2_shape),
            ("sigma2_scale", self.sigma2_scale),
            ("kappa_sigma_shape", self.kappa_sigma_shape),
            ("kappa_sigma_rate", self.kappa_sigma_rate),
            ("kappa_alpha_shape", self.kappa_alpha_shape),
            ("kappa_alpha_rate", self.kappa_alpha_rate),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("mu_mean", self.mu_mean), ("phi_mean", self.phi_mean)] {
            if !v.is_finite() {
                return Err(ModelError::Config(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self::bonds()
    }
}
