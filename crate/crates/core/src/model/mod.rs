//! The dynamic-skewness stochastic volatility model.
//!
//! Observations follow `y_t = exp(h_t/2) z_t` with `z_t ~ SN(λ_t)`, the
//! log-variance `h_t` is a stationary AR(1) and the shape `λ_t` is a random
//! walk started at `α₀`. Double-exponential priors on `α₀` and `σ_λ` with
//! gamma-distributed rates shrink the shape toward static or zero skew.

mod config;
mod params;
mod posterior;
mod simulate;

use thiserror::Error;

pub use config::{ModelConfig, SkewMode};
pub use params::{
    constrain, dim, h_offset, lambda_offset, series_len, unconstrain, LatentPaths, StaticParams, ALPHA,
    KAPPA_ALPHA, KAPPA_SIGMA, MU, N_STATIC, PHI, SIGMA, SIGMA_LAMBDA, STATIC_NAMES,
};
pub use posterior::{log_posterior, log_posterior_grad, SvPosterior, Term};
pub use simulate::{simulate, simulation_start};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid model configuration: {0}")]
    Config(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: expected {expected:?}, got {got}")]
    Dimension { expected: Option<usize>, got: usize },
    #[error("log posterior is not finite: {0}")]
    NonFinite(Term),
}
