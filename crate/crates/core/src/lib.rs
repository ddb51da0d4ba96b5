//! Stochastic volatility with dynamic skew-normal asymmetry.
//!
//! Observations `y_t = exp(h_t/2) z_t` have skew-normal errors whose shape
//! `λ_t` follows a random walk. Double-exponential shrinkage priors on the
//! shape origin and its innovation scale let the data choose between
//! dynamic, static and no skewness. Estimation is by Hamiltonian Monte
//! Carlo on a non-centered parameterization.

pub mod check;
pub mod data_io;
pub mod evaluation;
pub mod model;
pub mod sampler;
pub mod skew_normal;
pub mod special;
pub mod summaries;

pub use data_io::{DataError, TimeSeries};
pub use model::{LatentPaths, ModelConfig, ModelError, SkewMode, StaticParams, SvPosterior};
pub use sampler::{Diagnostics, HmcConfig, LogDensity, PosteriorDraws, SamplerError};
pub use skew_normal::{SkewNormalError, SkewNormalMoments, SkewNormalParams};
