//! Gradient-guided posterior simulation.
//!
//! Fixed-length (jittered) HMC with dual-averaging step size and a diagonal
//! mass matrix estimated during warmup, plus a random-walk Metropolis
//! baseline, multi-chain orchestration, convergence diagnostics and draw
//! persistence.

mod adapt;
mod chains;
mod diagnostics;
mod draws;
mod fit;
mod hmc;
mod leapfrog;
mod rwmh;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, SvPosterior};

pub use adapt::{find_reasonable_step_size, DualAveraging, RunningVariance};
pub use chains::{chain_rng, sample_chains, sample_rwmh_chains, ChainOutput, RwmhConfig};
pub use diagnostics::{diagnose, diagnostics, effective_sample_size, split_rhat, Diagnostics, ParamDiagnostic};
pub use draws::{ChainDraws, PosteriorDraws, DRAWS_FORMAT};
pub use fit::{config_hash, data_hash, default_init, draw_names, run_chains, run_chains_with_init, run_rwmh, warm_start};
pub use hmc::{hmc_step, ChainState, HmcParams, Transition, DIVERGENCE_THRESHOLD};
pub use leapfrog::{leapfrog, Divergence, PhasePoint};
pub use rwmh::{acceptance_ratio, rwmh_step, RwmhState};

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("invalid sampler configuration: {0}")]
    Config(String),
    #[error("could not find a finite initial point for chain {0}")]
    Initialization(usize),
    #[error("chain {chain}: every post-warmup transition diverged\n{dump}")]
    AllDivergent { chain: usize, dump: String },
    #[error("diagnostics need at least {min_chains} chains of {min_draws} draws, have {chains} x {draws}")]
    InsufficientDraws { min_chains: usize, min_draws: usize, chains: usize, draws: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("draw file error: {0}")]
    Format(String),
    #[error(transparent)]
    Data(#[from] crate::data_io::DataError),
}

/// Unnormalized log density with gradient.
pub trait LogDensity: Sync {
    fn dim(&self) -> usize;

    /// Writes the gradient into `grad` and returns the log density.
    /// Returns `-inf` outside the support.
    fn log_density_grad(&self, x: &[f64], grad: &mut [f64]) -> f64;

    fn log_density(&self, x: &[f64]) -> f64 {
        let mut g = vec![0.0; x.len()];
        self.log_density_grad(x, &mut g)
    }

    /// Coordinates that must not move.
    fn is_frozen(&self, _i: usize) -> bool {
        false
    }
}

impl LogDensity for SvPosterior {
    fn dim(&self) -> usize {
        SvPosterior::dim(self)
    }

    fn log_density_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.log_posterior_and_grad(x, grad).unwrap_or(f64::NEG_INFINITY)
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        self.log_posterior(x).unwrap_or(f64::NEG_INFINITY)
    }

    fn is_frozen(&self, i: usize) -> bool {
        SvPosterior::is_frozen(self, i)
    }
}

/// Independent standard normal in `dim` dimensions.
#[derive(Debug, Clone, Copy)]
pub struct StandardNormalTarget {
    dim: usize,
}

impl StandardNormalTarget {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl LogDensity for StandardNormalTarget {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let mut lp = 0.0;
        for (g, &v) in grad.iter_mut().zip(x) {
            *g = -v;
            lp -= 0.5 * v * v;
        }
        lp
    }
}

/// Diagonal metric choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MassDiag {
    /// Estimated from the second half of warmup.
    #[default]
    Adapted,
    /// Identity throughout.
    Unit,
    /// User-supplied diagonal of `M`.
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HmcConfig {
    pub n_iter: usize,
    pub n_burnin: usize,
    /// Nominal integrator length `L`.
    pub leapfrog_steps: usize,
    /// Draw the step count uniformly from `[0.8 L, 1.2 L]` each iteration.
    pub jitter_steps: bool,
    pub initial_step_size: f64,
    pub target_accept: f64,
    pub mass_diag: MassDiag,
    pub seed: u64,
    pub n_chains: usize,
    pub thin: usize,
}

impl Default for HmcConfig {
    fn default() -> Self {
        Self {
            n_iter: 30_000,
            n_burnin: 15_000,
            leapfrog_steps: 32,
            jitter_steps: true,
            initial_step_size: 0.1,
            target_accept: 0.8,
            mass_diag: MassDiag::Adapted,
            seed: 42,
            n_chains: 4,
            thin: 1,
        }
    }
}

impl HmcConfig {
    /// The 6000/3000 schedule used where the full schedule is too slow.
    pub fn reduced() -> Self {
        Self { n_iter: 6000, n_burnin: 3000, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        let fail = |m: String| Err(SamplerError::Config(m));
        if self.n_burnin >= self.n_iter {
            return fail(format!("n_burnin ({}) must be below n_iter ({})", self.n_burnin, self.n_iter));
        }
        if !(self.target_accept > 0.5 && self.target_accept < 0.99) {
            return fail(format!("target_accept {} outside (0.5, 0.99)", self.target_accept));
        }
        if !(self.initial_step_size.is_finite() && self.initial_step_size > 0.0) {
            return fail(format!("initial_step_size {} must be positive", self.initial_step_size));
        }
        if self.n_chains == 0 || self.thin == 0 {
            return fail("n_chains and thin must be at least 1".into());
        }
        if let MassDiag::Fixed(m) = &self.mass_diag {
            if m.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return fail("fixed mass diagonal must be positive".into());
            }
        }
        Ok(())
    }

    /// Retained draws per chain after burn-in and thinning.
    pub fn retained_per_chain(&self) -> usize {
        (self.n_iter - self.n_burnin).div_ceil(self.thin)
    }

    /// Integrator length range `[lo, hi]`.
    pub fn step_range(&self) -> (usize, usize) {
        let l = self.leapfrog_steps as f64;
        if self.jitter_steps && self.leapfrog_steps > 0 {
            (((0.8 * l).round() as usize).max(1), ((1.2 * l).round() as usize).max(1))
        } else {
            (self.leapfrog_steps, self.leapfrog_steps)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_schedule() {
        let c = HmcConfig::default();
        assert_eq!((c.n_iter, c.n_burnin, c.n_chains), (30_000, 15_000, 4));
        assert_eq!(c.target_accept, 0.8);
        assert!(c.validate().is_ok());
        assert_eq!(c.retained_per_chain(), 15_000);
        assert_eq!(HmcConfig { thin: 4, ..c.clone() }.retained_per_chain(), 3750);
        assert_eq!(c.step_range(), (26, 38));
    }

    #[test]
    fn invalid_configs() {
        let c = HmcConfig::default();
        assert!(HmcConfig { n_burnin: 30_000, ..c.clone() }.validate().is_err());
        assert!(HmcConfig { target_accept: 0.995, ..c.clone() }.validate().is_err());
        assert!(HmcConfig { target_accept: 0.5, ..c.clone() }.validate().is_err());
        assert!(HmcConfig { n_chains: 0, ..c.clone() }.validate().is_err());
        assert!(HmcConfig { mass_diag: MassDiag::Fixed(vec![1.0, -1.0]), ..c }.validate().is_err());
    }
}
