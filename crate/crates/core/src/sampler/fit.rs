//! Fitting the stochastic volatility posterior end to end.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::chains::{sample_chains, sample_rwmh_chains, ChainOutput, RwmhConfig};
use super::diagnostics::{diagnostics, Diagnostics};
use super::draws::{ChainDraws, PosteriorDraws};
use super::{HmcConfig, SamplerError};
use crate::data_io::{TimeSeries, ISO_DATE};
use crate::model::{
    self, constrain, unconstrain, LatentPaths, ModelConfig, StaticParams, SvPosterior, ALPHA, KAPPA_ALPHA,
    KAPPA_SIGMA, MU, N_STATIC, PHI, SIGMA, SIGMA_LAMBDA, STATIC_NAMES,
};

/// Column names of a stored draw row.
pub fn draw_names(t: usize) -> Vec<String> {
    let mut names: Vec<String> = STATIC_NAMES.iter().map(|s| s.to_string()).collect();
    names.extend((0..=t).map(|i| format!("h_{i}")));
    names.extend((1..=t).map(|i| format!("lambda_{i}")));
    names
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 over the model and sampler settings.
pub fn config_hash(model: &ModelConfig, hmc: &HmcConfig) -> String {
    hex(&Sha256::digest(format!("{model:?}\n{hmc:?}").as_bytes()))
}

/// SHA-256 over the canonical `date,value` text of the series.
pub fn data_hash(y: &TimeSeries) -> String {
    let mut h = Sha256::new();
    for (d, v) in y.dates().iter().zip(y.values()) {
        h.update(format!("{},{}\n", d.format(ISO_DATE), v).as_bytes());
    }
    hex(&h.finalize())
}

/// Dispersed starting points scaled to the data.
///
/// The static priors are too vague to initialize from directly, so the
/// log-variance level is centred on `ln(mean y²)` and every other
/// coordinate is drawn from a bounded range around typical values.
pub fn default_init(y: &[f64], config: &ModelConfig) -> impl Fn(usize, &mut ChaCha8Rng) -> Vec<f64> + Sync {
    let t = y.len();
    let ms = y.iter().map(|v| v * v).sum::<f64>() / t.max(1) as f64;
    let level = if ms > 0.0 { ms.ln() } else { config.mu_mean };
    let mode = config.skew_mode;
    move |_, rng| {
        let mut x = vec![0.0; model::dim(t)];
        x[MU] = level + rng.random_range(-1.0..1.0);
        x[PHI] = rng.random_range(0.5f64..0.95).atanh();
        x[SIGMA] = rng.random_range(0.1f64..0.6).ln();
        x[ALPHA] = if mode.alpha_free() { rng.random_range(-0.5..0.5) } else { 0.0 };
        x[SIGMA_LAMBDA] = if mode.sigma_lambda_free() { rng.random_range(-0.3..0.3) } else { 0.0 };
        x[KAPPA_ALPHA] = rng.random_range(-1.0..1.0);
        x[KAPPA_SIGMA] = rng.random_range(-1.0..1.0);
        for v in &mut x[N_STATIC..] {
            *v = rng.random_range(-1.0..1.0);
        }
        x
    }
}

fn store_constrained(t: usize, mode: model::SkewMode) -> impl Fn(&[f64], &mut Vec<f64>) + Sync {
    move |x, row| {
        debug_assert_eq!(x.len(), model::dim(t));
        let (s, p) = constrain(x, mode).expect("dimension checked");
        row.extend_from_slice(&s.as_array());
        row.extend_from_slice(&p.h);
        row.extend_from_slice(&p.lambda);
    }
}

fn assemble(outputs: Vec<ChainOutput>, t: usize, thin: usize, config_hash: String, data_hash: String) -> PosteriorDraws {
    let chains = outputs
        .into_iter()
        .map(|o| ChainDraws {
            chain_id: o.chain_id,
            rows: o.rows,
            values: o.draws,
            accept_rate: o.mean_accept,
            divergences: o.divergences,
            step_size: o.step_size,
        })
        .collect();
    PosteriorDraws { names: draw_names(t), n_obs: t, thin, chains, config_hash, data_hash }
}

fn summarize(draws: &PosteriorDraws) -> Result<Diagnostics, SamplerError> {
    match diagnostics(draws) {
        Err(SamplerError::InsufficientDraws { .. }) => {
            log::warn!("too few draws for convergence diagnostics");
            Ok(Diagnostics { params: Vec::new(), mean_accept: draws.mean_accept(), divergence_count: draws.divergences() })
        }
        other => other,
    }
}

/// Fits the posterior with `hmc.n_chains` HMC chains from dispersed starts.
pub fn run_chains(
    y: &TimeSeries,
    model: &ModelConfig,
    hmc: &HmcConfig,
) -> Result<(PosteriorDraws, Diagnostics), SamplerError> {
    run_chains_with_init(y, model, hmc, None)
}

/// As [`run_chains`], with chain 0 started at `warm` (unconstrained) when
/// given.
pub fn run_chains_with_init(
    y: &TimeSeries,
    model: &ModelConfig,
    hmc: &HmcConfig,
    warm: Option<Vec<f64>>,
) -> Result<(PosteriorDraws, Diagnostics), SamplerError> {
    hmc.validate()?;
    let target = SvPosterior::new(y.values(), model.clone())?;
    let t = y.len();
    if let Some(w) = &warm {
        if w.len() != target.dim() {
            return Err(SamplerError::Config(format!("warm start has {} coordinates, expected {}", w.len(), target.dim())));
        }
    }
    let dispersed = default_init(y.values(), model);
    let init = |chain: usize, rng: &mut ChaCha8Rng| match (&warm, chain) {
        (Some(w), 0) => w.clone(),
        _ => dispersed(chain, rng),
    };
    let outputs = sample_chains(&target, hmc, init, store_constrained(t, model.skew_mode))?;
    let draws = assemble(outputs, t, hmc.thin, config_hash(model, hmc), data_hash(y));
    let diag = summarize(&draws)?;
    Ok((draws, diag))
}

/// Random-walk Metropolis fit of the same posterior, used as a baseline.
pub fn run_rwmh(y: &TimeSeries, model: &ModelConfig, config: &RwmhConfig) -> Result<PosteriorDraws, SamplerError> {
    let target = SvPosterior::new(y.values(), model.clone())?;
    let t = y.len();
    let outputs = sample_rwmh_chains(&target, config, default_init(y.values(), model), store_constrained(t, model.skew_mode))?;
    let hash = hex(&Sha256::digest(format!("{model:?}\n{config:?}").as_bytes()));
    Ok(assemble(outputs, t, config.thin, hash, data_hash(y)))
}

/// Unconstrained point built from posterior means, extended to `t_new`
/// observations by carrying the last latent values forward.
///
/// `σ_λ` enters as its mean absolute value since its sign is not
/// identified.
pub fn warm_start(draws: &PosteriorDraws, t_new: usize) -> Result<Vec<f64>, SamplerError> {
    if draws.is_empty() {
        return Err(SamplerError::Config("warm start from empty draws".into()));
    }
    let means = draws.means();
    let t = draws.n_obs;
    if t_new < t {
        return Err(SamplerError::Config(format!("cannot shrink a warm start from {t} to {t_new} observations")));
    }
    let abs_sl = {
        let v = draws.pooled(SIGMA_LAMBDA);
        v.iter().map(|x| x.abs()).sum::<f64>() / v.len() as f64
    };
    let mut s = StaticParams::from_slice(&means[..N_STATIC]);
    s.sigma_lambda = abs_sl;
    s.kappa_alpha = s.kappa_alpha.max(f64::MIN_POSITIVE);
    s.kappa_sigma = s.kappa_sigma.max(f64::MIN_POSITIVE);
    let mut h = means[N_STATIC..N_STATIC + t + 1].to_vec();
    let mut lambda = means[N_STATIC + t + 1..].to_vec();
    let last_h = *h.last().expect("h has T+1 entries");
    let last_l = lambda.last().copied().unwrap_or(s.alpha_0);
    h.resize(t_new + 1, last_h);
    lambda.resize(t_new, last_l);
    Ok(unconstrain(&s, &LatentPaths { h, lambda })?)
}
