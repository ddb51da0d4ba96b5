//! Multi-chain drivers. Each chain owns a ChaCha stream derived from the
//! seed and its index, so results do not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::adapt::{find_reasonable_step_size, DualAveraging, RunningVariance};
use super::hmc::{hmc_step, ChainState, HmcParams};
use super::rwmh::{rwmh_step, RwmhState};
use super::{HmcConfig, LogDensity, MassDiag, SamplerError};

const INIT_ATTEMPTS: usize = 100;

/// Deterministic per-chain generator.
pub fn chain_rng(seed: u64, chain: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain as u64);
    rng
}

/// Retained draws and statistics of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    pub chain_id: usize,
    /// Row-major, `rows × width`.
    pub draws: Vec<f64>,
    pub width: usize,
    pub rows: usize,
    /// Mean Metropolis acceptance probability after warmup.
    pub mean_accept: f64,
    pub divergences: usize,
    pub warmup_divergences: usize,
    pub step_size: f64,
    pub inv_mass: Vec<f64>,
    /// Last unconstrained position.
    pub final_position: Vec<f64>,
}

impl ChainOutput {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.draws[i * self.width..(i + 1) * self.width]
    }
}

fn initial_state<T, I>(target: &T, init: &I, chain: usize, rng: &mut ChaCha8Rng) -> Result<ChainState, SamplerError>
where
    T: LogDensity + ?Sized,
    I: Fn(usize, &mut ChaCha8Rng) -> Vec<f64>,
{
    for _ in 0..INIT_ATTEMPTS {
        let x = init(chain, rng);
        if x.len() != target.dim() {
            return Err(SamplerError::Config(format!(
                "initial point has {} coordinates, target has {}",
                x.len(),
                target.dim()
            )));
        }
        let state = ChainState::new(target, x);
        if state.is_finite() {
            return Ok(state);
        }
    }
    Err(SamplerError::Initialization(chain))
}

fn base_inv_mass<T: LogDensity + ?Sized>(target: &T, config: &HmcConfig) -> Result<Vec<f64>, SamplerError> {
    let dim = target.dim();
    let mut inv = match &config.mass_diag {
        MassDiag::Adapted | MassDiag::Unit => vec![1.0; dim],
        MassDiag::Fixed(m) if m.len() == dim => m.iter().map(|v| 1.0 / v).collect(),
        MassDiag::Fixed(m) => {
            return Err(SamplerError::Config(format!("mass diagonal has {} entries, target has {dim}", m.len())))
        }
    };
    for (i, v) in inv.iter_mut().enumerate() {
        if target.is_frozen(i) {
            *v = 0.0;
        }
    }
    Ok(inv)
}

/// Runs one HMC chain: warmup with adaptation, then sampling.
///
/// Warmup: the first half adapts the step size only; the second half up to
/// 85% also accumulates position variances, after which the diagonal mass
/// is set and the step size is re-adapted for the remainder.
fn run_hmc_chain<T, I, S>(
    target: &T,
    config: &HmcConfig,
    chain: usize,
    init: &I,
    store: &S,
) -> Result<ChainOutput, SamplerError>
where
    T: LogDensity + ?Sized,
    I: Fn(usize, &mut ChaCha8Rng) -> Vec<f64>,
    S: Fn(&[f64], &mut Vec<f64>),
{
    let mut rng = chain_rng(config.seed, chain);
    let mut state = initial_state(target, init, chain, &mut rng)?;
    let mut inv_mass = base_inv_mass(target, config)?;
    let adapt_mass = config.mass_diag == MassDiag::Adapted;
    let (lo, hi) = config.step_range();
    let warmup = config.n_burnin;
    let collect_from = warmup / 2;
    let mass_switch = (warmup * 17) / 20;
    let do_mass = adapt_mass && mass_switch > collect_from + 10;

    let mut step = find_reasonable_step_size(&state, &inv_mass, config.initial_step_size, target, &mut rng);
    let mut da = DualAveraging::new(step, config.target_accept);
    let mut variance = RunningVariance::new(target.dim());
    let mut warmup_divergences = 0;

    let mut draws = Vec::new();
    let mut row = Vec::new();
    let mut width = 0;
    let mut rows = 0;
    let mut accept_sum = 0.0;
    let mut divergences = 0;

    for iter in 0..config.n_iter {
        let n_steps = if lo == hi { lo } else { rng.random_range(lo..=hi) };
        let params = HmcParams { step_size: step, n_steps, inv_mass: inv_mass.clone() };
        let tr = hmc_step(&mut state, &params, target, &mut rng);
        if iter < warmup {
            warmup_divergences += tr.divergent as usize;
            step = da.update(tr.accept_prob);
            if do_mass && iter >= collect_from && iter < mass_switch {
                variance.push(&state.position);
            }
            if do_mass && iter + 1 == mass_switch {
                for (i, (m, v)) in inv_mass.iter_mut().zip(variance.regularized()).enumerate() {
                    *m = if target.is_frozen(i) { 0.0 } else { v };
                }
                step = find_reasonable_step_size(&state, &inv_mass, step, target, &mut rng);
                da = DualAveraging::new(step, config.target_accept);
            }
            if iter + 1 == warmup {
                step = da.final_step();
            }
        } else {
            accept_sum += tr.accept_prob;
            divergences += tr.divergent as usize;
            if (iter - warmup) % config.thin == 0 {
                row.clear();
                store(&state.position, &mut row);
                width = row.len();
                draws.extend_from_slice(&row);
                rows += 1;
            }
        }
    }

    let sampled = config.n_iter - warmup;
    if divergences == sampled {
        return Err(SamplerError::AllDivergent {
            chain,
            dump: format!(
                "step_size = {step}\nwarmup_divergences = {warmup_divergences}\nsampling_divergences = {divergences}\nlast_logp = {}",
                state.logp
            ),
        });
    }
    Ok(ChainOutput {
        chain_id: chain,
        draws,
        width,
        rows,
        mean_accept: accept_sum / sampled as f64,
        divergences,
        warmup_divergences,
        step_size: step,
        inv_mass,
        final_position: state.position,
    })
}

/// Runs `config.n_chains` HMC chains in parallel.
///
/// `init(chain, rng)` proposes unconstrained starting points (retried until
/// finite); `store(position, row)` appends the representation kept for each
/// retained draw.
pub fn sample_chains<T, I, S>(target: &T, config: &HmcConfig, init: I, store: S) -> Result<Vec<ChainOutput>, SamplerError>
where
    T: LogDensity + ?Sized,
    I: Fn(usize, &mut ChaCha8Rng) -> Vec<f64> + Sync,
    S: Fn(&[f64], &mut Vec<f64>) + Sync,
{
    config.validate()?;
    (0..config.n_chains)
        .into_par_iter()
        .map(|chain| run_hmc_chain(target, config, chain, &init, &store))
        .collect()
}

/// Random-walk Metropolis schedule.
///
/// During burn-in the per-coordinate scales are re-estimated from the
/// chain's own history (`2.38/√d` times the running standard deviation)
/// and a global factor is tuned toward 23.4% acceptance.
#[derive(Debug, Clone, PartialEq)]
pub struct RwmhConfig {
    pub n_iter: usize,
    pub n_burnin: usize,
    pub thin: usize,
    pub n_chains: usize,
    pub seed: u64,
    pub initial_sd: f64,
}

fn run_rwmh_chain<T, I, S>(
    target: &T,
    config: &RwmhConfig,
    chain: usize,
    init: &I,
    store: &S,
) -> Result<ChainOutput, SamplerError>
where
    T: LogDensity + ?Sized,
    I: Fn(usize, &mut ChaCha8Rng) -> Vec<f64>,
    S: Fn(&[f64], &mut Vec<f64>),
{
    let mut rng = chain_rng(config.seed, chain);
    let hmc_like = initial_state(target, init, chain, &mut rng)?;
    let mut state = RwmhState { position: hmc_like.position, logp: hmc_like.logp };
    let dim = target.dim();
    let free = (0..dim).filter(|&i| !target.is_frozen(i)).count().max(1);
    let frozen: Vec<bool> = (0..dim).map(|i| target.is_frozen(i)).collect();
    let base_scale = 2.38 / (free as f64).sqrt();
    let mut shape: Vec<f64> = frozen.iter().map(|&f| if f { 0.0 } else { config.initial_sd }).collect();
    let mut log_factor = 0.0f64;
    let mut variance = RunningVariance::new(dim);

    let mut draws = Vec::new();
    let mut row = Vec::new();
    let (mut width, mut rows) = (0, 0);
    let mut accepted = 0usize;
    for iter in 0..config.n_iter {
        let factor = log_factor.exp();
        let sd: Vec<f64> = shape.iter().map(|s| s * factor).collect();
        let acc = rwmh_step(&mut state, &sd, target, &mut rng);
        if iter < config.n_burnin {
            // Robbins–Monro on the global scale
            let gain = 1.0 / ((iter + 1) as f64).powf(0.6);
            log_factor += gain * ((acc as u8 as f64) - 0.234);
            variance.push(&state.position);
            if iter >= 200 && iter % 100 == 0 {
                let var = variance.regularized();
                for i in 0..dim {
                    shape[i] = if frozen[i] { 0.0 } else { base_scale * var[i].sqrt() };
                }
                log_factor = 0.0;
            }
        } else {
            accepted += acc as usize;
            if (iter - config.n_burnin) % config.thin == 0 {
                row.clear();
                store(&state.position, &mut row);
                width = row.len();
                draws.extend_from_slice(&row);
                rows += 1;
            }
        }
    }
    let sampled = (config.n_iter - config.n_burnin).max(1);
    Ok(ChainOutput {
        chain_id: chain,
        draws,
        width,
        rows,
        mean_accept: accepted as f64 / sampled as f64,
        divergences: 0,
        warmup_divergences: 0,
        step_size: log_factor.exp(),
        inv_mass: shape,
        final_position: state.position,
    })
}

/// Runs `config.n_chains` random-walk Metropolis chains.
pub fn sample_rwmh_chains<T, I, S>(target: &T, config: &RwmhConfig, init: I, store: S) -> Result<Vec<ChainOutput>, SamplerError>
where
    T: LogDensity + ?Sized,
    I: Fn(usize, &mut ChaCha8Rng) -> Vec<f64> + Sync,
    S: Fn(&[f64], &mut Vec<f64>) + Sync,
{
    if config.n_burnin >= config.n_iter || config.thin == 0 || config.n_chains == 0 || !(config.initial_sd > 0.0) {
        return Err(SamplerError::Config(format!("invalid random-walk schedule {config:?}")));
    }
    (0..config.n_chains)
        .into_par_iter()
        .map(|chain| run_rwmh_chain(target, config, chain, &init, &store))
        .collect()
}

/// Uniform(-2, 2) jitter in every coordinate.
#[cfg(test)]
pub(crate) fn uniform_init(dim: usize) -> impl Fn(usize, &mut ChaCha8Rng) -> Vec<f64> + Sync {
    move |_, rng| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect()
}
