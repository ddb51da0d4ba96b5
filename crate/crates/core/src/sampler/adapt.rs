//! Warmup machinery: dual-averaging step size and diagonal mass estimation.

use rand::Rng;

use super::hmc::{hmc_step, ChainState, HmcParams};
use super::LogDensity;

/// Nesterov dual averaging of `log ε` toward a target acceptance rate.
#[derive(Debug, Clone)]
pub struct DualAveraging {
    target: f64,
    mu: f64,
    gamma: f64,
    t0: f64,
    kappa: f64,
    iteration: f64,
    h_bar: f64,
    log_step: f64,
    log_step_bar: f64,
}

impl DualAveraging {
    pub fn new(initial_step: f64, target: f64) -> Self {
        Self {
            target,
            mu: (10.0 * initial_step).ln(),
            gamma: 0.05,
            t0: 10.0,
            kappa: 0.75,
            iteration: 0.0,
            h_bar: 0.0,
            log_step: initial_step.ln(),
            log_step_bar: 0.0,
        }
    }

    /// Folds in one acceptance statistic and returns the next step size.
    pub fn update(&mut self, accept_prob: f64) -> f64 {
        self.iteration += 1.0;
        let t = self.iteration;
        let eta = 1.0 / (t + self.t0);
        self.h_bar = (1.0 - eta) * self.h_bar + eta * (self.target - accept_prob);
        self.log_step = self.mu - t.sqrt() / self.gamma * self.h_bar;
        let w = t.powf(-self.kappa);
        self.log_step_bar = w * self.log_step + (1.0 - w) * self.log_step_bar;
        self.log_step.exp()
    }

    pub fn current(&self) -> f64 {
        self.log_step.exp()
    }

    /// Averaged step size to freeze after warmup.
    pub fn final_step(&self) -> f64 {
        if self.iteration == 0.0 {
            self.current()
        } else {
            self.log_step_bar.exp()
        }
    }
}

/// Welford accumulator for per-coordinate variances.
#[derive(Debug, Clone)]
pub struct RunningVariance {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningVariance {
    pub fn new(dim: usize) -> Self {
        Self { count: 0, mean: vec![0.0; dim], m2: vec![0.0; dim] }
    }

    pub fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = v - *m;
            *m += d / n;
            *s += d * (v - *m);
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Sample variances shrunk toward `1e-3` as in common HMC warmup.
    pub fn regularized(&self) -> Vec<f64> {
        let n = self.count as f64;
        self.m2
            .iter()
            .map(|s| {
                let var = if self.count > 1 { s / (n - 1.0) } else { 1.0 };
                (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0))
            })
            .collect()
    }
}

/// Doubles or halves `step` until a single leapfrog step crosses 50%
/// acceptance.
pub fn find_reasonable_step_size<T, R>(state: &ChainState, inv_mass: &[f64], step: f64, target: &T, rng: &mut R) -> f64
where
    T: LogDensity + ?Sized,
    R: Rng + ?Sized,
{
    let mut step = step;
    let probe = |eps: f64, rng: &mut R| {
        let mut s = state.clone();
        let params = HmcParams { step_size: eps, n_steps: 1, inv_mass: inv_mass.to_vec() };
        hmc_step(&mut s, &params, target, rng).accept_prob
    };
    let first = probe(step, rng);
    let direction = if first > 0.5 { 1.0 } else { -1.0 };
    for _ in 0..50 {
        let next = step * 2f64.powf(direction);
        let a = probe(next, rng);
        if (direction > 0.0 && a < 0.5) || (direction < 0.0 && a > 0.5) {
            return if direction > 0.0 { step } else { next };
        }
        step = next;
    }
    step
}
