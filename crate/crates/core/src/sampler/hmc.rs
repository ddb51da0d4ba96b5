use rand::Rng;
use rand_distr::StandardNormal;

use super::leapfrog::{leapfrog, PhasePoint};
use super::LogDensity;

/// Energy error beyond which a transition counts as divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1000.0;

/// Current chain position with cached log density and gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub position: Vec<f64>,
    pub logp: f64,
    pub grad: Vec<f64>,
}

impl ChainState {
    pub fn new<T: LogDensity + ?Sized>(target: &T, position: Vec<f64>) -> Self {
        let mut grad = vec![0.0; position.len()];
        let logp = target.log_density_grad(&position, &mut grad);
        Self { position, logp, grad }
    }

    pub fn is_finite(&self) -> bool {
        self.logp.is_finite() && self.grad.iter().all(|g| g.is_finite())
    }
}

/// Integrator settings for one transition.
#[derive(Debug, Clone, PartialEq)]
pub struct HmcParams {
    pub step_size: f64,
    pub n_steps: usize,
    pub inv_mass: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub accepted: bool,
    /// `H(proposal) - H(current)`.
    pub energy_error: f64,
    pub accept_prob: f64,
    pub divergent: bool,
}

/// One Metropolis-corrected HMC transition; `state` is replaced on accept.
pub fn hmc_step<T, R>(state: &mut ChainState, params: &HmcParams, target: &T, rng: &mut R) -> Transition
where
    T: LogDensity + ?Sized,
    R: Rng + ?Sized,
{
    let momentum: Vec<f64> = params
        .inv_mass
        .iter()
        .map(|&m| {
            let z: f64 = rng.sample(StandardNormal);
            if m > 0.0 {
                z / m.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let mut point = PhasePoint {
        position: state.position.clone(),
        momentum,
        grad: state.grad.clone(),
        logp: state.logp,
    };
    let h0 = point.hamiltonian(&params.inv_mass);
    let mut grad_fn = |x: &[f64], g: &mut [f64]| target.log_density_grad(x, g);
    let integrated = leapfrog(&mut point, params.step_size, params.n_steps, &params.inv_mass, &mut grad_fn);
    let u: f64 = rng.random();
    if integrated.is_err() {
        return Transition { accepted: false, energy_error: f64::INFINITY, accept_prob: 0.0, divergent: true };
    }
    let energy_error = point.hamiltonian(&params.inv_mass) - h0;
    if !energy_error.is_finite() || energy_error > DIVERGENCE_THRESHOLD {
        return Transition { accepted: false, energy_error, accept_prob: 0.0, divergent: true };
    }
    let accept_prob = (-energy_error).exp().min(1.0);
    let accepted = u < accept_prob;
    if accepted {
        state.position = point.position;
        state.logp = point.logp;
        state.grad = point.grad;
    }
    Transition { accepted, energy_error, accept_prob, divergent: false }
}
