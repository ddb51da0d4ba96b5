//! Random-walk Metropolis–Hastings baseline.

use rand::Rng;
use rand_distr::StandardNormal;

use super::LogDensity;

/// Metropolis–Hastings acceptance probability from log densities.
///
/// `min(1, f(prop) q(cur | prop) / (f(cur) q(prop | cur)))`; pass zero for
/// both proposal terms when the proposal is symmetric.
pub fn acceptance_ratio(log_f_prop: f64, log_f_cur: f64, log_q_reverse: f64, log_q_forward: f64) -> f64 {
    if log_f_prop.is_nan() || log_f_prop == f64::NEG_INFINITY {
        return 0.0;
    }
    let log_ratio = log_f_prop + log_q_reverse - log_f_cur - log_q_forward;
    if log_ratio >= 0.0 {
        1.0
    } else {
        log_ratio.exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RwmhState {
    pub position: Vec<f64>,
    pub logp: f64,
}

impl RwmhState {
    pub fn new<T: LogDensity + ?Sized>(target: &T, position: Vec<f64>) -> Self {
        let logp = target.log_density(&position);
        Self { position, logp }
    }
}

/// One Gaussian random-walk proposal with per-coordinate scales; a zero
/// scale holds that coordinate fixed. Returns whether the move was accepted.
pub fn rwmh_step<T, R>(state: &mut RwmhState, proposal_sd: &[f64], target: &T, rng: &mut R) -> bool
where
    T: LogDensity + ?Sized,
    R: Rng + ?Sized,
{
    let proposal: Vec<f64> = state
        .position
        .iter()
        .zip(proposal_sd)
        .map(|(&x, &sd)| {
            let z: f64 = rng.sample(StandardNormal);
            x + sd * z
        })
        .collect();
    let logp = target.log_density(&proposal);
    let acc = acceptance_ratio(logp, state.logp, 0.0, 0.0);
    let u: f64 = rng.random();
    if u < acc {
        state.position = proposal;
        state.logp = logp;
        true
    } else {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::StandardNormalTarget;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn acceptance_examples() {
        assert_eq!(acceptance_ratio(-1.3, -1.3, 0.0, 0.0), 1.0);
        let half = acceptance_ratio(-1.3 + 0.5f64.ln(), -1.3, 0.0, 0.0);
        assert!((half - 0.5).abs() < 1e-15);
        assert_eq!(acceptance_ratio(f64::NEG_INFINITY, -1.0, 0.0, 0.0), 0.0);
        // asymmetric proposal: reverse move twice as likely doubles the ratio
        let acc = acceptance_ratio(-2.0, -1.0, 2f64.ln(), 0.0);
        assert!((acc - 2.0 * (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn recovers_1d_standard_normal() {
        let target = StandardNormalTarget::new(1);
        let mut state = RwmhState::new(&target, vec![0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 100_000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n {
            rwmh_step(&mut state, &[2.4], &target, &mut rng);
            sum += state.position[0];
            sum2 += state.position[0] * state.position[0];
        }
        let mean = sum / n as f64;
        let var = sum2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.03, "{mean}");
        assert!((var - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn zero_scale_holds_coordinate() {
        let target = StandardNormalTarget::new(2);
        let mut state = RwmhState::new(&target, vec![0.4, 0.4]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            rwmh_step(&mut state, &[1.0, 0.0], &target, &mut rng);
        }
        assert_eq!(state.position[1], 0.4);
    }
}
