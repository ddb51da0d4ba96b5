//! Shared fixtures for the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use skewsv::model::{simulate, unconstrain, SvPosterior};
use skewsv::{ModelConfig, StaticParams};

/// Posterior for a simulated series of length `t` and its true
/// unconstrained point.
pub fn posterior_fixture(t: usize) -> (SvPosterior, Vec<f64>) {
    let truth = StaticParams {
        mu_h: 3.88,
        phi_h: 0.96,
        sigma_h: 0.42,
        alpha_0: -0.06,
        sigma_lambda: 0.17,
        kappa_alpha: 1.0,
        kappa_sigma: 1.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (y, paths) = simulate(&truth, t, &mut rng).expect("valid parameters");
    let x = unconstrain(&truth, &paths).expect("valid parameters");
    (SvPosterior::new(y.values(), ModelConfig::bonds()).expect("finite data"), x)
}
