//! Self-check suites run by `skewsv check`: gradient against finite
//! differences, density quadrature, Monte Carlo moments and known-target
//! sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::model::{self, ModelConfig, SkewMode, SvPosterior, N_STATIC};
use crate::sampler::{sample_chains, sample_rwmh_chains, HmcConfig, RwmhConfig, StandardNormalTarget};
use crate::skew_normal::{self, SkewNormalParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckLevel {
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:<10} {} {}", self.name, if self.passed { "PASS" } else { "FAIL" }, self.detail)
    }
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Random evaluation point with statics in a typical range and standard
/// normal innovations.
pub fn random_point(t: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut x = vec![0.0; model::dim(t)];
    x[model::MU] = rng.random_range(-2.0..2.0);
    x[model::PHI] = rng.random_range(0.0..2.5);
    x[model::SIGMA] = rng.random_range(-2.0..0.0);
    x[model::ALPHA] = rng.random_range(-1.5..1.5);
    x[model::SIGMA_LAMBDA] = rng.random_range(-1.0..1.0);
    x[model::KAPPA_ALPHA] = rng.random_range(-1.0..1.0);
    x[model::KAPPA_SIGMA] = rng.random_range(-1.0..1.0);
    for v in &mut x[N_STATIC..] {
        *v = rng.sample(StandardNormal);
    }
    x
}

/// Largest violation of `|g - fd| ≤ abs + rel·max(|g|, |fd|)` with central
/// differences of step `h`, reported as a ratio to the allowed error.
pub fn gradient_error(post: &SvPosterior, x: &[f64], h: f64, rel: f64, abs: f64) -> f64 {
    let g = post.log_posterior_grad(x).expect("finite point");
    let mut xp = x.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        if post.is_frozen(i) {
            continue;
        }
        xp[i] = x[i] + h;
        let up = post.log_posterior(&xp).expect("finite point");
        xp[i] = x[i] - h;
        let down = post.log_posterior(&xp).expect("finite point");
        xp[i] = x[i];
        let fd = (up - down) / (2.0 * h);
        let allowed = abs + rel * g[i].abs().max(fd.abs());
        worst = worst.max((g[i] - fd).abs() / allowed);
    }
    worst
}

fn gradient_suite(level: CheckLevel) -> SuiteResult {
    let points = if level == CheckLevel::Full { 100 } else { 10 };
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst: f64 = 0.0;
    for t in [5, 50] {
        let y: Vec<f64> = (0..t).map(|_| skew_normal::sample(0.7, &mut rng) * 0.8).collect();
        for mode in [SkewMode::Dynamic, SkewMode::Static, SkewMode::None] {
            let post = SvPosterior::new(&y, ModelConfig::bonds().with_skew_mode(mode)).expect("finite data");
            for _ in 0..points {
                let x = random_point(t, &mut rng);
                worst = worst.max(gradient_error(&post, &x, 1e-5, 1e-5, 1e-7));
            }
        }
    }
    SuiteResult { name: "gradient", passed: worst <= 1.0, detail: format!("worst error / tolerance = {worst:.3}") }
}

fn quadrature_suite() -> SuiteResult {
    let mut worst: f64 = 0.0;
    for lambda in [-5.0, -1.0, 0.0, 1.0, 5.0] {
        let p = SkewNormalParams::standard(lambda).expect("valid");
        let mass = simpson(|z| skew_normal::log_pdf(z, &p).exp(), -40.0, 40.0, 80_000);
        worst = worst.max((mass - 1.0).abs());
    }
    let p = SkewNormalParams::standard(1.0).expect("valid");
    let pdf = |z: f64| skew_normal::log_pdf(z, &p).exp();
    let m1 = simpson(|z| z * pdf(z), -40.0, 40.0, 80_000);
    let c2 = simpson(|z| (z - m1).powi(2) * pdf(z), -40.0, 40.0, 80_000);
    let c3 = simpson(|z| (z - m1).powi(3) * pdf(z), -40.0, 40.0, 80_000);
    let gamma_err = (c3 / c2.powf(1.5) - skew_normal::skewness_gamma(1.0)).abs();
    SuiteResult {
        name: "quadrature",
        passed: worst < 1e-8 && gamma_err < 1e-3,
        detail: format!("max |mass - 1| = {worst:.2e}, |gamma(1) error| = {gamma_err:.2e}"),
    }
}

fn moments_suite(level: CheckLevel) -> SuiteResult {
    let n = if level == CheckLevel::Full { 10_000_000 } else { 200_000 };
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut worst: f64 = 0.0;
    for lambda in [-3.0, 0.0, 1.0, 5.0] {
        let m = skew_normal::moments(&SkewNormalParams::standard(lambda).expect("valid"));
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let z = skew_normal::sample(lambda, &mut rng);
            s1 += z;
            s2 += z * z;
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        let se_mean = (m.variance / n as f64).sqrt();
        worst = worst.max((mean - m.mean).abs() / se_mean);
        // Var(s²) ≈ (μ₄ - σ⁴)/n ≤ 3σ⁴/n since skew-normal kurtosis stays below 3.87
        let se_var = (3.0 * m.variance * m.variance / n as f64).sqrt();
        worst = worst.max((var - m.variance).abs() / se_var);
    }
    SuiteResult { name: "moments", passed: worst < 4.0, detail: format!("{n} draws, worst deviation = {worst:.2} SE") }
}

fn sampler_suite() -> SuiteResult {
    let retained = 5000;
    let target = StandardNormalTarget::new(10);
    let cfg = HmcConfig { n_iter: 2 * retained, n_burnin: retained, leapfrog_steps: 16, n_chains: 1, seed: 22, ..HmcConfig::default() };
    let init = |_: usize, rng: &mut ChaCha8Rng| (0..10).map(|_| rng.random_range(-2.0..2.0)).collect();
    let store = |x: &[f64], row: &mut Vec<f64>| row.extend_from_slice(x);
    let out = match sample_chains(&target, &cfg, init, store) {
        Ok(o) => o,
        Err(e) => return SuiteResult { name: "sampler", passed: false, detail: e.to_string() },
    };
    let c = &out[0];
    let (mut mean_err, mut var_err): (f64, f64) = (0.0, 0.0);
    for j in 0..10 {
        let col: Vec<f64> = (0..c.rows).map(|i| c.row(i)[j]).collect();
        let m = col.iter().sum::<f64>() / col.len() as f64;
        let v = col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (col.len() - 1) as f64;
        mean_err = mean_err.max(m.abs());
        var_err = var_err.max((v - 1.0).abs());
    }
    let hmc_ok = mean_err < 0.05 && var_err < 0.1;

    let rw = RwmhConfig { n_iter: 60_000, n_burnin: 10_000, thin: 1, n_chains: 1, seed: 23, initial_sd: 2.4 };
    let target1 = StandardNormalTarget::new(1);
    let init1 = |_: usize, rng: &mut ChaCha8Rng| vec![rng.random_range(-2.0..2.0)];
    let rw_out = sample_rwmh_chains(&target1, &rw, init1, store).expect("valid schedule");
    let xs = &rw_out[0].draws;
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    let rw_ok = m.abs() < 0.05 && (v - 1.0).abs() < 0.1;
    SuiteResult {
        name: "sampler",
        passed: hmc_ok && rw_ok,
        detail: format!(
            "HMC 10-d: max |mean| = {mean_err:.3}, max |var - 1| = {var_err:.3}; RWMH 1-d: mean = {m:.3}, var = {v:.3}"
        ),
    }
}

/// Runs every suite in a fixed order.
pub fn run_suites(level: CheckLevel) -> Vec<SuiteResult> {
    vec![gradient_suite(level), quadrature_suite(), moments_suite(level), sampler_suite()]
}
