//! Unnormalized log posterior on the unconstrained space and its gradient.

use statrs::function::gamma::ln_gamma;

use super::params::{
    self, constrain_statics, fill_paths, log_sech2, ALPHA, KAPPA_ALPHA, KAPPA_SIGMA, MU, N_STATIC, PHI, SIGMA,
    SIGMA_LAMBDA,
};
use super::{ModelConfig, ModelError};
use crate::skew_normal::{grad_log_pdf_standard, log_pdf_standard};
use crate::special::LN_SQRT_2PI;

/// Posterior of the skewed SV model for one observed series.
#[derive(Debug, Clone)]
pub struct SvPosterior {
    y: Vec<f64>,
    config: ModelConfig,
}

/// Which posterior term went non-finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    Prior(usize),
    Innovation(usize),
    Likelihood(usize),
}

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Term::Prior(i) => write!(f, "prior on {}", params::STATIC_NAMES[*i]),
            Term::Innovation(i) => write!(f, "innovation at coordinate {i}"),
            Term::Likelihood(t) => write!(f, "likelihood at observation {}", t + 1),
        }
    }
}

#[inline]
fn normal_lpdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * z * z - sd.ln() - LN_SQRT_2PI
}

#[inline]
fn subgradient_sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl SvPosterior {
    pub fn new(y: &[f64], config: ModelConfig) -> Result<Self, ModelError> {
        config.validate()?;
        if let Some(t) = y.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite(Term::Likelihood(t)));
        }
        Ok(Self { y: y.to_vec(), config })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn observations(&self) -> &[f64] {
        &self.y
    }

    pub fn dim(&self) -> usize {
        params::dim(self.y.len())
    }

    /// Whether coordinate `i` is pinned by the skew mode.
    pub fn is_frozen(&self, i: usize) -> bool {
        (i == ALPHA && !self.config.skew_mode.alpha_free())
            || (i == SIGMA_LAMBDA && !self.config.skew_mode.sigma_lambda_free())
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), ModelError> {
        if x.len() != self.dim() {
            return Err(ModelError::Dimension { expected: Some(self.dim()), got: x.len() });
        }
        Ok(())
    }

    pub fn log_posterior(&self, x: &[f64]) -> Result<f64, ModelError> {
        self.check_dim(x)?;
        self.evaluate(x, None)
    }

    pub fn log_posterior_grad(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        let mut grad = vec![0.0; x.len()];
        self.log_posterior_and_grad(x, &mut grad)?;
        Ok(grad)
    }

    /// Writes the gradient into `grad` and returns the log posterior.
    pub fn log_posterior_and_grad(&self, x: &[f64], grad: &mut [f64]) -> Result<f64, ModelError> {
        self.check_dim(x)?;
        if grad.len() != x.len() {
            return Err(ModelError::Dimension { expected: Some(x.len()), got: grad.len() });
        }
        self.evaluate(x, Some(grad))
    }

    /// Observation term `Σ ln SN(y_t; 0, exp(h_t/2), λ_t)` alone.
    pub fn log_likelihood(&self, x: &[f64]) -> Result<f64, ModelError> {
        self.check_dim(x)?;
        let s = constrain_statics(x, self.config.skew_mode);
        let mut h = Vec::new();
        let mut lambda = Vec::new();
        fill_paths(x, &s, &mut h, &mut lambda);
        let mut total = 0.0;
        for (t, &y) in self.y.iter().enumerate() {
            let z = y * (-0.5 * h[t + 1]).exp();
            let lp = log_pdf_standard(z, lambda[t]) - 0.5 * h[t + 1];
            if !lp.is_finite() {
                return Err(ModelError::NonFinite(Term::Likelihood(t)));
            }
            total += lp;
        }
        Ok(total)
    }

    fn evaluate(&self, x: &[f64], mut grad: Option<&mut [f64]>) -> Result<f64, ModelError> {
        let cfg = &self.config;
        let mode = cfg.skew_mode;
        let t_len = self.y.len();
        let s = constrain_statics(x, mode);
        if let Some(g) = grad.as_deref_mut() {
            g.fill(0.0);
        }

        // static priors with log-Jacobians of the constraining maps
        let mut prior = [0.0; N_STATIC];
        let mut dprior = [0.0; N_STATIC];

        prior[MU] = normal_lpdf(s.mu_h, cfg.mu_mean, cfg.mu_sd);
        dprior[MU] = -(s.mu_h - cfg.mu_mean) / (cfg.mu_sd * cfg.mu_sd);

        // φ = tanh(a); truncation constant to (-1, 1) dropped
        let a = x[PHI];
        prior[PHI] = normal_lpdf(s.phi_h, cfg.phi_mean, cfg.phi_sd) + log_sech2(a);
        let one_m_phi2 = 1.0 - s.phi_h * s.phi_h;
        dprior[PHI] = -(s.phi_h - cfg.phi_mean) / (cfg.phi_sd * cfg.phi_sd) * one_m_phi2 - 2.0 * s.phi_h;

        // σ_h² ~ IG(shape, scale); v = exp(2b), |dv/db| = 2v
        let b = x[SIGMA];
        let (ig_a, ig_b) = (cfg.sigma2_shape, cfg.sigma2_scale);
        let inv_v = (-2.0 * b).exp();
        prior[SIGMA] = ig_a * ig_b.ln() - ln_gamma(ig_a) - 2.0 * ig_a * b - ig_b * inv_v + std::f64::consts::LN_2;
        dprior[SIGMA] = -2.0 * ig_a + 2.0 * ig_b * inv_v;

        // κ ~ Gamma(shape, rate) on log scale
        let gamma_log = |c: f64, shape: f64, rate: f64| {
            let k = c.exp();
            (shape * rate.ln() - ln_gamma(shape) + shape * c - rate * k, shape - rate * k)
        };
        let (lp, dp) = gamma_log(x[KAPPA_ALPHA], cfg.kappa_alpha_shape, cfg.kappa_alpha_rate);
        prior[KAPPA_ALPHA] = lp;
        dprior[KAPPA_ALPHA] = dp;
        let (lp, dp) = gamma_log(x[KAPPA_SIGMA], cfg.kappa_sigma_shape, cfg.kappa_sigma_rate);
        prior[KAPPA_SIGMA] = lp;
        dprior[KAPPA_SIGMA] = dp;

        // double-exponential shrinkage, subgradient zero at the kink
        if mode.alpha_free() {
            let k = s.kappa_alpha;
            prior[ALPHA] = (0.5 * k).ln() - k * s.alpha_0.abs();
            dprior[ALPHA] = -k * subgradient_sign(s.alpha_0);
            dprior[KAPPA_ALPHA] += 1.0 - k * s.alpha_0.abs();
        }
        if mode.sigma_lambda_free() {
            let k = s.kappa_sigma;
            prior[SIGMA_LAMBDA] = (0.5 * k).ln() - k * s.sigma_lambda.abs();
            dprior[SIGMA_LAMBDA] = -k * subgradient_sign(s.sigma_lambda);
            dprior[KAPPA_SIGMA] += 1.0 - k * s.sigma_lambda.abs();
        }

        let mut total = 0.0;
        for (i, &p) in prior.iter().enumerate() {
            if !p.is_finite() {
                return Err(ModelError::NonFinite(Term::Prior(i)));
            }
            total += p;
        }

        // standard-normal innovations
        let mut innov = 0.0;
        for &v in &x[N_STATIC..] {
            innov += -0.5 * v * v;
        }
        innov -= (x.len() - N_STATIC) as f64 * LN_SQRT_2PI;
        if !innov.is_finite() {
            let i = x[N_STATIC..].iter().position(|v| !v.is_finite()).unwrap_or(0) + N_STATIC;
            return Err(ModelError::NonFinite(Term::Innovation(i)));
        }
        total += innov;

        let mut h = Vec::with_capacity(t_len + 1);
        let mut lambda = Vec::with_capacity(t_len);
        fill_paths(x, &s, &mut h, &mut lambda);

        let mut dh = vec![0.0; t_len + 1];
        let mut dlambda = vec![0.0; t_len];
        for (t, &y) in self.y.iter().enumerate() {
            let ht = h[t + 1];
            let z = y * (-0.5 * ht).exp();
            let lp = log_pdf_standard(z, lambda[t]) - 0.5 * ht;
            if !lp.is_finite() {
                return Err(ModelError::NonFinite(Term::Likelihood(t)));
            }
            total += lp;
            if grad.is_some() {
                let (dz, dl) = grad_log_pdf_standard(z, lambda[t]);
                dh[t + 1] = -0.5 * z * dz - 0.5;
                dlambda[t] = dl;
            }
        }

        let Some(g) = grad else {
            return Ok(total);
        };
        g[..N_STATIC].copy_from_slice(&dprior);
        for (gi, &v) in g[N_STATIC..].iter_mut().zip(&x[N_STATIC..]) {
            *gi = -v;
        }
        self.backprop_h(x, &s, &h, &dh, g);
        self.backprop_lambda(x, &s, &dlambda, g);

        if !mode.alpha_free() {
            g[ALPHA] = 0.0;
        }
        if !mode.sigma_lambda_free() {
            g[SIGMA_LAMBDA] = 0.0;
        }
        if let Some(i) = g.iter().position(|v| !v.is_finite()) {
            return Err(match i {
                i if i < N_STATIC => ModelError::NonFinite(Term::Prior(i)),
                i => ModelError::NonFinite(Term::Innovation(i)),
            });
        }
        Ok(total)
    }

    /// Chain rule through `h_t = μ + d_t`, `d₀ = σ cosh(a) e₀`,
    /// `d_t = φ d_{t-1} + σ e_t`.
    fn backprop_h(&self, x: &[f64], s: &params::StaticParams, h: &[f64], dh: &[f64], g: &mut [f64]) {
        let t_len = self.y.len();
        let phi = s.phi_h;
        let one_m_phi2 = 1.0 - phi * phi;
        let off = params::h_offset();

        let mut d_mu = 0.0;
        let mut d_logsigma = 0.0;
        let mut d_atanh = 0.0;
        let mut dev_prev = h[0] - s.mu_h;
        let mut ddev_da = dev_prev * phi;
        for t in 1..=t_len {
            let dev = h[t] - s.mu_h;
            ddev_da = one_m_phi2 * dev_prev + phi * ddev_da;
            d_mu += dh[t];
            d_logsigma += dh[t] * dev;
            d_atanh += dh[t] * ddev_da;
            dev_prev = dev;
        }
        g[MU] += d_mu;
        g[SIGMA] += d_logsigma;
        g[PHI] += d_atanh;

        // reverse accumulation over innovations
        let mut carry = 0.0;
        for t in (1..=t_len).rev() {
            carry = dh[t] + phi * carry;
            g[off + t] += s.sigma_h * carry;
        }
        let stationary_sd = s.sigma_h * x[PHI].cosh();
        g[off] += stationary_sd * phi * carry;
    }

    /// Chain rule through `λ_t = α₀ + σ_λ Σ_{i≤t} u_i`.
    fn backprop_lambda(&self, x: &[f64], s: &params::StaticParams, dlambda: &[f64], g: &mut [f64]) {
        let t_len = self.y.len();
        let off = params::lambda_offset(t_len);
        let u = &x[off..];
        let mut d_alpha = 0.0;
        let mut d_sigma = 0.0;
        let mut cum = 0.0;
        for t in 0..t_len {
            cum += u[t];
            d_alpha += dlambda[t];
            d_sigma += dlambda[t] * cum;
        }
        g[ALPHA] += d_alpha;
        g[SIGMA_LAMBDA] += d_sigma;
        let mut tail = 0.0;
        for t in (0..t_len).rev() {
            tail += dlambda[t];
            g[off + t] += s.sigma_lambda * tail;
        }
    }
}

/// Log posterior of `x` given observations `y`.
pub fn log_posterior(x: &[f64], y: &[f64], config: &ModelConfig) -> Result<f64, ModelError> {
    SvPosterior::new(y, config.clone())?.log_posterior(x)
}

/// Gradient of [`log_posterior`].
pub fn log_posterior_grad(x: &[f64], y: &[f64], config: &ModelConfig) -> Result<Vec<f64>, ModelError> {
    SvPosterior::new(y, config.clone())?.log_posterior_grad(x)
}
