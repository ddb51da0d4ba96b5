//! Constrained parameters and the non-centered unconstrained packing.
//!
//! Unconstrained layout for a series of length `T`:
//!
//! | index            | coordinate                         |
//! |------------------|------------------------------------|
//! | 0                | `μ_h`                              |
//! | 1                | `atanh φ_h`                        |
//! | 2                | `ln σ_h`                           |
//! | 3                | `α₀`                               |
//! | 4                | `σ_λ` (signed)                     |
//! | 5                | `ln κ_α`                           |
//! | 6                | `ln κ_σ`                           |
//! | 7 ..= 7+T        | log-variance innovations `e₀..e_T` |
//! | 8+T .. 8+2T      | shape innovations `u₁..u_T`        |

use super::{ModelError, SkewMode};

pub const MU: usize = 0;
pub const PHI: usize = 1;
pub const SIGMA: usize = 2;
pub const ALPHA: usize = 3;
pub const SIGMA_LAMBDA: usize = 4;
pub const KAPPA_ALPHA: usize = 5;
pub const KAPPA_SIGMA: usize = 6;
pub const N_STATIC: usize = 7;

/// Names of the static coordinates in packing order.
pub const STATIC_NAMES: [&str; N_STATIC] =
    ["mu_h", "phi_h", "sigma_h", "alpha_0", "sigma_lambda", "kappa_alpha", "kappa_sigma"];

/// Dimension of the unconstrained vector for `t` observations.
pub const fn dim(t: usize) -> usize {
    N_STATIC + (t + 1) + t
}

/// Index of the first log-variance innovation.
pub const fn h_offset() -> usize {
    N_STATIC
}

/// Index of the first shape innovation.
pub const fn lambda_offset(t: usize) -> usize {
    N_STATIC + t + 1
}

/// Observation count implied by an unconstrained dimension.
pub fn series_len(dim: usize) -> Option<usize> {
    (dim >= N_STATIC + 1 && (dim - N_STATIC - 1) % 2 == 0).then(|| (dim - N_STATIC - 1) / 2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticParams {
    pub mu_h: f64,
    pub phi_h: f64,
    pub sigma_h: f64,
    pub alpha_0: f64,
    /// Sign is not identified; report `|σ_λ|`.
    pub sigma_lambda: f64,
    pub kappa_alpha: f64,
    pub kappa_sigma: f64,
}

impl StaticParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let all = [
            self.mu_h,
            self.phi_h,
            self.sigma_h,
            self.alpha_0,
            self.sigma_lambda,
            self.kappa_alpha,
            self.kappa_sigma,
        ];
        if let Some(i) = all.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::InvalidParams(format!("{} is not finite", STATIC_NAMES[i])));
        }
        if !(self.phi_h > -1.0 && self.phi_h < 1.0) {
            return Err(ModelError::InvalidParams(format!("phi_h = {} outside (-1, 1)", self.phi_h)));
        }
        for (name, v) in
            [("sigma_h", self.sigma_h), ("kappa_alpha", self.kappa_alpha), ("kappa_sigma", self.kappa_sigma)]
        {
            if v <= 0.0 {
                return Err(ModelError::InvalidParams(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; N_STATIC] {
        [
            self.mu_h,
            self.phi_h,
            self.sigma_h,
            self.alpha_0,
            self.sigma_lambda,
            self.kappa_alpha,
            self.kappa_sigma,
        ]
    }

    pub fn from_slice(v: &[f64]) -> Self {
        Self {
            mu_h: v[MU],
            phi_h: v[PHI],
            sigma_h: v[SIGMA],
            alpha_0: v[ALPHA],
            sigma_lambda: v[SIGMA_LAMBDA],
            kappa_alpha: v[KAPPA_ALPHA],
            kappa_sigma: v[KAPPA_SIGMA],
        }
    }
}

/// Latent log-variance path `h₀..h_T` and shape path `λ₁..λ_T`
/// (`λ₀ = α₀` is not stored).
#[derive(Debug, Clone, PartialEq)]
pub struct LatentPaths {
    pub h: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl LatentPaths {
    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }
}

/// `ln(1 - tanh²(a))` without cancellation.
pub(crate) fn log_sech2(a: f64) -> f64 {
    let b = a.abs();
    2.0 * std::f64::consts::LN_2 - 2.0 * (b + (-2.0 * b).exp().ln_1p())
}

/// Maps an unconstrained vector to constrained statics and latent paths.
///
/// Frozen coordinates under `mode` are reported as exactly zero.
pub fn constrain(x: &[f64], mode: SkewMode) -> Result<(StaticParams, LatentPaths), ModelError> {
    let t = series_len(x.len()).ok_or(ModelError::Dimension { expected: None, got: x.len() })?;
    let statics = constrain_statics(x, mode);
    let mut h = Vec::with_capacity(t + 1);
    let mut lambda = Vec::with_capacity(t);
    fill_paths(x, &statics, &mut h, &mut lambda);
    Ok((statics, LatentPaths { h, lambda }))
}

pub(crate) fn constrain_statics(x: &[f64], mode: SkewMode) -> StaticParams {
    let a = x[PHI];
    StaticParams {
        mu_h: x[MU],
        phi_h: a.tanh(),
        sigma_h: x[SIGMA].exp(),
        alpha_0: if mode.alpha_free() { x[ALPHA] } else { 0.0 },
        sigma_lambda: if mode.sigma_lambda_free() { x[SIGMA_LAMBDA] } else { 0.0 },
        kappa_alpha: x[KAPPA_ALPHA].exp(),
        kappa_sigma: x[KAPPA_SIGMA].exp(),
    }
}

/// Non-centered recursion. `h` receives `T+1` values, `lambda` receives `T`.
pub(crate) fn fill_paths(x: &[f64], s: &StaticParams, h: &mut Vec<f64>, lambda: &mut Vec<f64>) {
    let t = (x.len() - N_STATIC - 1) / 2;
    let e = &x[h_offset()..h_offset() + t + 1];
    let u = &x[lambda_offset(t)..];
    // σ/√(1-φ²) = σ cosh(atanh φ)
    let stationary_sd = s.sigma_h * x[PHI].cosh();
    h.clear();
    let mut dev = stationary_sd * e[0];
    h.push(s.mu_h + dev);
    for &et in &e[1..] {
        dev = s.phi_h * dev + s.sigma_h * et;
        h.push(s.mu_h + dev);
    }
    lambda.clear();
    let mut level = s.alpha_0;
    for &ut in u {
        level += s.sigma_lambda * ut;
        lambda.push(level);
    }
}

/// Inverse of [`constrain`] for unfrozen coordinates.
///
/// When `σ_λ = 0` the shape innovations are not identified and are set to
/// zero.
pub fn unconstrain(statics: &StaticParams, paths: &LatentPaths) -> Result<Vec<f64>, ModelError> {
    statics.validate()?;
    let t = paths.lambda.len();
    if paths.h.len() != t + 1 {
        return Err(ModelError::Dimension { expected: Some(t + 1), got: paths.h.len() });
    }
    let mut x = Vec::with_capacity(dim(t));
    x.push(statics.mu_h);
    x.push(statics.phi_h.atanh());
    x.push(statics.sigma_h.ln());
    x.push(statics.alpha_0);
    x.push(statics.sigma_lambda);
    x.push(statics.kappa_alpha.ln());
    x.push(statics.kappa_sigma.ln());
    let stationary_sd = statics.sigma_h * x[PHI].cosh();
    x.push((paths.h[0] - statics.mu_h) / stationary_sd);
    for w in paths.h.windows(2) {
        let prev = w[0] - statics.mu_h;
        let cur = w[1] - statics.mu_h;
        x.push((cur - statics.phi_h * prev) / statics.sigma_h);
    }
    let mut prev = statics.alpha_0;
    for &l in &paths.lambda {
        x.push(if statics.sigma_lambda == 0.0 { 0.0 } else { (l - prev) / statics.sigma_lambda });
        prev = l;
    }
    Ok(x)
}
