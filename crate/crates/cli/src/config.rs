//! Flat key-value run configuration. A file supplies the base, `--set` and
//! the dedicated flags override it, and the resolved result is echoed into
//! every output directory as `config.toml`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use skewsv::evaluation::WindowOptions;
use skewsv::sampler::MassDiag;
use skewsv::{HmcConfig, ModelConfig, SkewMode, StaticParams};

use crate::error::CliError;

/// Retained-draw thinning used by the CLI unless configured; keeps draw
/// files of long fits to a manageable size.
pub const DEFAULT_THIN: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MassSetting {
    Named(String),
    Values(Vec<f64>),
}

/// Every key the file may contain; all optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    profile: Option<String>,
    label: Option<String>,
    skew_mode: Option<SkewMode>,
    mu_mean: Option<f64>,
    mu_sd: Option<f64>,
    phi_mean: Option<f64>,
    phi_sd: Option<f64>,
    sigma2_shape: Option<f64>,
    sigma2_scale: Option<f64>,
    kappa_sigma_shape: Option<f64>,
    kappa_sigma_rate: Option<f64>,
    kappa_alpha_shape: Option<f64>,
    kappa_alpha_rate: Option<f64>,
    n_iter: Option<usize>,
    n_burnin: Option<usize>,
    leapfrog_steps: Option<usize>,
    jitter_steps: Option<bool>,
    initial_step_size: Option<f64>,
    target_accept: Option<f64>,
    mass_diag: Option<MassSetting>,
    seed: Option<u64>,
    n_chains: Option<usize>,
    thin: Option<usize>,
    binary_draws: Option<bool>,
    rhat_limit: Option<f64>,
    min_window: Option<usize>,
    max_windows: Option<usize>,
    warm_start: Option<bool>,
    sim_t: Option<usize>,
    sim_mu_h: Option<f64>,
    sim_phi_h: Option<f64>,
    sim_sigma_h: Option<f64>,
    sim_alpha_0: Option<f64>,
    sim_sigma_lambda: Option<f64>,
}

/// Resolved settings for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub profile: String,
    pub label: String,
    pub model: ModelConfig,
    pub hmc: HmcConfig,
    pub binary_draws: bool,
    /// Largest acceptable split R-hat over the static parameters of a fit.
    pub rhat_limit: f64,
    pub window: WindowOptions,
    pub sim_t: usize,
    pub sim: StaticParams,
}

/// The echoed form: flat, fully populated, in a fixed key order.
#[derive(Debug, Serialize)]
struct Effective<'a> {
    profile: &'a str,
    label: &'a str,
    skew_mode: SkewMode,
    mu_mean: f64,
    mu_sd: f64,
    phi_mean: f64,
    phi_sd: f64,
    sigma2_shape: f64,
    sigma2_scale: f64,
    kappa_sigma_shape: f64,
    kappa_sigma_rate: f64,
    kappa_alpha_shape: f64,
    kappa_alpha_rate: f64,
    n_iter: usize,
    n_burnin: usize,
    leapfrog_steps: usize,
    jitter_steps: bool,
    initial_step_size: f64,
    target_accept: f64,
    mass_diag: MassSetting,
    seed: u64,
    n_chains: usize,
    thin: usize,
    binary_draws: bool,
    rhat_limit: f64,
    min_window: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_windows: Option<usize>,
    warm_start: bool,
    sim_t: usize,
    sim_mu_h: f64,
    sim_phi_h: f64,
    sim_sigma_h: f64,
    sim_alpha_0: f64,
    sim_sigma_lambda: f64,
}

/// Parses `key=value`; the value is read as a TOML literal and falls back
/// to a bare string.
pub fn parse_assignment(text: &str) -> Result<(String, toml::Value), CliError> {
    let (key, value) = text
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("expected key=value, got {text:?}")))?;
    let key = key.trim().to_string();
    if key.is_empty() {
        return Err(CliError::Config(format!("empty key in {text:?}")));
    }
    let value = value.trim();
    let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    Ok((key, parsed))
}

/// Reads `path` (if any), applies `overrides` in order and resolves.
pub fn load(path: Option<&Path>, overrides: &[(String, toml::Value)]) -> Result<Settings, CliError> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", p.display())))?;
            text.parse::<toml::Table>().map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => toml::Table::new(),
    };
    for (k, v) in overrides {
        table.insert(k.clone(), v.clone());
    }
    let file: FileConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
    resolve(file)
}

fn resolve(f: FileConfig) -> Result<Settings, CliError> {
    let profile = f.profile.unwrap_or_else(|| "bonds".into());
    let mut model = ModelConfig::profile(&profile)?;
    macro_rules! set {
        ($dst:expr, $($field:ident),+) => { $( if let Some(v) = f.$field { $dst.$field = v; } )+ };
    }
    set!(model, skew_mode, mu_mean, mu_sd, phi_mean, phi_sd, sigma2_shape, sigma2_scale);
    set!(model, kappa_sigma_shape, kappa_sigma_rate, kappa_alpha_shape, kappa_alpha_rate);
    model.validate()?;

    let mut hmc = HmcConfig { thin: DEFAULT_THIN, ..HmcConfig::default() };
    set!(hmc, n_iter, n_burnin, leapfrog_steps, jitter_steps, initial_step_size, target_accept, seed, n_chains, thin);
    if let Some(m) = f.mass_diag {
        hmc.mass_diag = match m {
            MassSetting::Named(s) if s == "adapted" => MassDiag::Adapted,
            MassSetting::Named(s) if s == "unit" => MassDiag::Unit,
            MassSetting::Named(s) => return Err(CliError::Config(format!("mass_diag {s:?}: expected adapted, unit or a list"))),
            MassSetting::Values(v) => MassDiag::Fixed(v),
        };
    }
    hmc.validate()?;

    let mut window = WindowOptions::default();
    set!(window, min_window, warm_start);
    window.max_windows = f.max_windows;

    // defaults reproduce the US bond posterior means
    let sim = StaticParams {
        mu_h: f.sim_mu_h.unwrap_or(3.88),
        phi_h: f.sim_phi_h.unwrap_or(0.96),
        sigma_h: f.sim_sigma_h.unwrap_or(0.42),
        alpha_0: f.sim_alpha_0.unwrap_or(-0.06),
        sigma_lambda: f.sim_sigma_lambda.unwrap_or(0.17),
        kappa_alpha: 1.0,
        kappa_sigma: 1.0,
    };
    let rhat_limit = f.rhat_limit.unwrap_or(1.1);
    if !(rhat_limit >= 1.0) {
        return Err(CliError::Config(format!("rhat_limit must be at least 1, got {rhat_limit}")));
    }
    Ok(Settings {
        profile,
        label: f.label.unwrap_or_else(|| "US".into()),
        model,
        hmc,
        binary_draws: f.binary_draws.unwrap_or(false),
        rhat_limit,
        window,
        sim_t: f.sim_t.unwrap_or(450),
        sim,
    })
}

impl Settings {
    pub fn to_toml(&self) -> String {
        let (m, h, s) = (&self.model, &self.hmc, &self.sim);
        let e = Effective {
            profile: &self.profile,
            label: &self.label,
            skew_mode: m.skew_mode,
            mu_mean: m.mu_mean,
            mu_sd: m.mu_sd,
            phi_mean: m.phi_mean,
            phi_sd: m.phi_sd,
            sigma2_shape: m.sigma2_shape,
            sigma2_scale: m.sigma2_scale,
            kappa_sigma_shape: m.kappa_sigma_shape,
            kappa_sigma_rate: m.kappa_sigma_rate,
            kappa_alpha_shape: m.kappa_alpha_shape,
            kappa_alpha_rate: m.kappa_alpha_rate,
            n_iter: h.n_iter,
            n_burnin: h.n_burnin,
            leapfrog_steps: h.leapfrog_steps,
            jitter_steps: h.jitter_steps,
            initial_step_size: h.initial_step_size,
            target_accept: h.target_accept,
            mass_diag: match &h.mass_diag {
                MassDiag::Adapted => MassSetting::Named("adapted".into()),
                MassDiag::Unit => MassSetting::Named("unit".into()),
                MassDiag::Fixed(v) => MassSetting::Values(v.clone()),
            },
            seed: h.seed,
            n_chains: h.n_chains,
            thin: h.thin,
            binary_draws: self.binary_draws,
            rhat_limit: self.rhat_limit,
            min_window: self.window.min_window,
            max_windows: self.window.max_windows,
            warm_start: self.window.warm_start,
            sim_t: self.sim_t,
            sim_mu_h: s.mu_h,
            sim_phi_h: s.phi_h,
            sim_sigma_h: s.sigma_h,
            sim_alpha_0: s.alpha_0,
            sim_sigma_lambda: s.sigma_lambda,
        };
        toml::to_string(&e).expect("flat config serializes")
    }
}
