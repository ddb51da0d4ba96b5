//! Expanding-window sign forecasts: the sign of the posterior-mean shape at
//! the end of each window predicts the sign of the next observation.

use chrono::NaiveDate;

use super::EvalError;
use crate::data_io::{TimeSeries, ISO_DATE};
use crate::model::{ModelConfig, STATIC_NAMES, ALPHA, MU, PHI, SIGMA, SIGMA_LAMBDA};
use crate::sampler::{run_chains_with_init, warm_start, HmcConfig, PosteriorDraws, SamplerError};
use crate::summaries::{mean, Table};

/// Windows whose largest R̂ over the reported statics exceeds this are
/// excluded from the statistics.
pub const RHAT_LIMIT: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Right,
    Wrong,
    /// Posterior-mean shape exactly zero.
    NoSignal,
    /// Chains did not converge; not scored.
    Excluded,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Right => "right",
            Outcome::Wrong => "wrong",
            Outcome::NoSignal => "no_signal",
            Outcome::Excluded => "excluded",
        }
    }

    /// Scores a prediction. A realized value of exactly zero matches
    /// neither sign and counts as wrong.
    pub fn score(lambda_mean: f64, realized: f64) -> Outcome {
        if lambda_mean == 0.0 {
            Outcome::NoSignal
        } else if (lambda_mean > 0.0 && realized > 0.0) || (lambda_mean < 0.0 && realized < 0.0) {
            Outcome::Right
        } else {
            Outcome::Wrong
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastRecord {
    /// Date of the forecast observation `y_{t+1}`.
    pub date: NaiveDate,
    pub window_len: usize,
    /// `E_t[λ_{t+1}]`, the posterior mean of `λ_t`.
    pub lambda_mean: f64,
    pub realized: f64,
    pub max_rhat: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastReport {
    pub label: String,
    pub records: Vec<ForecastRecord>,
    pub n_right: usize,
    pub n_wrong: usize,
    pub n_no_signal: usize,
    pub n_excluded: usize,
    /// `n_right / (n_right + n_wrong)`.
    pub hit_ratio: f64,
    /// Mean `|y_{t+1}|` over correct calls, in the units of `y`.
    pub avg_abs_when_right: f64,
    pub avg_abs_when_wrong: f64,
    /// Share of non-excluded windows with `y_{t+1} > 0`.
    pub frac_positive: f64,
}

impl ForecastReport {
    pub fn from_records(label: impl Into<String>, records: Vec<ForecastRecord>) -> Self {
        let abs_of = |o: Outcome| -> Vec<f64> { records.iter().filter(|r| r.outcome == o).map(|r| r.realized.abs()).collect() };
        let right = abs_of(Outcome::Right);
        let wrong = abs_of(Outcome::Wrong);
        let count = |o: Outcome| records.iter().filter(|r| r.outcome == o).count();
        let kept: Vec<&ForecastRecord> = records.iter().filter(|r| r.outcome != Outcome::Excluded).collect();
        let scored = right.len() + wrong.len();
        let ratio = |num: usize, den: usize| if den == 0 { f64::NAN } else { num as f64 / den as f64 };
        let avg = |v: &[f64]| if v.is_empty() { f64::NAN } else { mean(v) };
        Self {
            label: label.into(),
            n_right: right.len(),
            n_wrong: wrong.len(),
            n_no_signal: count(Outcome::NoSignal),
            n_excluded: count(Outcome::Excluded),
            hit_ratio: ratio(right.len(), scored),
            avg_abs_when_right: avg(&right),
            avg_abs_when_wrong: avg(&wrong),
            frac_positive: ratio(kept.iter().filter(|r| r.realized > 0.0).count(), kept.len()),
            records,
        }
    }

    /// Per-window records as CSV.
    pub fn records_csv(&self) -> String {
        let mut out = String::from("date,window_len,lambda_mean,realized,max_rhat,outcome\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.date.format(ISO_DATE),
                r.window_len,
                r.lambda_mean,
                r.realized,
                r.max_rhat,
                r.outcome.as_str()
            ));
        }
        out
    }
}

/// Hit Ratio / Avg when right / Avg when wrong / `y_{t+1} > 0`, one column
/// per report. Ratios are in percent; averages are in the units of `y`.
pub fn forecast_table(reports: &[ForecastReport]) -> Table {
    let row = |name: &str, f: &dyn Fn(&ForecastReport) -> f64| (name.to_string(), reports.iter().map(f).collect());
    Table::new(
        reports.iter().map(|r| r.label.clone()).collect(),
        vec![
            row("Hit Ratio", &|r| 100.0 * r.hit_ratio),
            row("Avg when right", &|r| r.avg_abs_when_right),
            row("Avg when wrong", &|r| r.avg_abs_when_wrong),
            row("$y_{t+1} > 0$", &|r| 100.0 * r.frac_positive),
        ],
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowOptions {
    pub min_window: usize,
    /// Start one chain of each window at the previous window's posterior
    /// means.
    pub warm_start: bool,
    /// Stop after this many windows.
    pub max_windows: Option<usize>,
}

impl Default for WindowOptions {
    fn default() -> Self {
        Self { min_window: 50, warm_start: true, max_windows: None }
    }
}

/// Largest R̂ over `μ_h, φ_h, σ_h, σ_λ, α₀`; NaN without diagnostics.
pub fn max_table_rhat(diag: &crate::sampler::Diagnostics) -> f64 {
    let names: Vec<&str> = [MU, PHI, SIGMA, SIGMA_LAMBDA, ALPHA].iter().map(|&i| STATIC_NAMES[i]).collect();
    if diag.params.is_empty() {
        return f64::NAN;
    }
    diag.max_rhat(&names)
}

/// Refits the model on `y₁..y_t` for every `t` from `first_window_end` to
/// the penultimate observation and scores `sign E_t[λ_{t+1}]` against
/// `sign y_{t+1}`.
///
/// Windows run in date order; each window's seed is offset by its end
/// index so that results do not depend on how many windows are run.
pub fn expanding_window_eval(
    y: &TimeSeries,
    model: &ModelConfig,
    hmc: &HmcConfig,
    first_window_end: NaiveDate,
    options: &WindowOptions,
) -> Result<ForecastReport, EvalError> {
    let first = y.position(first_window_end).ok_or(EvalError::DateNotFound(first_window_end))?;
    if first + 1 < options.min_window {
        return Err(EvalError::WindowTooShort { need: options.min_window, have: first + 1 });
    }
    if first + 1 >= y.len() {
        return Err(EvalError::NoOutOfSample);
    }
    let mut last = y.len() - 2;
    if let Some(m) = options.max_windows {
        last = last.min(first + m.max(1) - 1);
    }

    let mut records = Vec::with_capacity(last - first + 1);
    let mut previous: Option<PosteriorDraws> = None;
    for t in first..=last {
        let n = t + 1;
        let window = y.head(n);
        let cfg = HmcConfig { seed: hmc.seed.wrapping_add(t as u64), ..hmc.clone() };
        let warm = match (&previous, options.warm_start) {
            (Some(d), true) => warm_start(d, n).ok(),
            _ => None,
        };
        let realized = y.values()[n];
        let date = y.dates()[n];
        match run_chains_with_init(&window, model, &cfg, warm) {
            Ok((draws, diag)) => {
                let lambda_mean = draws.mean(draws.lambda_index(n));
                let max_rhat = max_table_rhat(&diag);
                let outcome = if max_rhat > RHAT_LIMIT { Outcome::Excluded } else { Outcome::score(lambda_mean, realized) };
                if outcome == Outcome::Excluded {
                    log::warn!("window ending {} excluded: max R-hat {max_rhat:.3}", y.dates()[t]);
                }
                log::info!("window {}/{}: E[lambda] = {lambda_mean:.3}, y = {realized}", t - first + 1, last - first + 1);
                records.push(ForecastRecord { date, window_len: n, lambda_mean, realized, max_rhat, outcome });
                previous = Some(draws);
            }
            Err(SamplerError::AllDivergent { chain, .. }) => {
                log::warn!("window ending {} excluded: chain {chain} diverged throughout", y.dates()[t]);
                records.push(ForecastRecord {
                    date,
                    window_len: n,
                    lambda_mean: f64::NAN,
                    realized,
                    max_rhat: f64::INFINITY,
                    outcome: Outcome::Excluded,
                });
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(ForecastReport::from_records(y.label(), records))
}
