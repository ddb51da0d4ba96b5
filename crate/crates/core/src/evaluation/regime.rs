use super::EvalError;
use crate::data_io::TimeSeries;
use crate::summaries::{mean, quantile_sorted, Table};

/// Mean, sample standard deviation, 5% quantile and minimum of one regime.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeStats {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub q05: f64,
    pub min: f64,
}

impl RegimeStats {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let m = mean(values);
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
        } else {
            f64::NAN
        };
        Some(Self { n: values.len(), mean: m, sd, q05: quantile_sorted(&sorted, 0.05), min: sorted[0] })
    }
}

/// High-volatility periods have a posterior-mean scale strictly above its
/// full-sample average; ties go to the low regime. `None` marks an empty
/// regime.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub threshold: f64,
    pub high: Option<RegimeStats>,
    pub low: Option<RegimeStats>,
    /// Regime membership per observation.
    pub is_high: Vec<bool>,
}

impl RegimeReport {
    pub fn has_empty_regime(&self) -> bool {
        self.high.is_none() || self.low.is_none()
    }
}

/// Regime statistics from aligned slices.
pub fn regime_split(y: &[f64], scale: &[f64]) -> RegimeReport {
    assert_eq!(y.len(), scale.len(), "returns and scales differ in length");
    // shifted mean so that a constant series reproduces its value exactly
    let threshold = scale.first().map_or(f64::NAN, |&s0| s0 + scale.iter().map(|s| s - s0).sum::<f64>() / scale.len() as f64);
    let is_high: Vec<bool> = scale.iter().map(|&s| s > threshold).collect();
    let pick = |want: bool| -> Vec<f64> { y.iter().zip(&is_high).filter(|(_, &h)| h == want).map(|(&v, _)| v).collect() };
    RegimeReport { threshold, high: RegimeStats::of(&pick(true)), low: RegimeStats::of(&pick(false)), is_high }
}

/// Splits `y` by whether `scale_mean` exceeds its average; the two series
/// must share dates.
pub fn regime_stats(y: &TimeSeries, scale_mean: &TimeSeries) -> Result<RegimeReport, EvalError> {
    if y.dates() != scale_mean.dates() {
        return Err(EvalError::Misaligned { left: y.label().to_string(), right: scale_mean.label().to_string() });
    }
    let report = regime_split(y.values(), scale_mean.values());
    if report.has_empty_regime() {
        log::warn!("one volatility regime is empty");
    }
    Ok(report)
}

/// Mean / Sd / Q05 / Min rows with High Vol and Low Vol columns. Empty
/// regimes render as `NA`.
pub fn regime_table(report: &RegimeReport) -> Table {
    let stat = |s: &Option<RegimeStats>, f: fn(&RegimeStats) -> f64| s.as_ref().map_or(f64::NAN, f);
    let row = |name: &str, f: fn(&RegimeStats) -> f64| (name.to_string(), vec![stat(&report.high, f), stat(&report.low, f)]);
    Table::new(
        vec!["High Vol".into(), "Low Vol".into()],
        vec![row("Mean", |s| s.mean), row("Sd", |s| s.sd), row("Q05", |s| s.q05), row("Min", |s| s.min)],
    )
}
