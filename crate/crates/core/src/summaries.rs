//! Posterior reductions: static-parameter quantile tables, time-indexed
//! quantile bands and the shape-to-skewness transform.
//!
//! Quantiles use linear interpolation between order statistics (the
//! "type 7" rule): for sorted `x₀..x_{n-1}`, `q(p) = x_k + f (x_{k+1} - x_k)`
//! with `k + f = (n - 1) p`.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use rayon::prelude::*;
use thiserror::Error;

use crate::data_io::ISO_DATE;
use crate::model::{ALPHA, MU, PHI, SIGMA, SIGMA_LAMBDA};
use crate::sampler::PosteriorDraws;
use crate::skew_normal::skewness_gamma;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SummaryError {
    #[error("no draws to summarize")]
    Empty,
    #[error("unknown band {0:?} (expected scale, lambda or gamma)")]
    UnknownBand(String),
    #[error("draws carry no latent paths")]
    NoLatent,
    #[error("band has {band} time points but {dates} dates were supplied")]
    Misaligned { band: usize, dates: usize },
}

/// Type-7 quantile of already sorted values.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Type-7 quantile; sorts a copy.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Labelled numeric table, possibly in several row blocks.
///
/// Renders either as CSV at full precision or as a LaTeX `tabular` with
/// fixed decimals and `\hline` between blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub blocks: Vec<Vec<(String, Vec<f64>)>>,
}

impl Table {
    pub fn new(columns: Vec<String>, rows: Vec<(String, Vec<f64>)>) -> Self {
        Self { columns, blocks: vec![rows] }
    }

    /// Stacks tables with identical columns into one, block by block.
    pub fn stack(tables: &[Table]) -> Option<Table> {
        let first = tables.first()?;
        if tables.iter().any(|t| t.columns != first.columns) {
            return None;
        }
        Some(Table { columns: first.columns.clone(), blocks: tables.iter().flat_map(|t| t.blocks.clone()).collect() })
    }

    pub fn rows(&self) -> impl Iterator<Item = &(String, Vec<f64>)> {
        self.blocks.iter().flatten()
    }

    pub fn get(&self, row: &str, column: &str) -> Option<f64> {
        let j = self.columns.iter().position(|c| c == column)?;
        self.rows().find(|(r, _)| r == row).map(|(_, v)| v[j])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("row");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (label, values) in self.rows() {
            out.push_str(label);
            for v in values {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_latex(&self, digits: usize) -> String {
        let mut out = format!("\\begin{{tabular}}{{l{}}}\n  \\hline\n", "c".repeat(self.columns.len()));
        out.push_str(&format!(" & {} \\\\ \n  \\hline\n", self.columns.join(" & ")));
        for block in &self.blocks {
            for (label, values) in block {
                let cells: Vec<String> = values.iter().map(|&v| fixed(v, digits)).collect();
                out.push_str(&format!("{label} & {} \\\\ \n", cells.join(" & ")));
            }
            out.push_str("  \\hline\n");
        }
        out.push_str("\\end{tabular}\n");
        out
    }
}

/// Fixed-point text without a negative sign on values that round to zero;
/// `NaN` prints as `NA`.
pub fn fixed(v: f64, digits: usize) -> String {
    if v.is_nan() {
        return "NA".into();
    }
    let s = format!("{v:.digits$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Column labels of the static-parameter table.
pub const STATIC_COLUMNS: [&str; 5] = ["$\\mu_h$", "$\\phi_h$", "$\\sigma_h$", "$\\sigma_{\\lambda}$", "$\\alpha_{0}$"];

/// q05 / Mean / q95 of `μ_h, φ_h, σ_h, |σ_λ|, α₀`, rows prefixed with
/// `label`.
pub fn static_summary(draws: &PosteriorDraws, label: &str) -> Result<Table, SummaryError> {
    if draws.is_empty() {
        return Err(SummaryError::Empty);
    }
    let mut q05 = Vec::new();
    let mut avg = Vec::new();
    let mut q95 = Vec::new();
    for j in [MU, PHI, SIGMA, SIGMA_LAMBDA, ALPHA] {
        let mut v = draws.pooled(j);
        if j == SIGMA_LAMBDA {
            v.iter_mut().for_each(|x| *x = x.abs());
        }
        v.sort_by(f64::total_cmp);
        q05.push(quantile_sorted(&v, 0.05));
        avg.push(mean(&v));
        q95.push(quantile_sorted(&v, 0.95));
    }
    Ok(Table::new(
        STATIC_COLUMNS.iter().map(|s| s.to_string()).collect(),
        vec![(format!("{label} q05"), q05), (format!("{label} Mean"), avg), (format!("{label} q95"), q95)],
    ))
}

/// Latent quantity a band is computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandKind {
    /// `exp(h_t / 2)`
    Scale,
    /// `λ_t`
    Lambda,
    /// Skewness index `γ(λ_t)`
    Gamma,
}

impl BandKind {
    pub const ALL: [BandKind; 3] = [BandKind::Scale, BandKind::Lambda, BandKind::Gamma];
}

impl fmt::Display for BandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BandKind::Scale => "scale",
            BandKind::Lambda => "lambda",
            BandKind::Gamma => "gamma",
        })
    }
}

impl FromStr for BandKind {
    type Err = SummaryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "scale" => Ok(BandKind::Scale),
            "lambda" => Ok(BandKind::Lambda),
            "gamma" => Ok(BandKind::Gamma),
            other => Err(SummaryError::UnknownBand(other.to_string())),
        }
    }
}

/// Per-time-index posterior quantiles, `t = 1..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileBand {
    pub kind: BandKind,
    pub q05: Vec<f64>,
    pub q25: Vec<f64>,
    pub q50: Vec<f64>,
    pub q75: Vec<f64>,
    pub q95: Vec<f64>,
    pub mean: Vec<f64>,
}

impl QuantileBand {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// `date,q05,q25,mean,q75,q95`, one row per time index.
    pub fn to_csv(&self, dates: &[NaiveDate]) -> Result<String, SummaryError> {
        if dates.len() != self.len() {
            return Err(SummaryError::Misaligned { band: self.len(), dates: dates.len() });
        }
        let mut out = String::from("date,q05,q25,mean,q75,q95\n");
        for (i, d) in dates.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                d.format(ISO_DATE),
                self.q05[i],
                self.q25[i],
                self.mean[i],
                self.q75[i],
                self.q95[i]
            ));
        }
        Ok(out)
    }
}

/// Quantile band of `kind` over `t = 1..=T`, aligned with the observations.
pub fn band(draws: &PosteriorDraws, kind: BandKind) -> Result<QuantileBand, SummaryError> {
    if draws.is_empty() {
        return Err(SummaryError::Empty);
    }
    let t = draws.n_obs;
    if t == 0 {
        return Err(SummaryError::NoLatent);
    }
    let stats: Vec<[f64; 6]> = (1..=t)
        .into_par_iter()
        .map(|i| {
            let mut v = match kind {
                BandKind::Scale => draws.pooled(draws.h_index(i)).into_iter().map(|h| (0.5 * h).exp()).collect(),
                BandKind::Lambda => draws.pooled(draws.lambda_index(i)),
                BandKind::Gamma => draws.pooled(draws.lambda_index(i)).into_iter().map(skewness_gamma).collect(),
            };
            v.sort_by(f64::total_cmp);
            [
                quantile_sorted(&v, 0.05),
                quantile_sorted(&v, 0.25),
                quantile_sorted(&v, 0.5),
                quantile_sorted(&v, 0.75),
                quantile_sorted(&v, 0.95),
                mean(&v),
            ]
        })
        .collect();
    let col = |k: usize| stats.iter().map(|s| s[k]).collect::<Vec<f64>>();
    Ok(QuantileBand { kind, q05: col(0), q25: col(1), q50: col(2), q75: col(3), q95: col(4), mean: col(5) })
}

/// Posterior mean of `λ_t` (or of `exp(h_t/2)`) for `t = 1..=T`.
pub fn latent_mean(draws: &PosteriorDraws, kind: BandKind) -> Result<Vec<f64>, SummaryError> {
    Ok(band(draws, kind)?.mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::N_STATIC;
    use crate::sampler::ChainDraws;

    /// Draws whose rows are produced by `row(k)`.
    fn pseudo(t: usize, n: usize, row: impl Fn(usize) -> Vec<f64>) -> PosteriorDraws {
        let values: Vec<f64> = (0..n).flat_map(&row).collect();
        PosteriorDraws {
            names: crate::sampler::draw_names(t),
            n_obs: t,
            thin: 1,
            chains: vec![ChainDraws { chain_id: 0, rows: n, values, accept_rate: 0.8, divergences: 0, step_size: 0.1 }],
            config_hash: String::new(),
            data_hash: String::new(),
        }
    }

    #[test]
    fn type7_hand_values() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert!((quantile(&v, 0.05) - 5.95).abs() < 1e-12);
        assert!((quantile(&v, 0.95) - 95.05).abs() < 1e-12);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 100.0);
        assert_eq!(quantile(&[3.0], 0.3), 3.0);
    }

    #[test]
    fn constant_draws_collapse() {
        let d = pseudo(4, 50, |_| vec![1.25; crate::model::dim(4)]);
        let s = static_summary(&d, "US").unwrap();
        for (_, values) in s.rows() {
            assert!(values.iter().all(|&v| v == 1.25));
        }
        let b = band(&d, BandKind::Lambda).unwrap();
        for q in [&b.q05, &b.q25, &b.q50, &b.q75, &b.q95, &b.mean] {
            assert!(q.iter().all(|&v| v == 1.25));
        }
    }

    #[test]
    fn table_layout() {
        let d = pseudo(2, 10, |k| vec![k as f64; crate::model::dim(2)]);
        let s = static_summary(&d, "US").unwrap();
        let names: Vec<&str> = s.rows().map(|(r, _)| r.as_str()).collect();
        assert_eq!(names, ["US q05", "US Mean", "US q95"]);
        assert_eq!(s.columns.len(), 5);
        let tex = s.to_latex(2);
        assert!(tex.contains(" & $\\mu_h$ & $\\phi_h$ & $\\sigma_h$ & $\\sigma_{\\lambda}$ & $\\alpha_{0}$ \\\\ \n"));
        assert!(tex.contains("US Mean & 4.50 & 4.50 & 4.50 & 4.50 & 4.50 \\\\ \n"));
        assert!(static_summary(&pseudo(2, 0, |_| vec![]), "US").is_err());
    }

    #[test]
    fn sigma_lambda_reported_in_absolute_value() {
        let d = pseudo(1, 20, |k| {
            let mut r = vec![0.0; crate::model::dim(1)];
            r[SIGMA_LAMBDA] = if k % 2 == 0 { -0.5 } else { 0.5 };
            r
        });
        let s = static_summary(&d, "X").unwrap();
        assert_eq!(s.get("X Mean", "$\\sigma_{\\lambda}$"), Some(0.5));
    }

    #[test]
    fn scale_band_of_constant_log_variance() {
        let c: f64 = 1.7;
        let d = pseudo(3, 10, |_| {
            let mut r = vec![0.0; crate::model::dim(3)];
            r[N_STATIC..N_STATIC + 4].iter_mut().for_each(|h| *h = 2.0 * c.ln());
            r
        });
        let b = band(&d, BandKind::Scale).unwrap();
        assert!(b.q05.iter().chain(&b.q95).all(|&v| (v - c).abs() < 1e-14));
        let g = band(&d, BandKind::Gamma).unwrap();
        assert!(g.q05.iter().chain(&g.q95).chain(&g.mean).all(|&v| v == 0.0));
    }

    #[test]
    fn gamma_band_is_transform_of_lambda_band() {
        // 101 draws so every quantile lands exactly on an order statistic
        let d = pseudo(5, 101, |k| {
            let mut r = vec![0.0; crate::model::dim(5)];
            for t in 1..=5 {
                r[N_STATIC + 5 + t] = ((k * 37 + t * 11) % 101) as f64 / 20.0 - 2.5;
            }
            r
        });
        let l = band(&d, BandKind::Lambda).unwrap();
        let g = band(&d, BandKind::Gamma).unwrap();
        for i in 0..5 {
            for (a, b) in [(&l.q05, &g.q05), (&l.q25, &g.q25), (&l.q50, &g.q50), (&l.q75, &g.q75), (&l.q95, &g.q95)] {
                assert!((skewness_gamma(a[i]) - b[i]).abs() < 1e-15);
            }
            assert!(l.q05[i] <= l.q25[i] && l.q25[i] <= l.q50[i] && l.q50[i] <= l.q75[i] && l.q75[i] <= l.q95[i]);
        }
    }

    #[test]
    fn band_csv_needs_matching_dates() {
        let d = pseudo(2, 5, |_| vec![0.0; crate::model::dim(2)]);
        let b = band(&d, BandKind::Lambda).unwrap();
        let dates = [NaiveDate::from_ymd_opt(2000, 1, 1).unwrap(), NaiveDate::from_ymd_opt(2000, 2, 1).unwrap()];
        let csv = b.to_csv(&dates).unwrap();
        assert!(csv.starts_with("date,q05,q25,mean,q75,q95\n2000-01-01,0,0,0,0,0\n"));
        assert!(b.to_csv(&dates[..1]).is_err());
        assert!("volume".parse::<BandKind>().is_err());
    }

    #[test]
    fn negative_zero_not_printed() {
        assert_eq!(fixed(-0.001, 2), "0.00");
        assert_eq!(fixed(-0.006, 2), "-0.01");
        assert_eq!(fixed(0.585, 1), "0.6");
    }
}
