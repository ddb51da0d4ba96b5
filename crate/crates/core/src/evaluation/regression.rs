//! Conjugate normal–inverse-gamma regression of the posterior-mean shape
//! path on macro covariates.

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, Gamma, StudentsT};

use super::EvalError;
use crate::data_io::TimeSeries;
use crate::summaries::Table;

const MIN_OBS: usize = 10;

/// `β | σ² ~ N(0, σ² / precision · I)`, `σ² ~ IG(shape, scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionPrior {
    pub precision: f64,
    pub shape: f64,
    pub scale: f64,
}

impl Default for RegressionPrior {
    fn default() -> Self {
        Self { precision: 1e-4, shape: 0.01, scale: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionReport {
    pub label: String,
    /// `Intercept` followed by the covariate names.
    pub names: Vec<String>,
    pub q05: Vec<f64>,
    pub mean: Vec<f64>,
    pub q95: Vec<f64>,
    /// Posterior q05 / median / q95 of the residual standard deviation.
    pub sigma: [f64; 3],
    pub n_obs: usize,
}

/// Posterior of `y = X β + ε` with an intercept prepended to `columns`.
pub fn regress(
    label: &str,
    y: &[f64],
    columns: &[(String, Vec<f64>)],
    prior: &RegressionPrior,
) -> Result<RegressionReport, EvalError> {
    let n = y.len();
    let k = columns.len() + 1;
    if n < MIN_OBS {
        return Err(EvalError::TooFewObservations { need: MIN_OBS, have: n });
    }
    let x = DMatrix::from_fn(n, k, |i, j| if j == 0 { 1.0 } else { columns[j - 1].1[i] });
    let sv = x.clone().svd(false, false).singular_values;
    let top = sv.max();
    let rank = sv.iter().filter(|&&s| s > top * 1e-10).count();
    if rank < k {
        return Err(EvalError::RankDeficient { rank, cols: k });
    }

    let yv = DVector::from_column_slice(y);
    let xtx = x.transpose() * &x;
    let precision = &xtx + DMatrix::identity(k, k) * prior.precision;
    let chol = precision.cholesky().ok_or(EvalError::RankDeficient { rank, cols: k })?;
    let xty = x.transpose() * &yv;
    let m = chol.solve(&xty);
    let cov_unit = chol.inverse();
    let resid = &yv - &x * &m;
    // yᵀy − mᵀΛm written as residual plus shrinkage terms to avoid cancellation
    let quad = resid.dot(&resid) + prior.precision * m.dot(&m);
    let an = prior.shape + 0.5 * n as f64;
    let bn = prior.scale + 0.5 * quad;

    let mut q05 = Vec::with_capacity(k);
    let mut q95 = Vec::with_capacity(k);
    for j in 0..k {
        let scale = (bn / an * cov_unit[(j, j)]).sqrt();
        let t = StudentsT::new(m[j], scale, 2.0 * an).expect("valid Student-t");
        q05.push(t.inverse_cdf(0.05));
        q95.push(t.inverse_cdf(0.95));
    }
    // σ² = 1/G with G ~ Gamma(an, bn)
    let g = Gamma::new(an, bn).expect("valid gamma");
    let sigma = [0.05, 0.5, 0.95].map(|p| (1.0 / g.inverse_cdf(1.0 - p)).sqrt());

    let mut names = vec!["Intercept".to_string()];
    names.extend(columns.iter().map(|(name, _)| name.clone()));
    Ok(RegressionReport { label: label.to_string(), names, q05, mean: m.iter().copied().collect(), q95, sigma, n_obs: n })
}

/// Regresses the posterior-mean shape series on date-aligned covariates,
/// using each covariate's label as its coefficient name.
pub fn lambda_regression(
    lambda_mean: &TimeSeries,
    covariates: &[TimeSeries],
    label: &str,
    prior: &RegressionPrior,
) -> Result<RegressionReport, EvalError> {
    for c in covariates {
        if c.dates() != lambda_mean.dates() {
            return Err(EvalError::Misaligned { left: lambda_mean.label().to_string(), right: c.label().to_string() });
        }
    }
    let columns: Vec<(String, Vec<f64>)> = covariates.iter().map(|c| (c.label().to_string(), c.values().to_vec())).collect();
    regress(label, lambda_mean.values(), &columns, prior)
}

/// `{label} q05 / mean / q95` rows; coefficient columns are `Intercept`
/// then `$\beta_{name}$`.
pub fn regression_table(report: &RegressionReport) -> Table {
    let columns = report
        .names
        .iter()
        .enumerate()
        .map(|(j, n)| if j == 0 { n.clone() } else { format!("$\\beta_{{{n}}}$") })
        .collect();
    let l = &report.label;
    Table::new(
        columns,
        vec![
            (format!("{l} q05"), report.q05.clone()),
            (format!("{l} mean"), report.mean.clone()),
            (format!("{l} q95"), report.q95.clone()),
        ],
    )
}
