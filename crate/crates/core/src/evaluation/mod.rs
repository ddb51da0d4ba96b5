//! Empirical procedures built on fitted posteriors: expanding-window sign
//! forecasts, regression of the posterior-mean shape on covariates, and
//! return statistics split by volatility regime.

mod forecast;
mod regime;
mod regression;

use thiserror::Error;

use crate::data_io::DataError;
use crate::sampler::SamplerError;
use crate::summaries::SummaryError;

pub use forecast::{expanding_window_eval, forecast_table, max_table_rhat, ForecastRecord, ForecastReport, Outcome, WindowOptions, RHAT_LIMIT};
pub use regime::{regime_split, regime_stats, regime_table, RegimeReport, RegimeStats};
pub use regression::{lambda_regression, regress, regression_table, RegressionPrior, RegressionReport};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Summary(#[from] SummaryError),
    #[error("date {0} is not in the series")]
    DateNotFound(chrono::NaiveDate),
    #[error("first window has {have} observations, need at least {need}")]
    WindowTooShort { need: usize, have: usize },
    #[error("no out-of-sample observation after the first window")]
    NoOutOfSample,
    #[error("regression needs at least {need} observations, has {have}")]
    TooFewObservations { need: usize, have: usize },
    #[error("design matrix is rank deficient (rank {rank} of {cols})")]
    RankDeficient { rank: usize, cols: usize },
    #[error("series {left:?} and {right:?} are not date-aligned")]
    Misaligned { left: String, right: String },
}
