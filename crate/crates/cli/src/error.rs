use skewsv::evaluation::EvalError;
use skewsv::summaries::SummaryError;
use skewsv::{DataError, ModelError, SamplerError};
use thiserror::Error;

pub const EXIT_GENERAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_DATA: i32 = 4;
pub const EXIT_CONVERGENCE: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Data(_) => EXIT_DATA,
            CliError::Convergence(_) => EXIT_CONVERGENCE,
            CliError::Other(_) => EXIT_GENERAL,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Config(_) | ModelError::InvalidParams(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<SummaryError> for CliError {
    fn from(e: SummaryError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<SamplerError> for CliError {
    fn from(e: SamplerError) -> Self {
        match e {
            SamplerError::Config(_) | SamplerError::InsufficientDraws { .. } => CliError::Config(e.to_string()),
            SamplerError::Initialization(_) | SamplerError::AllDivergent { .. } => CliError::Convergence(e.to_string()),
            SamplerError::Model(m) => m.into(),
            SamplerError::Format(_) | SamplerError::Data(_) => CliError::Data(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Data(d) => d.into(),
            EvalError::Sampler(s) => s.into(),
            EvalError::Summary(s) => s.into(),
            EvalError::DateNotFound(_) | EvalError::WindowTooShort { .. } | EvalError::NoOutOfSample => {
                CliError::Config(e.to_string())
            }
            EvalError::TooFewObservations { .. } | EvalError::RankDeficient { .. } | EvalError::Misaligned { .. } => {
                CliError::Data(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}
