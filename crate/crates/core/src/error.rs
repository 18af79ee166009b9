use thiserror::Error;

/// Errors raised by the numerical routines and the suite runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("argument {t} lies above the tabulated range (max {max})")]
    Extrapolation { t: f64, max: f64 },
    #[error("supremum not attained inside the search range at t = {t}")]
    Range { t: f64 },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("resource guard tripped: {0}")]
    ResourceGuard(String),
    #[error("could not bracket the norm: {0}")]
    Bracket(String),
    #[error("ill-conditioned result: {0}")]
    Conditioning(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
