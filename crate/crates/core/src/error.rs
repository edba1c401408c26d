use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("factorization failure: {0}")]
    FactorizationFailure(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("degenerate column `{0}`: sample variance below 1e-12")]
    DegenerateColumn(String),
    #[error("chain diverged at sweep {sweep}: {detail}")]
    DivergedChain { sweep: usize, detail: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate truth: {0}")]
    DegenerateTruth(String),
    #[error("undefined variance: {0}")]
    UndefinedVariance(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
