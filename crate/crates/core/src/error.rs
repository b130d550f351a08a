use thiserror::Error;

/// Errors raised by the library and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("index {index} out of range for series of order {order}")]
    OutOfRange { index: usize, order: usize },
    #[error("size {n} exceeds the enumeration limit {limit}")]
    SizeLimitExceeded { n: usize, limit: usize },
    #[error("target {target} is unreachable: {detail}")]
    UnreachableTarget { target: f64, detail: String },
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("unsupported order {order}: {detail}")]
    UnsupportedOrder { order: usize, detail: String },
    #[error("outside the scope of the limit theorem: {0}")]
    Scope(String),
    #[error("rejection budget of {attempts} attempts exhausted; use the exact DP sampler")]
    RejectionBudgetExhausted { attempts: u64 },
    #[error("size {n} exceeds the DP budget {budget}")]
    BudgetExceeded { n: usize, budget: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
