use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("SUS item {index} has value {value}, expected 1..=5")]
    OutOfRangeItem { index: usize, value: i64 },
    #[error("SUS response has {0} items, expected 10")]
    WrongItemCount(usize),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid group summary: {0}")]
    InvalidSummary(String),
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
