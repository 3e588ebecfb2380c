use thiserror::Error;

pub type Result<T> = std::result::Result<T, WsrError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WsrError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index {index} out of range for {len} users/links")]
    IndexOutOfRange { index: usize, len: usize },

    /// The multiplier search did not meet its tolerance within the iteration cap.
    #[error("multiplier search failed after {iterations} iterations, bracket [{lo}, {hi}]")]
    SearchFailure { lo: f64, hi: f64, iterations: usize },

    #[error("numerically singular matrix: {0}")]
    Singular(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("serialization: {0}")]
    Serde(String),
}

impl From<serde_json::Error> for WsrError {
    fn from(e: serde_json::Error) -> Self {
        WsrError::Serde(e.to_string())
    }
}
