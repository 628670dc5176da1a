use thiserror::Error;

/// Library-wide error type.
///
/// `Validation` covers ill-formed states and out-of-range parameters,
/// `Degeneracy` covers axis-selection rules invoked on states where the rule
/// is undefined and the policy forbids a fallback, `Guard` covers tripped
/// numerical safety bounds.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("degenerate input: {0}")]
    Degeneracy(String),
    #[error("numerical guard tripped: {0}")]
    Guard(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
