use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// bad input: malformed data, out-of-range parameters, unsupported fields
    #[error("validation error: {0}")]
    Validation(String),
    #[error("parse error: {0}")]
    Parse(String),
    /// mathematically degenerate input (singular Gram, zero Gauss sum, ...)
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
