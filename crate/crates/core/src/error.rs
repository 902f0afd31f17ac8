use thiserror::Error;

/// Errors raised while building or diagonalizing dressed-matter models.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("{what} dimension {dim} exceeds the limit of {limit}")]
    Size {
        what: &'static str,
        dim: usize,
        limit: usize,
    },
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("zone error: {0}")]
    Zone(String),
}

pub type Result<T> = std::result::Result<T, Error>;
