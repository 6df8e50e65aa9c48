use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AmalgamError {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("GNS representation is not faithful: kernel of dimension {kernel_dim} (quotient carrier dimension {carrier_dim})")]
    GnsNotFaithful { carrier_dim: usize, kernel_dim: usize },

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("cap error: word length {word_len} exceeds truncation cap {cap}")]
    Cap { word_len: usize, cap: usize },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown example `{0}`")]
    UnknownExample(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, AmalgamError>;
