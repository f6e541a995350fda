//! Error type shared by the whole engine.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CoreError {
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("series ring mismatch: {0}")]
    RingMismatch(String),

    #[error("hbar window overflow: power {power} outside [{min}, {max}]")]
    WindowOverflow { power: i32, min: i32, max: i32 },

    #[error("polynomial degree overflow: degree {degree} exceeds bound {bound}")]
    DegreeOverflow { degree: usize, bound: usize },

    #[error("singular linear part, degenerate directions: {0:?}")]
    SingularLinearPart(Vec<String>),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
