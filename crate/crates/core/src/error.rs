//! Error type shared across the crate.

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("mixed variable sets: expected {expected} variables, found {found}")]
    MixedVariables { expected: usize, found: usize },

    #[error("the zero element has no valuation")]
    ZeroElement,

    #[error("flag not applicable: {0}")]
    FlagInapplicable(String),

    #[error("degree {degree} exceeds certified truncation {truncation}")]
    Truncation { degree: u32, truncation: u32 },

    #[error("exact convex volume unsupported in dimension {0} (supported: 1..=3)")]
    UnsupportedDimension(usize),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("graded piece of degree {0} is zero")]
    ZeroPiece(u32),

    #[error("empty sequence")]
    EmptySequence,

    #[error("window {window} exceeds sequence length {len}")]
    WindowTooLarge { window: usize, len: usize },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
