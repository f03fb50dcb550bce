//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    /// A value or gradient evaluation produced a non-finite number.
    #[error("non-finite result while evaluating {context}")]
    Evaluation { context: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed box bounds: lo must be <= hi coordinatewise")]
    BadBounds,

    #[error("unknown objective name: {0}")]
    UnknownObjective(String),

    #[error("point lies outside the declared domain")]
    OutsideDomain,

    #[error("trajectory parse error at line {line}: {msg}")]
    TrajectoryParse { line: usize, msg: String },

    #[error(transparent)]
    Tuning(#[from] TuningError),
}

/// Raised by the theoretical-parameter calculator when one of its eight
/// formula items evaluates to a nonpositive or non-finite number. `item` is
/// the 1-based index of the offending formula.
#[derive(Debug, Error)]
#[error("theoretical parameter item {item} evaluated to {value}, which is not positive and finite")]
pub struct TuningError {
    pub item: usize,
    pub value: f64,
}

pub type CoreResult<T> = Result<T, CoreError>;
