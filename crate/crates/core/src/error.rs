use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a Chebyshev grid needs at least {min} points, got {n}")]
    GridTooSmall { n: usize, min: usize },

    #[error("unsupported collocation operator: {rows}x{cols} of order {order}")]
    UnsupportedOperator { rows: usize, cols: usize, order: u8 },

    #[error("interpolation query {0} lies outside [-1, 1]")]
    QueryOutOfRange(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite entry in row {row} of the discretized system")]
    NonFinite { row: usize },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("cannot build initial guess: {0}")]
    InvalidGuess(String),
}
