use thiserror::Error;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("extreme points {0} and {1} coincide")]
    DuplicateExtremePoint(usize, usize),

    #[error("invalid weights: {0}")]
    InvalidWeights(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("cost matrix is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },

    #[error("infeasible marginals: row mass {row_total} vs column mass {col_total}")]
    Infeasible { row_total: f64, col_total: f64 },

    #[error("coupling marginals violated by {max_error:e}")]
    MarginalMismatch { max_error: f64 },

    #[error("regularization must be positive and finite, got {0}")]
    InvalidEpsilon(f64),

    #[error("interpolation time {0} outside [0, 1]")]
    TimeOutOfRange(f64),

    #[error("sample size {requested} exceeds available {available}")]
    SampleTooLarge { requested: usize, available: usize },

    #[error("window around day {0} contains no records")]
    EmptyWindow(i64),

    #[error("transportation simplex exceeded {0} pivots")]
    PivotLimit(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
