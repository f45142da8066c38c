//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix dimensions must be at least 1x1, got {rows}x{cols}")]
    EmptyDimensions { rows: usize, cols: usize },

    #[error("matrix dimensions {rows}x{cols} overflow the addressable index range")]
    DimensionOverflow { rows: usize, cols: usize },

    #[error("data length {len} does not match matrix dimensions {rows}x{cols}")]
    DataLengthMismatch { rows: usize, cols: usize, len: usize },

    #[error("cannot multiply {lhs_rows}x{lhs_cols} by {rhs_rows}x{rhs_cols}: inner dimensions differ")]
    ShapeMismatch {
        lhs_rows: usize,
        lhs_cols: usize,
        rhs_rows: usize,
        rhs_cols: usize,
    },

    #[error("tile size must be at least 1")]
    ZeroTile,

    #[error("worker count must be at least 1")]
    ZeroWorkers,

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row} has {found} columns, expected {expected}")]
    RaggedRow {
        path: String,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: row {row}, column {col}: cannot parse {token:?} as a number")]
    CsvParse {
        path: String,
        row: usize,
        col: usize,
        token: String,
    },

    #[error("uniform input u1 = {0} is outside the open interval (0, 1)")]
    UniformOutOfRange(f64),

    #[error("quantile probability p = {0} is outside the open interval (0, 1)")]
    QuantileDomain(f64),

    #[error("invalid power-analysis parameter: {0}")]
    InvalidPowerParams(String),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("invalid experiment plan: {0}")]
    InvalidPlan(String),

    #[error("{path}: line {line}: {message}")]
    PlanParse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}: line {line}: {message}")]
    TrialParse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("monotonic clock returned a non-positive duration")]
    ClockFailure,

    #[error("unknown kernel variant {0:?}")]
    UnknownVariant(String),

    #[error("unknown report format {0:?} (expected csv, json, or md)")]
    UnknownFormat(String),

    #[error("invalid size specification {0:?} (expected N or M:N:P with positive integers)")]
    InvalidSize(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the error stems from malformed user input rather than a
    /// runtime failure; the CLI maps these to exit code 2.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::UnknownVariant(_)
                | Error::UnknownFormat(_)
                | Error::InvalidSize(_)
                | Error::EmptyDimensions { .. }
                | Error::InvalidPlan(_)
                | Error::PlanParse { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
