use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed spectrum file. `row` and `col` are 1-based; `col` is absent
    /// for whole-row problems.
    #[error("{path}: row {row}{}: {msg}", .col.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        path: PathBuf,
        row: usize,
        col: Option<usize>,
        msg: String,
    },

    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid band: {0}")]
    InvalidBand(String),

    #[error("band [{lo}, {hi}] lies outside the grid range [{min}, {max}]")]
    BandOutOfRange {
        lo: f64,
        hi: f64,
        min: f64,
        max: f64,
    },

    #[error("range of width {width} cannot host {count} bands of width {min_width}")]
    RangeTooNarrow {
        width: f64,
        count: usize,
        min_width: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("kernel matrix not positive definite even with nugget {nugget:e}")]
    Cholesky { nugget: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A convergence bound was requested outside the regime where it holds.
    #[error("bound not valid: {0}")]
    BoundNotValid(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
