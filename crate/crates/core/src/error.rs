use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not positive definite (quadratic form {value:e})")]
    NotPositiveDefinite { value: f64 },

    #[error("matrix has no nonzero entries")]
    ZeroMatrix,

    #[error("column index {col} out of range in row {row}")]
    IndexOutOfRange { row: usize, col: usize },

    #[error("singular matrix: pivot {pivot:e} at position {index}")]
    Singular { index: usize, pivot: f64 },

    #[error("Jacobi SVD did not converge after {sweeps} sweeps (off-diagonal residual {off:e})")]
    SvdNoConvergence { sweeps: usize, off: f64 },

    #[error("breakdown: normalization vanished at step {step}")]
    Breakdown { step: usize },

    #[error("pivot collapse at d[{index}] = {value:e}")]
    PivotCollapse { index: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dense diagnostic limited to dimension {cap}, got {dim}")]
    SizeCap { cap: usize, dim: usize },

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("missing input file {0}")]
    MissingFile(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
