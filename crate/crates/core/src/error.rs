use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rotation is within {det_i_plus_r:e} of a half-turn; CRP undefined")]
    SingularRotation { det_i_plus_r: f64 },

    #[error("matrix is not a proper rotation (orthogonality residual {residual:e}, det {det})")]
    NotARotation { residual: f64, det: f64 },

    #[error("singular matrix (det = {det:e})")]
    SingularMatrix { det: f64 },

    #[error("need at least 3 correspondences, got {0}")]
    TooFewCorrespondences(usize),

    #[error("degenerate geometry: normal matrix condition number {condition:e}")]
    DegenerateGeometry { condition: f64 },

    #[error("invalid correspondence: {0}")]
    InvalidCorrespondence(String),

    #[error("fixed-point divide by zero")]
    DivideByZero,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation error at line {line}: {reason}")]
    Validation { line: usize, reason: String },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("nothing to report")]
    NothingToReport,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerics (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularRotation { .. }
                | Error::SingularMatrix { .. }
                | Error::DegenerateGeometry { .. }
                | Error::DivideByZero
                | Error::DegenerateInput(_)
        )
    }
}
