use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid body: {0}")]
    InvalidBody(String),

    #[error("interior point: the inner normal is only defined for exterior points")]
    InteriorPoint,

    #[error("ray origin lies inside the body")]
    OriginInside,

    #[error("ray direction has zero length")]
    ZeroDirection,

    #[error("matrix is not antisymmetric (max |J + Jᵀ| = {0:e})")]
    NotAntisymmetric(f64),

    #[error("matrix is not symmetric (max |H - Hᵀ| = {0:e})")]
    NotSymmetric(f64),

    #[error("normal vector is not unit length (norm = {0})")]
    NonUnitNormal(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty minibatch")]
    EmptyBatch,

    #[error("index {index} out of range for dataset of size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("batch size {batch} exceeds dataset size {len}")]
    BatchTooLarge { batch: usize, len: usize },

    #[error("rejection sampler exceeded {cap} proposals after accepting {accepted}")]
    RejectionCapExceeded { cap: u64, accepted: usize },

    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("missing required column `{0}`")]
    MissingColumn(String),

    #[error("chain {chain} left the finite range at step {step}")]
    NonFinite { chain: usize, step: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Whether the error stems from invalid user input rather than a failure
    /// while running.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Io { .. }
                | Error::Csv(_)
                | Error::RejectionCapExceeded { .. }
                | Error::NonFinite { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
