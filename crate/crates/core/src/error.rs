//! Error type shared by every pipeline stage.

use thiserror::Error;

/// Failures raised by geometry, transform, filtering and I/O routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate neighborhood at point {index}: {reason}")]
    DegenerateNeighborhood { index: usize, reason: &'static str },

    #[error("non-positive Voronoi area {area:e} at point {index}")]
    NonPositiveArea { index: usize, area: f64 },

    #[error("eigensolver failed: {0}")]
    EigensolveFailure(String),

    #[error("harmonic matrix is not orthogonal (residual {residual:e})")]
    NotOrthogonal { residual: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("sampling set is rank deficient (sigma_min {sigma_min:e}, sigma_max {sigma_max:e})")]
    RankDeficient { sigma_min: f64, sigma_max: f64 },

    #[error("chaotic sequence diverged at iteration {iteration}")]
    ChaosDiverged { iteration: usize },

    #[error("filter system matrix is singular")]
    SingularSystem,

    #[error("radar cube is empty")]
    EmptyCube,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by bad input or configuration rather than
    /// by numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::IndexOutOfRange { .. }
                | Error::EmptyCube
                | Error::InvalidParameter(_)
                | Error::Parse { .. }
                | Error::UnsupportedFormat(_)
                | Error::Io(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
