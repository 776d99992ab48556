use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("zero octonion has no sign")]
    ZeroSign,

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("no dominant eigenvector: matrix is zero")]
    NoDominantEigenvector,

    #[error("degenerate measurements: all intensities are zero")]
    DegenerateMeasurements,

    #[error("divergence: reduce step scale (non-finite objective at iteration {iteration})")]
    Divergence { iteration: usize },

    #[error("alignment undefined (orthogonal)")]
    AlignmentUndefined,

    #[error("alignment undefined: reference signal is zero")]
    ZeroReference,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed image file: {0}")]
    MalformedImage(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
