use thiserror::Error;

/// Errors raised by the reconstruction toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point {index} at ({x}, {y}) lies outside the grid")]
    OutOfDomain { index: usize, x: f64, y: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("duplicate points at indices {first} and {second}")]
    DuplicatePoint { first: usize, second: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no valid samples in field")]
    EmptyField,

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("solver diverged after {iterations} iterations (residual {residual:.3e})")]
    Divergence { iterations: usize, residual: f64 },

    #[error("training diverged at epoch {epoch}: non-finite loss")]
    TrainingDiverged { epoch: usize },

    #[error("boundary is not a closed loop: {0}")]
    OpenBoundary(String),

    #[error("coincident points: {0}")]
    CoincidentPoints(String),

    #[error("rank deficient system: effective rank {rank} of {n}")]
    RankDeficient { rank: usize, n: usize },

    #[error("no overlapping valid samples")]
    NoOverlap,

    #[error("ground truth is identically zero")]
    DegenerateNormalization,

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
