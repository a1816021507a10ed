use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry parameters: {0}")]
    InvalidGeometry(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate triangle {index} (area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error("unsupported quadrature degree {0} (supported: 1..=20)")]
    UnsupportedDegree(usize),

    #[error("quadrature order must be at least 1")]
    InvalidOrder,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("density lives in {got:?}, expected {expected:?}")]
    SpaceMismatch {
        expected: crate::operators::Space,
        got: crate::operators::Space,
    },

    #[error("mass matrix is singular: {0}")]
    SingularMassMatrix(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("negative quadratic form {0:e} in energy norm")]
    NegativeEnergy(f64),

    #[error("singular local mass matrix on triangle {0}")]
    SingularLocalMass(usize),

    #[error("solver did not converge within {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("dimension {dim} exceeds the dense diagnostic limit {limit}")]
    TooLargeForDense { dim: usize, limit: usize },

    #[error("{rows} dense matrix rows exceed the configured cap of {cap}")]
    CapExceeded { rows: usize, cap: usize },

    #[error("at least {needed} records are required, got {got}")]
    InsufficientRecords { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

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
}
