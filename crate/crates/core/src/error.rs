use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate slice at z = {0}")]
    DegenerateSlice(f64),

    #[error("invalid tiling: {0}")]
    InvalidTiling(String),

    #[error("unsupported block {index}: out-degree {degree}, expected 2")]
    UnsupportedBlock { index: usize, degree: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-absorbing cycle among core blocks {component:?}")]
    NonAbsorbingCycle { component: Vec<usize> },

    #[error("flow did not converge (residual core mass {residual:e})")]
    NotConverged { residual: f64 },

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("malformed STL: {0}")]
    MalformedStl(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
