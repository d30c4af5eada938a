use thiserror::Error;

/// Errors produced anywhere in the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite coordinate")]
    NonFinite,

    #[error("chart inconsistency: {0}")]
    ChartInconsistency(String),

    #[error("integration diverged after {step} steps")]
    IntegrationDiverged { step: usize },

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("path touches obstacle set (safety radius {0})")]
    PathBlocked(f64),

    #[error("path planning failed: {0}")]
    PlanningFailed(String),

    #[error("set {index} leaked out of its target ({leaked} of {total} points)")]
    Containment {
        index: usize,
        leaked: usize,
        total: usize,
    },

    #[error("pipeline moved far-field probe by {0}")]
    FarFieldMoved(f64),

    #[error("point is off the manifold (residual {0})")]
    OffManifold(f64),

    #[error("network shape mismatch: {0}")]
    Shape(String),

    #[error("malformed document: {0}")]
    Document(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
