use thiserror::Error;

use crate::geometry::Side;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid domain, potential or run configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("epsilon exceeds slope gap: epsilon = {epsilon}, gap = {gap}")]
    EpsilonExceedsGap { epsilon: f64, gap: f64 },

    #[error("parameter {value} out of range [{lo}, {hi}] for side {side}")]
    Range {
        side: Side,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("side {0} is not a graph over x")]
    NotAGraph(Side),

    #[error("mesh quality error: {0}")]
    MeshQuality(String),

    #[error("no boundary edges tagged {0}")]
    Tagging(Side),

    #[error("weight 1 - w_eps is not positive (min {min})")]
    InvalidWeight { min: f64 },

    #[error("element index {index} out of range ({count} elements)")]
    ElementIndex { index: usize, count: usize },

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("eigensolver did not converge after {steps} Lanczos steps (worst residual {residual:e})")]
    NotConverged { steps: usize, residual: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line front-end: 2 for configuration
    /// problems, 1 for numerical or I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::EpsilonExceedsGap { .. } | Error::Precondition(_) => 2,
            Error::InvalidWeight { .. } | Error::Range { .. } | Error::NotAGraph(_) => 2,
            _ => 1,
        }
    }
}
