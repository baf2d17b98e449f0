use thiserror::Error;

/// Errors raised by the planning toolkit.
#[derive(Debug, Error)]
pub enum PlanError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible route: no edge between waypoints {from} and {to}")]
    MissingEdge { from: usize, to: usize },

    #[error("unknown waypoint id {0}")]
    UnknownWaypoint(usize),

    #[error("waypoint {destination} is not reachable from waypoint {start}")]
    Disconnected { start: usize, destination: usize },

    #[error("non-finite cost {cost} at iteration {iteration} for particle {particle} (position {position:?})")]
    NonFiniteCost {
        iteration: usize,
        particle: usize,
        cost: f64,
        position: Vec<f64>,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, PlanError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(PlanError::Domain(msg.into()))
}
