use thiserror::Error;

use crate::cost::CostError;
use crate::scene::SceneError;

/// Failures of graph construction and routing.
#[derive(Debug, Error)]
pub enum RouteError {
    #[error("terminal ({x}, {y}) is outside the area")]
    TerminalOutsideArea { x: f64, y: f64 },
    #[error("terminal ({x}, {y}) is inside obstacle '{obstacle}'")]
    TerminalInsideObstacle { x: f64, y: f64, obstacle: String },
    #[error("terminal ({x}, {y}) is in no area and cannot reach any gate")]
    TerminalUnreachable { x: f64, y: f64 },
    #[error("no path exists: {0}")]
    NoPathExists(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("external network: {0}")]
    Network(String),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Cost(#[from] CostError),
}
