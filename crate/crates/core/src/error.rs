//! Error types shared by every module of the engine.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("measurement out of window: {0}")]
    MeasurementOutOfWindow(String),

    #[error("infeasible target: {0}")]
    InfeasibleTarget(String),

    #[error("resolution limit: deepest achievable level is {max_level} ({reason})")]
    ResolutionLimit { max_level: u32, reason: String },

    #[error("search failure: {0}")]
    SearchFailure(String),

    #[error("scenario file error: {0}")]
    ScenarioFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
