use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({x}, {y}) lies outside the arena")]
    OutsideArena { x: f64, y: f64 },

    #[error("could not place {robots} robots without overlap after {attempts} samples")]
    InitializationFailure { robots: usize, attempts: usize },

    #[error("unknown mission `{0}`")]
    UnknownMission(String),

    #[error("invalid mission: {0}")]
    InvalidMission(String),

    #[error("invalid controller: {0}")]
    InvalidController(String),

    #[error("trace has {actual} states, mission expects {expected}")]
    TraceMismatch { expected: usize, actual: usize },

    #[error("expected {expected} robots, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("arena diameter must be positive, got {0}")]
    NonpositiveDiameter(f64),

    #[error("feature expectation requires at least one sample")]
    EmptySample,

    #[error("feature dimensions disagree: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("demonstration feature expectation is not separable from the policy feature expectations")]
    DegenerateMargin,

    #[error("invalid demonstration: {0}")]
    InvalidDemonstration(String),

    #[error("invalid budget: {0}")]
    InvalidBudget(String),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse { path: path.into(), message: message.to_string() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
