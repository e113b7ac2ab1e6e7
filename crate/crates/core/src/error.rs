use thiserror::Error;

/// Errors raised by the simulator modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("degenerate beamforming system: {0}")]
    DegenerateSystem(String),

    #[error("singular covariance: {0}")]
    SingularCovariance(String),

    #[error("singular innovation covariance")]
    SingularInnovation,

    #[error("infeasible command: {0}")]
    InfeasibleCommand(String),

    #[error("replay buffer holds {have} experiences, batch needs {need}")]
    InsufficientBuffer { have: usize, need: usize },

    #[error("invalid value for `{key}`: {reason}")]
    Validation { key: String, reason: String },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("weights file: {0}")]
    Weights(String),

    #[error("missing trained weights for the gosc policy")]
    MissingWeights,

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
