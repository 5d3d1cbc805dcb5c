use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Unified error type for the whole pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("channel {index} value {value} exceeds the 12-bit ADC range")]
    ChannelOutOfRange { index: usize, value: u16 },

    #[error("need at least {required} samples, got {actual}")]
    InsufficientData { required: usize, actual: usize },

    #[error("mixture component {component} collapsed (no responsibility mass)")]
    DegenerateComponent { component: usize },

    #[error("input-block covariance is singular; cannot condition on it")]
    SingularInputCovariance,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("contact position ({x}, {y}) lies outside the board")]
    PositionOutOfBoard { x: f64, y: f64 },

    #[error("malformed frame: {0}")]
    InvalidFrame(String),

    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },

    #[error("unsupported format version {found:?}, expected {expected:?}")]
    VersionMismatch { found: String, expected: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
