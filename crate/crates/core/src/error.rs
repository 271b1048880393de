use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid radar configuration: {field}: {reason}")]
    Config { field: &'static str, reason: String },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid scene: {0}")]
    Scene(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("unsupported size: {0}")]
    Size(String),

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("fixed-point error: {0}")]
    Fixed(String),

    #[error("{path}:{line}: {reason}")]
    Parse { path: String, line: usize, reason: String },

    #[error("capture format error at byte {offset}: {reason}")]
    Capture { offset: u64, reason: String },

    #[error("model file error at byte {offset}: {reason}")]
    Model { offset: u64, reason: String },

    #[error("unknown preset '{name}'; available: {available}")]
    UnknownPreset { name: String, available: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config { field, reason: reason.into() }
    }
}
