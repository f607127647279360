use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("not anomalous: nearest-neighbor distance {distance} does not exceed threshold {threshold}")]
    NotAnomalous { distance: f64, threshold: f64 },

    #[error("no operators enabled")]
    NoOperators,

    #[error("corruption out of bounds: {0}")]
    OutOfBounds(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("{path}: line {line}: {message}")]
    Csv {
        path: String,
        line: u64,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors caused by the input data rather than by how the
    /// library was called.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Degenerate(_)
                | Error::LengthMismatch { .. }
                | Error::NonFinite { .. }
                | Error::TooShort { .. }
                | Error::NotAnomalous { .. }
                | Error::Csv { .. }
                | Error::Io(_)
                | Error::Json(_)
        )
    }
}
