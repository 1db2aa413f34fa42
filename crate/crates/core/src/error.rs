use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("singular r-update: |1 - {quantity}| = {value:e} is below 1e-14")]
    SingularUpdate { quantity: &'static str, value: f64 },

    #[error("singular block system (reciprocal condition estimate {rcond:e})")]
    SingularMatrix { rcond: f64 },

    #[error("ill-posed symbol pair at frequency {frequency:?}: determinant {det:e} below floor {floor:e}")]
    IllPosedSymbol {
        frequency: Vec<i64>,
        det: f64,
        floor: f64,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("invalid mobility splitting: J2 = {j2:e} < 0 ({hint})")]
    InvalidSplitting { j2: f64, hint: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("monitor aborted at step {step}: {reason}")]
    MonitorAbort { step: usize, reason: String },

    #[error("comparison failed: {0}")]
    Compare(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by user input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config { .. } | Error::InvalidParameter(_) | Error::Json(_) => true,
            Error::AtStep { source, .. } => source.is_config(),
            _ => false,
        }
    }

    /// Strips step context, if any.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
