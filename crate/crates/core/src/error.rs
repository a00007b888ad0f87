use thiserror::Error;

/// Errors raised across model construction, propagation, assembly and sampling.
#[derive(Debug, Error)]
pub enum ItqdeError {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("resource limit exceeded: {what} ({requested} > {limit})")]
    ResourceLimit {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("singular partition function at prefix m={m} (|Z|={magnitude:e})")]
    SingularPartition { m: usize, magnitude: f64 },

    #[error("no steady state: every value in the window is flagged")]
    NoSteadyState,

    #[error("incompatible inversion grid: {0}")]
    IncompatibleGrid(String),

    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ItqdeError>;

impl ItqdeError {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl ItqdeError {
    /// Process exit code: 2 for bad input, 3 for resource caps, 4 when no
    /// steady state or partition function can be formed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::InvalidModel(_)
            | Self::Validation(_)
            | Self::Parameter(_)
            | Self::IncompatibleGrid(_)
            | Self::Config { .. } => 2,
            Self::ResourceLimit { .. } => 3,
            Self::SingularPartition { .. } | Self::NoSteadyState => 4,
            Self::Io(_) | Self::Json(_) => 1,
        }
    }
}
