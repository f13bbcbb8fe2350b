use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum PlannerError {
    #[error(transparent)]
    Model(#[from] efe_core::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = PlannerError> = std::result::Result<T, E>;

impl PlannerError {
    /// 3 for guard violations, 2 for invalid input, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            PlannerError::Model(e) if e.is_guard() => 3,
            PlannerError::Model(_) | PlannerError::Config(_) | PlannerError::Parse { .. } => 2,
            _ => 1,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        PlannerError::Config(msg.into())
    }
}
