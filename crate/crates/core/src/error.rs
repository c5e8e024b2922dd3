use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("duplicate story_id {0:?}")]
    DuplicateStoryId(String),

    #[error("missing features for story ids: {}", .0.join(", "))]
    MissingFeatures(Vec<String>),

    #[error("embedding for story {story_id:?} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        story_id: String,
        expected: usize,
        found: usize,
    },

    #[error("embedding for story {0:?} contains a non-finite value")]
    NonFinite(String),

    #[error("embedding for story {0:?} has zero norm")]
    ZeroNorm(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("transform mismatch: credal sets were built under different transforms")]
    TransformMismatch,

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("missing artifact {0}")]
    MissingArtifact(PathBuf),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
