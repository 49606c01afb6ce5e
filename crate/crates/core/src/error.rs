use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: invalid record: {message}")]
    Validation { line: usize, message: String },

    #[error("duplicate handle {handle:?}")]
    DuplicateHandle { handle: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown feature {0:?}")]
    UnknownFeature(String),

    #[error("unknown learner {name:?}; registered learners: {registered}")]
    UnknownLearner { name: String, registered: String },

    #[error("degenerate test: {0}")]
    DegenerateTest(String),

    #[error("model has not been fitted")]
    NotFitted,

    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("unsupported checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input or configuration rather than an
    /// internal failure. The CLI maps these to exit code 2.
    pub fn is_usage(&self) -> bool {
        !matches!(self, Error::NotFitted | Error::Diverged { .. })
    }
}
