use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid token id {0}")]
    InvalidToken(u32),

    #[error("invalid vocabulary: {0}")]
    InvalidVocab(String),

    #[error("domain `{0}` has no documents")]
    DomainEmpty(String),

    #[error("document is empty after cleaning")]
    EmptyDocument,

    #[error("text has {len} characters, shorter than shingle size {shingle_n}")]
    TooShort { len: usize, shingle_n: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed tool call at byte {offset}: {reason}")]
    MalformedToolCall { offset: usize, reason: String },

    #[error("malformed chat text at byte {offset}: {reason}")]
    MalformedChat { offset: usize, reason: String },

    #[error("reasoning content supplied in non-reasoning mode")]
    ModeConflict,

    #[error("content cannot be represented on the wire: {0}")]
    ContentViolation(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the error signals a broken internal invariant rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Internal(_))
    }
}
