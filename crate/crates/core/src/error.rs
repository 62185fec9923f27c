use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters or configuration documents.
    #[error("config error: {0}")]
    Config(String),

    /// An index or pull count outside the domain of the queried object.
    #[error("range error: {0}")]
    Range(String),

    /// An operation was called in the wrong phase of a policy's lifecycle.
    #[error("state error: {0}")]
    State(String),

    /// The optimal arm at the target budget is not unique.
    #[error("degenerate instance: {0}")]
    Degenerate(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }

    /// Whether the error stems from user-provided configuration rather than
    /// a failure while running.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Json { .. })
    }
}
