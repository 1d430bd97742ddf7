use std::path::PathBuf;

/// Everything that stops a command before it can report results.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config {path}: {source}")]
    ConfigParse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] pointer_collapse_core::Error),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot read {path}: {source}")]
    Input {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    /// Process exit code: 2 for anything that is not a failed check.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
