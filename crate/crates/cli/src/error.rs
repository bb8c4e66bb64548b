use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{}:{line}: {msg}", .file.display())]
    Input { file: PathBuf, line: u64, msg: String },

    #[error("i/o error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] fracp::Error),

    /// A computed result failed one of its own consistency checks.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    /// 2 for bad configuration or input, 3 for internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input { .. } | CliError::Io { .. } => 2,
            CliError::Core(fracp::Error::Degenerate(_)) | CliError::Invariant(_) => 3,
            CliError::Core(_) => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
