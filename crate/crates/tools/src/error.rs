use std::path::PathBuf;

use thiserror::Error;

/// Errors of the file layer and the command line. Each maps to a process
/// exit code through [`ToolError::exit_code`].
#[derive(Debug, Error)]
pub enum ToolError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {msg}", path.display())]
    Parse { path: PathBuf, msg: String },
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] tcn_core::Error),
    #[error("output differs from the reference pipeline: {0}")]
    OracleMismatch(String),
}

impl ToolError {
    pub fn parse(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        ToolError::Parse { path: path.into(), msg: msg.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ToolError::Io { path: path.into(), source }
    }

    /// 0 ok, 1 usage or parse, 2 out of memory, 3 oracle mismatch,
    /// 4 calibration failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            ToolError::Core(tcn_core::Error::Oom { .. } | tcn_core::Error::Infeasible { .. }) => 2,
            ToolError::Core(tcn_core::Error::Calibration(_)) => 4,
            ToolError::OracleMismatch(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, ToolError>;
