use immigration_core::Error as CoreError;

/// Process exit status. No other values are ever returned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Pass = 0,
    Usage = 1,
    Reject = 2,
    Warning = 3,
}

impl Exit {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    /// Exit status for a run that ended in this error.
    ///
    /// Core parameter errors are configuration errors. A non-absorbed
    /// birth-death path signals a possibly infinite expected lifetime and is
    /// a hypothesis warning. Truncation failures are handled by the commands.
    pub fn exit(&self) -> Exit {
        match self {
            CliError::Core(e) => match e.root_cause() {
                CoreError::NonAbsorbed { .. } => Exit::Warning,
                CoreError::Truncation(_) => Exit::Reject,
                _ => Exit::Usage,
            },
            _ => Exit::Usage,
        }
    }
}
