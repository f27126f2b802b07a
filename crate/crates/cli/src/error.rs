use thiserror::Error;

/// Exit status contract: 0 success, 1 usage, 2 data, 3 internal.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(anyhow::Error),
    #[error(transparent)]
    Internal(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    /// The reader of stdout went away, as with `actortrace ... | head`.
    pub fn is_broken_pipe(&self) -> bool {
        let (CliError::Data(e) | CliError::Internal(e)) = self else { return false };
        e.chain()
            .filter_map(|c| c.downcast_ref::<std::io::Error>())
            .any(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    }

    pub fn data(e: impl Into<anyhow::Error>) -> Self {
        CliError::Data(e.into())
    }

    pub fn internal(e: impl Into<anyhow::Error>) -> Self {
        CliError::Internal(e.into())
    }
}

impl From<actortrace_core::Error> for CliError {
    fn from(e: actortrace_core::Error) -> Self {
        match e {
            actortrace_core::Error::InvalidArgument(m) => CliError::Usage(m),
            other => CliError::Data(other.into()),
        }
    }
}

impl From<actortrace_learn::LearnError> for CliError {
    fn from(e: actortrace_learn::LearnError) -> Self {
        CliError::Data(e.into())
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
