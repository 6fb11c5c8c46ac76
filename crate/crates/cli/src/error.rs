use dyadic_kinetics::Error;

/// Failures of a command, split by exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad arguments or configuration; exit status 2.
    #[error("{0}")]
    Usage(String),
    /// A numerical assertion or computation failed; exit status 3.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidGrid(_)
            | Error::InvalidParameter(_)
            | Error::OutsideWindow { .. }
            | Error::UnknownName { .. }
            | Error::Parse(_)
            | Error::Io(_)
            | Error::InadmissibleStep(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("i/o error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
