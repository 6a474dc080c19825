use std::process::ExitCode;

/// Failure of a command, split by exit status: bad invocations and
/// unreadable inputs exit with 2, well-formed inputs that fail a physical or
/// coverage check exit with 1.
#[derive(Debug)]
pub enum CliError {
    Usage(anyhow::Error),
    Validation(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Validation(_) => ExitCode::from(1),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(e) | CliError::Validation(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<focusplan::Error> for CliError {
    fn from(e: focusplan::Error) -> Self {
        match e {
            focusplan::Error::Format(_) => CliError::Usage(e.into()),
            _ => CliError::Validation(e.into()),
        }
    }
}
