//! Error split that drives the process exit code: bad input versus a
//! failure while doing the work.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid flags, config values, or input files; exit code 2.
    #[error("{0}")]
    Usage(String),
    /// The computation itself failed; exit code 1.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

/// Analysis errors split by blame: a sample or configuration the caller can
/// fix is usage; solver or numeric trouble is runtime.
impl From<jsrbound::scenario::ScenarioError> for CliError {
    fn from(e: jsrbound::scenario::ScenarioError) -> Self {
        use jsrbound::scenario::ScenarioError as E;
        match e {
            E::InvalidConfig(_) | E::InvalidSample(_) | E::SampleTooSmall { .. } => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<jsrbound::whitebox::WhiteboxError> for CliError {
    fn from(e: jsrbound::whitebox::WhiteboxError) -> Self {
        use jsrbound::whitebox::WhiteboxError as E;
        match e {
            E::Invalid(_) | E::Budget { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<jsrbound::sysmodel::ModelError> for CliError {
    fn from(e: jsrbound::sysmodel::ModelError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
