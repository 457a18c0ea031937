use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(gainsense_core::Error),
    #[error("{0}")]
    Selftest(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("output encoding: {0}")]
    Encode(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Numerical(_) => 3,
            Self::Selftest(_) => 4,
            Self::Io(_) | Self::Encode(_) => 1,
        }
    }
}

impl From<gainsense_core::Error> for CliError {
    fn from(e: gainsense_core::Error) -> Self {
        match e {
            gainsense_core::Error::UnsupportedProbe(_) => Self::Usage(e.to_string()),
            other => Self::Numerical(other),
        }
    }
}

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}
