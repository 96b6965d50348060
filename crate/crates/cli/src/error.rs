use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Tolerance(String),
    #[error("{0}")]
    Resolution(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Tolerance(_) | CliError::Resolution(_) => 3,
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> Self {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }
}

impl From<garouter_core::Error> for CliError {
    fn from(e: garouter_core::Error) -> Self {
        match e {
            garouter_core::Error::InsufficientResolution(_) => CliError::Resolution(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
