use pcinterp::ErrorClass;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("invalid configuration: {0}")]
    Schema(String),

    #[error(transparent)]
    Core(#[from] pcinterp::Error),

    #[error("verification failed: {0}")]
    Mismatch(String),
}

impl CliError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Schema(_) => 2,
            CliError::Core(e) => match e.class() {
                ErrorClass::Input => 2,
                ErrorClass::Hypothesis => 3,
                ErrorClass::Numerical => 4,
            },
            CliError::Mismatch(_) => 5,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Schema(e.to_string())
    }
}
