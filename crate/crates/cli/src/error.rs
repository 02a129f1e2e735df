use funcint::engine::EngineError;
use funcint::kernelalg::KernelError;
use funcint::wick::WickError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(EngineError),
    #[error("{0}")]
    Semantic(String),
    #[error("{0}")]
    Input(String),
    #[error("cannot write output: {0}")]
    Output(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Parse(_) | CliError::Input(_) => 2,
            CliError::Semantic(_) => 3,
            CliError::Output(_) => 1,
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Syntax { .. } | EngineError::UnknownToken { .. } => CliError::Parse(e),
            EngineError::MissingBinding(_) | EngineError::DimensionMismatch { .. } | EngineError::Kernel(_) => {
                CliError::Input(e.to_string())
            }
            other => CliError::Semantic(other.to_string()),
        }
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<WickError> for CliError {
    fn from(e: WickError) -> Self {
        CliError::Usage(e.to_string())
    }
}
