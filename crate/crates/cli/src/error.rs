use taxoprompt::backend::BackendError;
use taxoprompt::cohypo::CohypoError;
use taxoprompt::datasets::DatasetError;
use taxoprompt::iterative::IterativeError;
use taxoprompt::metrics::MetricError;
use taxoprompt::prompts::PromptError;
use taxoprompt::scoring::ScoringError;

/// CLI failures, classified by exit code: configuration problems exit 2,
/// backend failures (after retries) exit 3.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("backend failure: {0}")]
    Backend(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Backend(_) => 3,
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config(message.into())
    }
}

impl From<BackendError> for CliError {
    fn from(e: BackendError) -> Self {
        match e {
            BackendError::Transport { .. }
            | BackendError::Protocol { .. }
            | BackendError::MissingEntry { .. } => CliError::Backend(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<ScoringError> for CliError {
    fn from(e: ScoringError) -> Self {
        match e {
            ScoringError::Backend(inner) => inner.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<IterativeError> for CliError {
    fn from(e: IterativeError) -> Self {
        match e {
            IterativeError::Aborted { source, .. } => (*source).into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<CohypoError> for CliError {
    fn from(e: CohypoError) -> Self {
        match e {
            CohypoError::Scoring(inner) => inner.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<PromptError> for CliError {
    fn from(e: PromptError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o failure: {e}"))
    }
}
