use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    /// A numerics error, tagged with the pipeline stage it came from.
    #[error("{stage}: {source}")]
    Numeric {
        stage: String,
        #[source]
        source: tripent::Error,
    },

    #[error("validation: {0}")]
    Validation(String),

    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    /// 2 for configuration and usage problems, 3 for numeric or validation
    /// failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Numeric { .. } | CliError::Validation(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub trait StageExt<T> {
    fn stage(self, stage: impl Into<String>) -> Result<T>;
}

impl<T> StageExt<T> for tripent::Result<T> {
    fn stage(self, stage: impl Into<String>) -> Result<T> {
        self.map_err(|source| CliError::Numeric {
            stage: stage.into(),
            source,
        })
    }
}
