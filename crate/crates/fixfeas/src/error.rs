use thiserror::Error;

/// Failures split by exit code: configuration problems exit 2, everything else 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error(transparent)]
    Runtime(#[from] anyhow::Error),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl ToString) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Maps a core error raised while building something from `field`.
pub(crate) fn at(field: impl Into<String>) -> impl FnOnce(fixfeas_core::Error) -> CliError {
    let field = field.into();
    move |e| CliError::config(field, e)
}
