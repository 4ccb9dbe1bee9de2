use std::path::PathBuf;

use resent_core::Error as CoreError;

/// Exit codes: 2 for configuration and usage errors, 3 for numerical
/// aborts, 1 when outputs cannot be written.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Output { .. } => 1,
        }
    }

    pub(crate) fn output(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Output { path: path.into(), source }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        if is_config_error(&e) {
            CliError::Config(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

/// Whether a core error stems from the inputs rather than from the
/// numerics.
pub fn is_config_error(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::Config(_) | CoreError::DimensionMismatch { .. } | CoreError::OutOfRange(_) | CoreError::InvalidInput(_)
    )
}

pub type Result<T> = std::result::Result<T, CliError>;
