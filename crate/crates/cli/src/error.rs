use std::path::PathBuf;

use squidcav_core::Error as CoreError;

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_VERIFICATION: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error{}: {message}", at(pointer))]
    Config { pointer: String, message: String },

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: CoreError,
    },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn at(pointer: &str) -> String {
    if pointer.is_empty() {
        String::new()
    } else {
        format!(" at {pointer}")
    }
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn config(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { pointer: pointer.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => EXIT_CONFIG,
            CliError::Verification(_) => EXIT_VERIFICATION,
            CliError::Io { .. } => EXIT_IO,
            CliError::Core { source, .. } => match source {
                CoreError::Verification(_) => EXIT_VERIFICATION,
                CoreError::BoundaryLeak { .. }
                | CoreError::NotConverged { .. }
                | CoreError::StepUnderflow { .. }
                | CoreError::PositivityLoss { .. } => EXIT_NUMERIC,
                _ => EXIT_CONFIG,
            },
        }
    }
}

/// Attaches a context string to core errors.
pub trait Context<T> {
    fn context(self, context: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T> Context<T> for Result<T, CoreError> {
    fn context(self, context: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|source| CliError::Core { context: context(), source })
    }
}
