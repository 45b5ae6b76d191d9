use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config names no subcommand")]
    NoSubcommand,

    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("writing {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: aowqed_core::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NoSubcommand => 2,
            CliError::Schema { .. } | CliError::UnknownPreset(_) => 3,
            CliError::Io { .. } | CliError::Csv { .. } => 4,
            CliError::Numerical { .. } => 5,
        }
    }
}

/// Attach a module name to a core error.
pub trait Context<T> {
    fn context(self, what: &str) -> Result<T, CliError>;
}

impl<T> Context<T> for aowqed_core::Result<T> {
    fn context(self, what: &str) -> Result<T, CliError> {
        self.map_err(|source| {
            // validation failures point at a parameter; report them as schema errors
            if let aowqed_core::Error::Validation { field, reason } = &source {
                return CliError::Schema {
                    path: format!("params ({what}): {field}"),
                    message: reason.clone(),
                };
            }
            CliError::Numerical {
                context: what.to_string(),
                source,
            }
        })
    }
}
