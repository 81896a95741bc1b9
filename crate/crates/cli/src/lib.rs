//! Config-driven experiments and the acceptance suite behind the `diskdyn`
//! binary.

pub mod commands;
pub mod config;
pub mod report;
pub mod suite;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Compute {
        context: &'static str,
        #[source]
        source: diskdyn::Error,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 0 is reserved for success; computational failures and failed
    /// criteria give 1, config errors 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Attaches module context to a core error.
pub trait Context<T> {
    fn context(self, what: &'static str) -> Result<T, CliError>;
}

impl<T> Context<T> for diskdyn::Result<T> {
    fn context(self, what: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Compute { context: what, source })
    }
}
