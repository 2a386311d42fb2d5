use thiserror::Error;

/// Everything a subcommand can fail with, mapped onto exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or arguments the parser could not reject by itself.
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// A document did not match its schema; `pointer` locates the problem.
    #[error("{path}: invalid document at {pointer}: {message}")]
    Schema {
        path: String,
        pointer: String,
        message: String,
    },
    #[error(transparent)]
    Core(#[from] canonbase::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
