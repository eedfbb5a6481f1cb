use patchknn_client::ClientError;
use patchknn_core::Error;

/// Process exit codes. Zero means full success.
pub mod exit {
    pub const USAGE: u8 = 2;
    pub const IO: u8 = 3;
    pub const IMAGE: u8 = 4;
    pub const PARAMS: u8 = 5;
    pub const INDEX_FORMAT: u8 = 6;
    pub const SERVICE: u8 = 7;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] Error),

    #[error("{0}")]
    Client(#[from] ClientError),

    #[error("{0}")]
    Usage(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                Error::Decode(_) | Error::EmptyInput(_) => exit::IMAGE,
                Error::InvalidPatchSize { .. }
                | Error::OutOfBounds { .. }
                | Error::InvalidParams(_) => exit::PARAMS,
                Error::Io { .. } => exit::IO,
                Error::Format(_) => exit::INDEX_FORMAT,
            },
            CliError::Client(_) => exit::SERVICE,
            CliError::Usage(_) => exit::USAGE,
            CliError::Io { .. } => exit::IO,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
