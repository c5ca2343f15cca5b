use std::path::PathBuf;

use cfrac::{CicfError, FunctionalError, IicfError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("numerical breakdown: {0}")]
    Breakdown(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Breakdown(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<CicfError> for CliError {
    fn from(e: CicfError) -> Self {
        match e {
            CicfError::Breakdown { .. } | CicfError::Pole(_) => CliError::Breakdown(e.to_string()),
            CicfError::InvalidInput(_) | CicfError::DuplicateNodes(..) => {
                CliError::Config(e.to_string())
            }
        }
    }
}

impl From<FunctionalError> for CliError {
    fn from(e: FunctionalError) -> Self {
        match e {
            FunctionalError::Eval(_) => CliError::Breakdown(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<IicfError> for CliError {
    fn from(e: IicfError) -> Self {
        match e {
            IicfError::Functional(inner) => inner.into(),
            IicfError::NotConstant(_) | IicfError::Level { .. } | IicfError::GridIndex { .. } => {
                CliError::Config(e.to_string())
            }
            IicfError::Cicf(inner) => inner.into(),
            _ => CliError::Breakdown(e.to_string()),
        }
    }
}
