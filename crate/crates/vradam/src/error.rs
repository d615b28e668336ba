use std::io;
use std::path::PathBuf;

use crate::data::DataError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] vradam_core::Error),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A verification or invariant check that ran and failed.
    #[error("check failed: {0}")]
    Check(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit status: 1 check failure, 2 usage or configuration,
    /// 3 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io { .. } | Error::Data(DataError::Io { .. }) => 3,
            Error::Check(_) | Error::Internal(_) => 1,
            Error::Core(e) => match e.root_cause() {
                vradam_core::Error::BoundViolation { .. } | vradam_core::Error::NonFinite(_) => 1,
                _ => 2,
            },
            Error::Data(_) | Error::Config(_) | Error::Argument(_) | Error::Range(_) => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
