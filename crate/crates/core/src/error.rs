use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("no goal compliant variables; operator-count heuristics do not apply")]
    NotApplicable,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("{0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
