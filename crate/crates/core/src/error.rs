use thiserror::Error;

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unsupported scheme: {0}")]
    UnsupportedScheme(String),

    #[error("too many aborted drops: {aborted} of {total}")]
    TooManyAborts { aborted: usize, total: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SimError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        SimError::Config(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        SimError::Dimension(msg.into())
    }
}
