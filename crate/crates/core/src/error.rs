use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("divergent: {0}")]
    Divergent(String),
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    #[error("singular parameter: {0}")]
    SingularParameter(String),
    #[error("evaluation failed: {0}")]
    Evaluation(String),
    #[error("no propagation front: {0}")]
    NoFront(String),
    #[error("resource guard: {0}")]
    ResourceGuard(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
    #[error("configuration: {0}")]
    Configuration(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
