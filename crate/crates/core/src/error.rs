use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// The stored prefix cannot answer the query soundly.
    #[error("horizon exceeded: {0}")]
    Horizon(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("no level of the type has block size {0}")]
    SizeMismatch(usize),
    #[error("inconsistent data: {0}")]
    Inconsistent(String),
    #[error("dense set {id}: {reason}")]
    DenseSet { id: String, reason: String },
    #[error("type requirement violated: {0}")]
    TypeRequirement(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// 1 property failure, 2 I/O, 3 invalid input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 2,
            Error::Inconsistent(_) | Error::DenseSet { .. } => 1,
            Error::Horizon(_) | Error::Invalid(_) | Error::SizeMismatch(_) | Error::TypeRequirement(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn horizon(msg: impl Into<String>) -> Error {
    Error::Horizon(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
