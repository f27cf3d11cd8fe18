use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Input outside the documented parameter range.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// Operands of different lengths.
    #[error("length mismatch: {left} vs {right} variables")]
    LengthMismatch { left: u32, right: u32 },
    /// A formula evaluated outside the region where it is defined.
    #[error("outside domain: {0}")]
    Domain(String),
    /// The request would exceed a memory or enumeration guard.
    #[error("resource guard: {0}")]
    Resource(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    /// Process exit status used by the command-line frontend.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Resource(_) => 3,
            _ => 2,
        }
    }
}
