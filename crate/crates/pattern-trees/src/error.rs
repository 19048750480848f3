//! Error type shared across the crate.
//!
//! Variants are grouped by how the CLI reports them: `Parse` and `Data`
//! are bad inputs, `Guard` is a refused oversized computation, and
//! `Integrity` is an internal consistency failure (broken basis,
//! checksum mismatch, non-integer profile solve).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid data: {0}")]
    Data(String),
    #[error("guard exceeded: {0}")]
    Guard(String),
    #[error("integrity failure: {0}")]
    Integrity(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the CLI: 2 data, 3 integrity, 4 guard.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Data(_) | Error::Io(_) => 2,
            Error::Integrity(_) => 3,
            Error::Guard(_) => 4,
        }
    }
}
