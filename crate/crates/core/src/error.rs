//! Crate-wide error type.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced anywhere in the pipeline.
#[derive(Debug)]
pub enum Error {
    /// A configuration value is out of range or inconsistent with the method.
    InvalidConfig(String),
    /// An input violates an operation's preconditions.
    InvalidInput(String),
    /// A file could not be parsed. `line` is 1-based when known.
    Format { line: Option<usize>, msg: String },
    /// A class is too small for the requested fold count.
    Stratification(String),
    /// Training diverged or could not proceed.
    Training(String),
    /// A model container is corrupt, truncated, or from an unknown version.
    Container(String),
    Io(std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn format(line: impl Into<Option<usize>>, msg: impl Into<String>) -> Self {
        Error::Format { line: line.into(), msg: msg.into() }
    }

    pub fn container(msg: impl Into<String>) -> Self {
        Error::Container(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidConfig(msg) => write!(f, "invalid config: {msg}"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Format { line: Some(line), msg } => write!(f, "format error at line {line}: {msg}"),
            Error::Format { line: None, msg } => write!(f, "format error: {msg}"),
            Error::Stratification(msg) => write!(f, "stratification error: {msg}"),
            Error::Training(msg) => write!(f, "training error: {msg}"),
            Error::Container(msg) => write!(f, "container error: {msg}"),
            Error::Io(err) => write!(f, "io error: {err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err)
    }
}
