use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A cell or row in an input table could not be understood. `line` and
    /// `column` are 1-based positions in the file.
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: line {line}: expected {expected} fields, found {found}")]
    RowLength {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("duplicate gene id `{id}` at line {line}")]
    DuplicateGene { id: String, line: usize },

    #[error("duplicate sample name `{0}`")]
    DuplicateSample(String),

    #[error("label file names unknown sample `{0}`")]
    UnknownSample(String),

    #[error("sample `{0}` has no class label")]
    MissingLabel(String),

    #[error("class with zero samples: no {0} samples")]
    EmptyClass(&'static str),

    #[error("cannot read {path}: {source}")]
    UnreadableInput {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// True for errors caused by bad input (arguments, missing or malformed
    /// input files, labels), as opposed to output I/O or internal failures.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Internal(_))
    }
}
