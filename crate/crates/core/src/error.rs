use thiserror::Error;

use crate::polynomial::Term;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An enumeration or matrix size would exceed a configured cap.
    #[error("resource limit: {what} requires {required}, cap `{cap}` is {limit}")]
    ResourceLimit {
        what: String,
        cap: &'static str,
        required: usize,
        limit: usize,
    },

    #[error("incomplete data: missing correlation values for {}", format_terms(.missing))]
    IncompleteData { missing: Vec<Term> },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },

    #[error("numerical integrity: {0}")]
    NumericalIntegrity(String),

    #[error("not tabulated: {0}")]
    NotTabulated(String),

    #[error("inconsistent input: {0}")]
    InconsistentInput(String),

    /// A recomputed value disagrees with its stored closed form.
    #[error("integrity check failed: {0}")]
    Integrity(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}

fn format_terms(terms: &[Term]) -> String {
    terms
        .iter()
        .map(|t| t.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}
