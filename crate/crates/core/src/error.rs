use std::fmt;

use crate::syntax::Name;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Byte offsets plus 1-based line and column of the start.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, PartialEq, Debug, thiserror::Error)]
pub enum Error {
    #[error("syntax error at {span}: {msg}")]
    Syntax { span: SourceSpan, msg: String },
    #[error("type error: {msg} (in `{term}`)")]
    Type { msg: String, term: String },
    #[error("unbound variable `{0}`")]
    Unbound(Name),
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("fuel exhausted after {0} steps")]
    FuelExhausted(u64),
    #[error("replay inconsistent at `{node}`: {reason}")]
    ReplayInconsistent { node: String, reason: String },
    #[error("path {path} does not address a part of {subject}")]
    PathMismatch { path: String, subject: String },
    #[error("incompatible patterns `{0}` and `{1}`")]
    Incompatible(String, String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub fn eval(msg: impl Into<String>) -> Error {
        Error::Eval(msg.into())
    }

    pub fn ty(msg: impl Into<String>, term: impl fmt::Display) -> Error {
        Error::Type { msg: msg.into(), term: term.to_string() }
    }
}
