use std::fmt;

use thiserror::Error;

/// 1-based line/column position in KKIR source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: malformed atom `{token}`")]
    MalformedAtom { pos: Pos, token: String },
    #[error("{pos}: arity mismatch: {msg}")]
    Arity { pos: Pos, msg: String },
    #[error("{pos}: atom `{atom}` is not in the universe")]
    UnknownAtom { pos: Pos, atom: String },
    #[error("{pos}: duplicate relation `{name}`")]
    DuplicateRelation { pos: Pos, name: String },
    #[error("{pos}: unknown relation or variable `{name}`")]
    UnknownName { pos: Pos, name: String },
    #[error("{pos}: variable `{name}` shadows {what}")]
    Shadowing {
        pos: Pos,
        name: String,
        what: &'static str,
    },
    #[error("empty universe")]
    EmptyUniverse,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error("cannot resolve column sorts: {0}")]
    Sorts(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScopeError {
    #[error("no scope known for sort `{0}`")]
    MissingScope(String),
    #[error("scope of sort `{0}` is zero")]
    ZeroScope(String),
    #[error("quantifier expansion exceeded the node budget of {budget}")]
    Budget { budget: usize },
}

/// Top-level error for the parse → translate → scope pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Scope(#[from] ScopeError),
    #[error("ill-sorted theory: {0}")]
    IllSorted(String),
}
