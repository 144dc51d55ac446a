//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument or precondition violation.
    #[error("argument error: {0}")]
    Argument(String),

    /// A tuple left the admissible cone; carries the first failing
    /// `σ_m` index and its value so callers can steer line searches.
    #[error("cone violation: sigma_{m} = {value:.6e} is not positive")]
    ConeViolation { m: usize, value: f64 },

    /// A jet or field is not spacelike (`|Du| >= 1`).
    #[error("not spacelike: margin {margin:.6e} at {context}")]
    NotSpacelike { margin: f64, context: String },

    /// Numerical failure (eigensolver, projection, linear solver ...).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Bad run configuration (CLI flags, config file, grid sizing).
    #[error("config error: {0}")]
    Config(String),

    /// Lexer failure at a byte offset of the source expression.
    #[error("lex error at offset {offset}: {msg}")]
    Lex { offset: usize, msg: String },

    /// Parser failure at a byte offset of the source expression.
    #[error("parse error at offset {offset}: {msg}")]
    Parse { offset: usize, msg: String },

    /// Domain fault while evaluating an expression (log of a negative
    /// number, division by zero, ...), positioned at the offending node.
    #[error("evaluation error at offset {offset}: {msg}")]
    Eval { offset: usize, msg: String },

    /// Assembly failure at a concrete grid node.
    #[error("assembly error at node {node}: {source}")]
    Assembly {
        node: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: usage/config problems exit 2,
    /// mathematical and numerical failures exit 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Lex { .. } | Error::Parse { .. } => 2,
            _ => 1,
        }
    }
}
