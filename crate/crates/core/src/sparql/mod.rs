//! Lexing, parsing and printing of the supported SPARQL subset.
//!
//! The subset is `SELECT` (no `DISTINCT`) over one group of triple patterns,
//! any number of single-level `OPTIONAL` blocks, at most one `FILTER`, and the
//! `ORDER BY` / `LIMIT` / `OFFSET` modifiers. `PREFIX` declarations are
//! expanded before tokenization. Anything else is rejected with
//! [`SparqlError::Unsupported`] rather than ignored.

mod ast;
mod lexer;
mod parser;

pub use ast::*;
pub use lexer::{tokenize, Position, Token, TokenKind};
pub use parser::{expand_prefixes, parse, parse_query};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SparqlError {
    #[error("lex error at {position}: {message}")]
    Lex { message: String, position: Position },
    #[error("parse error at {position}: expected {expected}, found {found}")]
    Parse {
        expected: String,
        found: String,
        position: Position,
    },
    #[error("unsupported feature at {position}: {feature}")]
    Unsupported { feature: String, position: Position },
}

impl SparqlError {
    pub fn position(&self) -> Position {
        match self {
            SparqlError::Lex { position, .. }
            | SparqlError::Parse { position, .. }
            | SparqlError::Unsupported { position, .. } => *position,
        }
    }
}
