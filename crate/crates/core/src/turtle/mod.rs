//! Turtle* reading and writing, plus N-Triples output for unfolded graphs.
//!
//! Turtle* is Turtle where `<< s p o >>` may stand in the subject or object
//! position of a triple. Inside `<< >>` the subject is an IRI, a blank node
//! or another embedded triple, the predicate is an IRI, and the object may
//! additionally be a literal. Collections and blank node property lists are
//! only available outside embedded triples.

mod parser;
mod serializer;

pub use parser::{parse_turtlestar, TurtleStarParser};
pub use serializer::{serialize_ntriples, serialize_turtlestar, TermFormatter};

use crate::lexical::SourcePosition;
use crate::model::{Iri, StarGraph};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// The outcome of a successful parse.
#[derive(Debug, Clone)]
pub struct ParseResult {
    pub graph: StarGraph,
    pub prefixes: BTreeMap<String, Iri>,
    /// The base IRI in effect at the end of the document.
    pub base: Option<Iri>,
    /// Non-fatal findings; never contains errors.
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub position: SourcePosition,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{}: {label}: {}", self.position, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{position}: {kind}")]
pub struct TurtleError {
    pub position: SourcePosition,
    pub kind: TurtleErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TurtleErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("a literal cannot be the subject of a triple")]
    LiteralSubject,
    #[error("embedded triples are nested deeper than the limit of {limit}")]
    NestingTooDeep { limit: usize },
    #[error("undeclared prefix '{0}:'")]
    UnknownPrefix(String),
    #[error("invalid IRI <{iri}>: {reason}")]
    InvalidIri { iri: String, reason: String },
}

impl TurtleError {
    pub fn diagnostic(&self) -> Diagnostic {
        Diagnostic {
            severity: Severity::Error,
            position: self.position,
            message: self.kind.to_string(),
        }
    }
}
