//! SPARQL* queries: parsing, scope checking, syntax expansion, translation
//! to the algebra, and execution.
//!
//! The supported fragment is `SELECT` (a variable list or `*`) over a group
//! of triple statements, `OPTIONAL`, `UNION`, nested groups, `FILTER` with
//! `bound`, `=`, `!=`, `!`, `&&` and `||`, and `BIND` of a constant, a
//! variable or an embedded triple pattern. Embedded triple patterns
//! (`<< s p o >>`) may appear as subject or object and never contain blank
//! nodes. Property paths other than a single IRI are rejected.
//!
//! ```
//! use rdfstar::sparql::execute_query;
//! use rdfstar::turtle::parse_turtlestar;
//!
//! let data = parse_turtlestar(r#"
//!     @prefix : <http://example.org/> .
//!     <<:bob :age 23>> :source :listing .
//! "#, None)?.graph.freeze();
//! let results = execute_query(r#"
//!     PREFIX : <http://example.org/>
//!     SELECT ?age WHERE { <<:bob :age ?age>> :source ?src }
//! "#, &data)?;
//! assert_eq!(results.solutions.total(), 1);
//! # Ok::<_, Box<dyn std::error::Error>>(())
//! ```

mod ast;
mod expand;
mod parser;
mod scope;
mod translate;

pub use ast::*;
pub use expand::expand_syntax;
pub use parser::parse_query;
pub use scope::{check_scope, ScopeReport};
pub use translate::{lift, translate, TranslatedQuery};

use crate::engine::{evaluate, SolutionMultiset};
use crate::lexical::SourcePosition;
use crate::query::Variable;
use crate::store::FrozenGraph;
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{position}: {kind}")]
pub struct ParseError {
    pub position: SourcePosition,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("unsupported feature: {0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScopeViolation {
    pub variable: Variable,
    pub position: SourcePosition,
    pub message: String,
}

impl fmt::Display for ScopeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: BIND target {} {}",
            self.position, self.variable, self.message
        )
    }
}

/// One or more `BIND` targets that were already in scope.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ScopeError {
    pub violations: Vec<ScopeViolation>,
}

impl fmt::Display for ScopeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            v.fmt(f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{position}: {kind}")]
pub struct ExpandError {
    pub position: SourcePosition,
    pub kind: ExpandErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpandErrorKind {
    #[error("undeclared prefix '{0}:'")]
    UnknownPrefix(String),
    #[error("invalid IRI <{iri}>: {reason}")]
    InvalidIri { iri: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{position}: {message}")]
pub struct TranslateError {
    pub position: SourcePosition,
    pub message: String,
}

/// Any failure of [`prepare_query`], labelled with its stage.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("scope error at {0}")]
    Scope(#[from] ScopeError),
    #[error("expansion error at {0}")]
    Expand(#[from] ExpandError),
    #[error("translation error at {0}")]
    Translate(#[from] TranslateError),
}

impl QueryError {
    pub fn stage(&self) -> &'static str {
        match self {
            QueryError::Parse(_) => "parse",
            QueryError::Scope(_) => "scope",
            QueryError::Expand(_) => "expansion",
            QueryError::Translate(_) => "translation",
        }
    }

    /// Where the first problem was found.
    pub fn position(&self) -> SourcePosition {
        match self {
            QueryError::Parse(e) => e.position,
            QueryError::Scope(e) => e
                .violations
                .first()
                .map_or(SourcePosition::START, |v| v.position),
            QueryError::Expand(e) => e.position,
            QueryError::Translate(e) => e.position,
        }
    }
}

/// Query solutions restricted to the projected variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryResults {
    pub variables: Vec<Variable>,
    pub solutions: SolutionMultiset,
}

/// Parses, checks, expands and translates a query.
pub fn prepare_query(text: &str) -> Result<TranslatedQuery, QueryError> {
    let ast = parse_query(text)?;
    check_scope(&ast)?;
    let expanded = expand_syntax(&ast)?;
    Ok(translate(&expanded)?)
}

impl TranslatedQuery {
    pub fn execute(&self, graph: &FrozenGraph) -> QueryResults {
        let vars: BTreeSet<Variable> = self.projection.iter().cloned().collect();
        QueryResults {
            variables: self.projection.clone(),
            solutions: evaluate(&self.algebra, graph).project(&vars),
        }
    }
}

pub fn execute_query(text: &str, graph: &FrozenGraph) -> Result<QueryResults, QueryError> {
    Ok(prepare_query(text)?.execute(graph))
}
