use super::{Diagnostic, ParseResult, Severity, TurtleError, TurtleErrorKind};
use crate::lexical::{Cursor, LexError, SourcePosition};
use crate::model::{
    BlankNode, Iri, Literal, ModelError, StarGraph, StarTerm, StarTriple, DEFAULT_MAX_NESTING,
};
use crate::vocab::{rdf, xsd};
use std::collections::{BTreeMap, HashMap, HashSet};

const GROUPING_IN_TRIPLE: &str =
    "collections and blank node property lists are not allowed in embedded triples";

/// Guards recursion through `[ ... ]` and `( ... )`.
const MAX_GROUPING_DEPTH: usize = 1024;

/// Configurable Turtle* parser.
///
/// ```
/// use rdfstar::turtle::TurtleStarParser;
///
/// let doc = r#"
///     @prefix : <http://example.org/> .
///     <<:bob :age 23>> :source :listing .
/// "#;
/// let parsed = TurtleStarParser::new().parse(doc)?;
/// assert_eq!(parsed.graph.len(), 1);
/// assert_eq!(parsed.graph.embedded_triples().len(), 1);
/// # Ok::<_, rdfstar::turtle::TurtleError>(())
/// ```
#[derive(Debug, Clone)]
pub struct TurtleStarParser {
    base: Option<Iri>,
    max_nesting: usize,
}

impl Default for TurtleStarParser {
    fn default() -> Self {
        Self::new()
    }
}

impl TurtleStarParser {
    pub fn new() -> Self {
        Self {
            base: None,
            max_nesting: DEFAULT_MAX_NESTING,
        }
    }

    pub fn with_base(mut self, base: Iri) -> Self {
        self.base = Some(base);
        self
    }

    pub fn with_max_nesting(mut self, max_nesting: usize) -> Self {
        self.max_nesting = max_nesting;
        self
    }

    pub fn parse(&self, input: &str) -> Result<ParseResult, TurtleError> {
        let mut parser = Parser {
            cur: Cursor::new(input),
            base: self.base.clone(),
            prefixes: BTreeMap::new(),
            graph: StarGraph::new(),
            bnodes: BlankNodeAllocator::default(),
            max_nesting: self.max_nesting,
            grouping_depth: 0,
            diagnostics: Vec::new(),
        };
        parser.document()?;
        Ok(ParseResult {
            graph: parser.graph,
            prefixes: parser.prefixes,
            base: parser.base,
            diagnostics: parser.diagnostics,
        })
    }
}

/// Parses a Turtle* document with default settings.
pub fn parse_turtlestar(input: &str, base: Option<&Iri>) -> Result<ParseResult, TurtleError> {
    let mut parser = TurtleStarParser::new();
    if let Some(base) = base {
        parser = parser.with_base(base.clone());
    }
    parser.parse(input)
}

/// Keeps document labels when possible and never hands out the same label
/// for two different nodes.
#[derive(Default)]
struct BlankNodeAllocator {
    used: HashSet<String>,
    document: HashMap<String, BlankNode>,
    counter: usize,
}

impl BlankNodeAllocator {
    fn fresh(&mut self) -> BlankNode {
        loop {
            self.counter += 1;
            let label = format!("b{}", self.counter);
            if self.used.insert(label.clone()) {
                return BlankNode::new(label).expect("generated label is valid");
            }
        }
    }

    fn labelled(&mut self, label: &str) -> BlankNode {
        if let Some(b) = self.document.get(label) {
            return b.clone();
        }
        let node = if self.used.insert(label.to_owned()) {
            BlankNode::new(label).expect("lexer only produces valid labels")
        } else {
            self.fresh()
        };
        self.document.insert(label.to_owned(), node.clone());
        node
    }
}

struct Parser<'a> {
    cur: Cursor<'a>,
    base: Option<Iri>,
    prefixes: BTreeMap<String, Iri>,
    graph: StarGraph,
    bnodes: BlankNodeAllocator,
    max_nesting: usize,
    grouping_depth: usize,
    diagnostics: Vec<Diagnostic>,
}

type PResult<T> = Result<T, TurtleError>;

impl From<LexError> for TurtleError {
    fn from(e: LexError) -> Self {
        TurtleError {
            position: e.position,
            kind: TurtleErrorKind::Syntax(e.message),
        }
    }
}

impl<'a> Parser<'a> {
    fn error<T>(&self, position: SourcePosition, kind: TurtleErrorKind) -> PResult<T> {
        Err(TurtleError { position, kind })
    }

    fn syntax<T>(&self, message: impl Into<String>) -> PResult<T> {
        self.error(self.cur.position(), TurtleErrorKind::Syntax(message.into()))
    }

    fn model_error(&self, position: SourcePosition, e: ModelError) -> TurtleError {
        let kind = match e {
            ModelError::LiteralSubject => TurtleErrorKind::LiteralSubject,
            ModelError::NestingTooDeep { limit, .. } => TurtleErrorKind::NestingTooDeep { limit },
            ModelError::InvalidIri { iri, reason } => TurtleErrorKind::InvalidIri {
                iri,
                reason: reason.to_owned(),
            },
            other => TurtleErrorKind::Syntax(other.to_string()),
        };
        TurtleError { position, kind }
    }

    fn document(&mut self) -> PResult<()> {
        loop {
            self.cur.skip_ws();
            if self.cur.is_eof() {
                return Ok(());
            }
            self.statement()?;
        }
    }

    fn statement(&mut self) -> PResult<()> {
        if self.cur.starts_with("@prefix") {
            self.cur.bump_n("@prefix".len());
            self.prefix_decl()?;
            self.end_of_statement()
        } else if self.cur.starts_with("@base") {
            self.cur.bump_n("@base".len());
            self.base_decl()?;
            self.end_of_statement()
        } else if self.cur.at_keyword("PREFIX") {
            self.cur.bump_n("PREFIX".len());
            self.prefix_decl()
        } else if self.cur.at_keyword("BASE") {
            self.cur.bump_n("BASE".len());
            self.base_decl()
        } else {
            self.triples()?;
            self.end_of_statement()
        }
    }

    fn end_of_statement(&mut self) -> PResult<()> {
        self.cur.skip_ws();
        if self.cur.eat('.') {
            Ok(())
        } else {
            self.syntax(format!("expected '.', found {}", self.cur.describe_next()))
        }
    }

    fn prefix_decl(&mut self) -> PResult<()> {
        self.cur.skip_ws();
        let at = self.cur.position();
        let (prefix, local) = self.cur.read_pname()?;
        if !local.is_empty() {
            return self.error(
                at,
                TurtleErrorKind::Syntax("expected a prefix name ending in ':'".into()),
            );
        }
        self.cur.skip_ws();
        let iri_at = self.cur.position();
        let raw = self.cur.read_iriref()?;
        let namespace = self.resolve(&raw, iri_at)?;
        if let Some(old) = self.prefixes.insert(prefix.clone(), namespace.clone()) {
            if old != namespace {
                self.diagnostics.push(Diagnostic {
                    severity: Severity::Warning,
                    position: at,
                    message: format!("prefix '{prefix}:' redefined"),
                });
            }
        }
        Ok(())
    }

    fn base_decl(&mut self) -> PResult<()> {
        self.cur.skip_ws();
        let at = self.cur.position();
        let raw = self.cur.read_iriref()?;
        self.base = Some(self.resolve(&raw, at)?);
        Ok(())
    }

    fn resolve(&self, raw: &str, at: SourcePosition) -> PResult<Iri> {
        let resolved = match &self.base {
            Some(base) => {
                let base = oxiri::Iri::parse(base.as_str()).map_err(|e| TurtleError {
                    position: at,
                    kind: TurtleErrorKind::InvalidIri {
                        iri: base.as_str().to_owned(),
                        reason: e.to_string(),
                    },
                })?;
                base.resolve(raw)
                    .map_err(|e| TurtleError {
                        position: at,
                        kind: TurtleErrorKind::InvalidIri {
                            iri: raw.to_owned(),
                            reason: e.to_string(),
                        },
                    })?
                    .into_inner()
            }
            None => raw.to_owned(),
        };
        Iri::new(resolved).map_err(|e| self.model_error(at, e))
    }

    fn prefixed(&self, at: SourcePosition, prefix: &str, local: &str) -> PResult<Iri> {
        let Some(ns) = self.prefixes.get(prefix) else {
            return self.error(at, TurtleErrorKind::UnknownPrefix(prefix.to_owned()));
        };
        Iri::new(format!("{}{}", ns.as_str(), local)).map_err(|e| self.model_error(at, e))
    }

    fn emit(&mut self, at: SourcePosition, s: StarTerm, p: Iri, o: StarTerm) -> PResult<()> {
        let t = StarTriple::with_max_nesting(s, p, o, self.max_nesting)
            .map_err(|e| self.model_error(at, e))?;
        self.graph.insert(t);
        Ok(())
    }

    fn triples(&mut self) -> PResult<()> {
        if self.cur.peek() == Some('[') && !self.at_anon() {
            let subject = self.blank_node_property_list()?;
            self.cur.skip_ws();
            if self.cur.peek() != Some('.') {
                self.predicate_object_list(&subject)?;
            }
            return Ok(());
        }
        let subject = self.subject()?;
        self.predicate_object_list(&subject)
    }

    fn at_anon(&self) -> bool {
        let mut n = 1;
        while let Some(c) = self.cur.peek_nth(n) {
            if c == ']' {
                return true;
            }
            if !c.is_whitespace() {
                return false;
            }
            n += 1;
        }
        false
    }

    /// At `(` or at a `[` that opens a property list.
    fn at_grouping(&self) -> bool {
        match self.cur.peek() {
            Some('(') => true,
            Some('[') => !self.at_anon(),
            _ => false,
        }
    }

    fn subject(&mut self) -> PResult<StarTerm> {
        self.cur.skip_ws();
        let at = self.cur.position();
        if self.cur.starts_with("<<") {
            return self.triple_x(0).map(StarTerm::from);
        }
        match self.cur.peek() {
            Some('(') => self.collection(),
            Some('[') if self.at_anon() => self.anon(),
            Some('"' | '\'') => self.error(at, TurtleErrorKind::LiteralSubject),
            _ if self.cur.at_number()
                || self.cur.at_keyword("true")
                || self.cur.at_keyword("false") =>
            {
                self.error(at, TurtleErrorKind::LiteralSubject)
            }
            _ => self.iri_or_blank(),
        }
    }

    fn iri_or_blank(&mut self) -> PResult<StarTerm> {
        let at = self.cur.position();
        match self.cur.peek() {
            Some('<') => {
                let raw = self.cur.read_iriref()?;
                Ok(self.resolve(&raw, at)?.into())
            }
            Some('_') if self.cur.peek_nth(1) == Some(':') => {
                let label = self.cur.read_blank_node_label()?;
                Ok(self.bnodes.labelled(&label).into())
            }
            Some('[') if self.at_anon() => self.anon(),
            Some(c) if c == ':' || crate::lexical::is_pn_chars_base(c) => {
                let (prefix, local) = self.cur.read_pname()?;
                Ok(self.prefixed(at, &prefix, &local)?.into())
            }
            _ => self.syntax(format!(
                "expected an IRI or blank node, found {}",
                self.cur.describe_next()
            )),
        }
    }

    fn anon(&mut self) -> PResult<StarTerm> {
        self.cur.expect('[')?;
        self.cur.skip_ws();
        self.cur.expect(']')?;
        Ok(self.bnodes.fresh().into())
    }

    fn predicate(&mut self, allow_a: bool) -> PResult<Iri> {
        self.cur.skip_ws();
        let at = self.cur.position();
        if self.cur.peek() == Some('a') && self.cur.at_keyword("a") {
            if !allow_a {
                return self.error(
                    at,
                    TurtleErrorKind::Syntax(
                        "the 'a' keyword is not allowed as the predicate of an embedded triple"
                            .into(),
                    ),
                );
            }
            self.cur.bump();
            return Ok(Iri::known(rdf::TYPE));
        }
        if self.cur.starts_with("<<") {
            return self.error(
                at,
                TurtleErrorKind::Syntax("an embedded triple cannot be used as a predicate".into()),
            );
        }
        match self.iri_or_blank()? {
            StarTerm::Iri(i) => Ok(i),
            _ => self.error(
                at,
                TurtleErrorKind::Syntax("predicate must be an IRI".into()),
            ),
        }
    }

    fn predicate_object_list(&mut self, subject: &StarTerm) -> PResult<()> {
        loop {
            let at = self.cur.position();
            let predicate = self.predicate(true)?;
            loop {
                let object = self.object()?;
                self.emit(at, subject.clone(), predicate.clone(), object)?;
                self.cur.skip_ws();
                if !self.cur.eat(',') {
                    break;
                }
            }
            self.cur.skip_ws();
            if !self.cur.eat(';') {
                return Ok(());
            }
            loop {
                self.cur.skip_ws();
                if !self.cur.eat(';') {
                    break;
                }
            }
            self.cur.skip_ws();
            if matches!(self.cur.peek(), Some('.' | ']') | None) {
                return Ok(());
            }
        }
    }

    fn object(&mut self) -> PResult<StarTerm> {
        self.cur.skip_ws();
        if self.cur.starts_with("<<") {
            return self.triple_x(0).map(StarTerm::from);
        }
        match self.cur.peek() {
            Some('(') => self.collection(),
            Some('[') if !self.at_anon() => self.blank_node_property_list(),
            _ => self.object_x(),
        }
    }

    /// `iri | BlankNode | literal` (the tripleX cases are handled by callers).
    fn object_x(&mut self) -> PResult<StarTerm> {
        self.cur.skip_ws();
        let at = self.cur.position();
        match self.cur.peek() {
            Some('"' | '\'') => self.rdf_literal(),
            _ if self.cur.at_number() => {
                let (lexical, datatype) = self.cur.read_number()?;
                Ok(Literal::new_typed(lexical, Iri::known(datatype)).into())
            }
            _ if self.cur.at_keyword("true") || self.cur.at_keyword("false") => {
                let value = if self.cur.at_keyword("true") {
                    "true"
                } else {
                    "false"
                };
                self.cur.bump_n(value.len());
                Ok(Literal::new_typed(value, Iri::known(xsd::BOOLEAN)).into())
            }
            _ if self.at_grouping() => {
                self.error(at, TurtleErrorKind::Syntax(GROUPING_IN_TRIPLE.into()))
            }
            _ => self.iri_or_blank(),
        }
    }

    fn rdf_literal(&mut self) -> PResult<StarTerm> {
        let value = self.cur.read_string()?;
        if self.cur.eat('@') {
            let tag = self.cur.read_langtag()?;
            return Ok(Literal::new_language_tagged(value, tag)
                .expect("lexer rejects empty tags")
                .into());
        }
        if self.cur.eat_str("^^") {
            let at = self.cur.position();
            return match self.iri_or_blank()? {
                StarTerm::Iri(dt) => Ok(Literal::new_typed(value, dt).into()),
                _ => self.error(
                    at,
                    TurtleErrorKind::Syntax("datatype must be an IRI".into()),
                ),
            };
        }
        Ok(Literal::new_simple(value).into())
    }

    /// `'<<' subjectX predicate objectX '>>'`
    fn triple_x(&mut self, depth: usize) -> PResult<StarTriple> {
        let at = self.cur.position();
        if depth > self.max_nesting {
            return self.error(
                at,
                TurtleErrorKind::NestingTooDeep {
                    limit: self.max_nesting,
                },
            );
        }
        if !self.cur.eat_str("<<") {
            return self.syntax("expected '<<'");
        }
        self.cur.skip_ws();
        let subject_at = self.cur.position();
        let subject = if self.cur.starts_with("<<") {
            self.triple_x(depth + 1)?.into()
        } else {
            match self.object_x()? {
                StarTerm::Literal(_) => {
                    return self.error(subject_at, TurtleErrorKind::LiteralSubject)
                }
                other => other,
            }
        };
        let predicate = self.predicate(false)?;
        self.cur.skip_ws();
        let object = if self.cur.starts_with("<<") {
            self.triple_x(depth + 1)?.into()
        } else {
            self.object_x()?
        };
        self.cur.skip_ws();
        if !self.cur.eat_str(">>") {
            if self.cur.is_eof() {
                return self.error(at, TurtleErrorKind::Syntax("unclosed '<<'".into()));
            }
            return self.syntax(format!("expected '>>', found {}", self.cur.describe_next()));
        }
        StarTriple::with_max_nesting(subject, predicate, object, self.max_nesting)
            .map_err(|e| self.model_error(at, e))
    }

    fn enter_group(&mut self) -> PResult<()> {
        self.grouping_depth += 1;
        if self.grouping_depth > MAX_GROUPING_DEPTH {
            return self.syntax("brackets nested too deeply");
        }
        Ok(())
    }

    fn blank_node_property_list(&mut self) -> PResult<StarTerm> {
        self.enter_group()?;
        self.cur.expect('[')?;
        let node: StarTerm = self.bnodes.fresh().into();
        self.predicate_object_list(&node)?;
        self.cur.skip_ws();
        self.cur.expect(']')?;
        self.grouping_depth -= 1;
        Ok(node)
    }

    fn collection(&mut self) -> PResult<StarTerm> {
        self.enter_group()?;
        let at = self.cur.position();
        self.cur.expect('(')?;
        let mut items = Vec::new();
        loop {
            self.cur.skip_ws();
            if self.cur.eat(')') {
                break;
            }
            if self.cur.is_eof() {
                return self.error(at, TurtleErrorKind::Syntax("unclosed collection".into()));
            }
            items.push(self.object()?);
        }
        self.grouping_depth -= 1;
        let mut head: StarTerm = Iri::known(rdf::NIL).into();
        let first = Iri::known(rdf::FIRST);
        let rest = Iri::known(rdf::REST);
        for item in items.into_iter().rev() {
            let node: StarTerm = self.bnodes.fresh().into();
            self.emit(at, node.clone(), first.clone(), item)?;
            self.emit(at, node.clone(), rest.clone(), head)?;
            head = node;
        }
        Ok(head)
    }
}
