//! RDF terms, nested (RDF*) triples and graphs of them.
//!
//! A [`StarTriple`] may carry another triple in its subject or object
//! position, to any finite depth. Triples are values: two triples are equal
//! when their positions are equal, recursively. A [`StarGraph`] is a set of
//! asserted triples that keeps the set of triples embedded in them (at any
//! depth) up to date as triples are inserted.

use crate::lexical::{is_blank_node_label, is_forbidden_in_iri};
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Default bound on how deeply triples may be nested inside each other.
pub const DEFAULT_MAX_NESTING: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid IRI <{iri}>: {reason}")]
    InvalidIri { iri: String, reason: &'static str },
    #[error("invalid blank node label {0:?}")]
    InvalidBlankNode(String),
    #[error("language tags must not be empty")]
    EmptyLanguageTag,
    #[error("a literal cannot be the subject of a triple")]
    LiteralSubject,
    #[error("triple nesting depth {depth} exceeds the limit of {limit}")]
    NestingTooDeep { depth: usize, limit: usize },
}

/// An absolute IRI.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(Arc<str>);

impl Iri {
    pub fn new(iri: impl Into<String>) -> Result<Self, ModelError> {
        let iri = iri.into();
        let invalid = |reason| ModelError::InvalidIri {
            iri: iri.clone(),
            reason,
        };
        if iri.is_empty() {
            return Err(invalid("IRI is empty"));
        }
        if iri.chars().any(is_forbidden_in_iri) {
            return Err(invalid("IRI contains whitespace or a reserved character"));
        }
        if !has_scheme(&iri) {
            return Err(invalid("IRI is not absolute"));
        }
        Ok(Self(iri.into()))
    }

    /// For IRIs known to be valid, such as vocabulary constants.
    pub(crate) fn known(iri: &str) -> Self {
        debug_assert!(Self::new(iri).is_ok(), "{iri}");
        Self(iri.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

fn has_scheme(iri: &str) -> bool {
    let Some((scheme, _)) = iri.split_once(':') else {
        return false;
    };
    let mut chars = scheme.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

/// A blank node, identified by its label within one graph or document.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlankNode(Arc<str>);

impl BlankNode {
    pub fn new(label: impl Into<String>) -> Result<Self, ModelError> {
        let label = label.into();
        if is_blank_node_label(&label) {
            Ok(Self(label.into()))
        } else {
            Err(ModelError::InvalidBlankNode(label))
        }
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for BlankNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "_:{}", self.0)
    }
}

impl fmt::Display for BlankNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "_:{}", self.0)
    }
}

/// A literal. The datatype is always present; simple literals are
/// `xsd:string` and language-tagged ones are `rdf:langString`.
///
/// Field order gives the canonical ordering: datatype, lexical form, language.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    datatype: Iri,
    lexical: Arc<str>,
    language: Option<Arc<str>>,
}

impl Literal {
    pub fn new_simple(lexical: impl Into<String>) -> Self {
        Self {
            datatype: Iri::known(crate::vocab::xsd::STRING),
            lexical: lexical.into().into(),
            language: None,
        }
    }

    pub fn new_typed(lexical: impl Into<String>, datatype: Iri) -> Self {
        Self {
            datatype,
            lexical: lexical.into().into(),
            language: None,
        }
    }

    /// Builds a language-tagged string; the tag is lowercased.
    pub fn new_language_tagged(
        lexical: impl Into<String>,
        language: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let language = language.into();
        if language.is_empty() {
            return Err(ModelError::EmptyLanguageTag);
        }
        Ok(Self {
            datatype: Iri::known(crate::vocab::rdf::LANG_STRING),
            lexical: lexical.into().into(),
            language: Some(language.to_lowercase().into()),
        })
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> &Iri {
        &self.datatype
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut quoted = String::with_capacity(self.lexical.len() + 2);
        quoted.push('"');
        crate::lexical::escape_string(&self.lexical, &mut quoted);
        quoted.push('"');
        f.write_str(&quoted)?;
        if let Some(language) = &self.language {
            write!(f, "@{language}")
        } else if self.datatype.as_str() != crate::vocab::xsd::STRING {
            write!(f, "^^{}", self.datatype)
        } else {
            Ok(())
        }
    }
}

/// Anything that can sit in the subject or object position of a triple,
/// including another triple.
///
/// Variant order gives the canonical ordering:
/// IRIs < blank nodes < literals < triples.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StarTerm {
    Iri(Iri),
    BlankNode(BlankNode),
    Literal(Literal),
    Triple(Arc<StarTriple>),
}

impl StarTerm {
    pub fn as_triple(&self) -> Option<&StarTriple> {
        match self {
            StarTerm::Triple(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_triple(&self) -> bool {
        matches!(self, StarTerm::Triple(_))
    }

    fn depth(&self) -> Option<usize> {
        self.as_triple().map(StarTriple::nesting_depth)
    }
}

impl fmt::Debug for StarTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for StarTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StarTerm::Iri(i) => i.fmt(f),
            StarTerm::BlankNode(b) => b.fmt(f),
            StarTerm::Literal(l) => l.fmt(f),
            StarTerm::Triple(t) => write!(f, "<< {t} >>"),
        }
    }
}

impl From<Iri> for StarTerm {
    fn from(iri: Iri) -> Self {
        StarTerm::Iri(iri)
    }
}

impl From<BlankNode> for StarTerm {
    fn from(b: BlankNode) -> Self {
        StarTerm::BlankNode(b)
    }
}

impl From<Literal> for StarTerm {
    fn from(l: Literal) -> Self {
        StarTerm::Literal(l)
    }
}

impl From<StarTriple> for StarTerm {
    fn from(t: StarTriple) -> Self {
        StarTerm::Triple(Arc::new(t))
    }
}

impl From<Arc<StarTriple>> for StarTerm {
    fn from(t: Arc<StarTriple>) -> Self {
        StarTerm::Triple(t)
    }
}

/// A triple whose subject and object may themselves be triples.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StarTriple {
    subject: StarTerm,
    predicate: Iri,
    object: StarTerm,
    // Derived from the other fields, so it never disagrees with equality.
    depth: usize,
}

impl StarTriple {
    /// Builds a triple, enforcing [`DEFAULT_MAX_NESTING`].
    pub fn new(
        subject: impl Into<StarTerm>,
        predicate: Iri,
        object: impl Into<StarTerm>,
    ) -> Result<Self, ModelError> {
        Self::with_max_nesting(subject, predicate, object, DEFAULT_MAX_NESTING)
    }

    pub fn with_max_nesting(
        subject: impl Into<StarTerm>,
        predicate: Iri,
        object: impl Into<StarTerm>,
        max_nesting: usize,
    ) -> Result<Self, ModelError> {
        let subject = subject.into();
        let object = object.into();
        if matches!(subject, StarTerm::Literal(_)) {
            return Err(ModelError::LiteralSubject);
        }
        let depth = match (subject.depth(), object.depth()) {
            (None, None) => 0,
            (s, o) => s.max(o).unwrap_or(0) + 1,
        };
        if depth > max_nesting {
            return Err(ModelError::NestingTooDeep {
                depth,
                limit: max_nesting,
            });
        }
        Ok(Self {
            subject,
            predicate,
            object,
            depth,
        })
    }

    pub fn subject(&self) -> &StarTerm {
        &self.subject
    }

    pub fn predicate(&self) -> &Iri {
        &self.predicate
    }

    pub fn object(&self) -> &StarTerm {
        &self.object
    }

    /// The smallest `k` such that the triple is `k`-nested; 0 for an
    /// ordinary RDF triple.
    pub fn nesting_depth(&self) -> usize {
        self.depth
    }

    /// A metadata triple has at least one embedded triple.
    pub fn is_metadata(&self) -> bool {
        self.depth > 0
    }

    /// All RDF terms and triples mentioned in this triple, at any depth.
    /// The triple itself is not included.
    pub fn terms_plus(&self) -> BTreeSet<StarTerm> {
        let mut out = BTreeSet::new();
        self.collect_terms_plus(&mut out);
        out
    }

    fn collect_terms_plus(&self, out: &mut BTreeSet<StarTerm>) {
        out.insert(self.subject.clone());
        out.insert(StarTerm::Iri(self.predicate.clone()));
        out.insert(self.object.clone());
        for t in self.direct_embedded() {
            t.collect_terms_plus(out);
        }
    }

    /// Triples sitting directly in the subject or object position.
    pub fn direct_embedded(&self) -> impl Iterator<Item = &StarTriple> {
        self.subject
            .as_triple()
            .into_iter()
            .chain(self.object.as_triple())
    }

    /// Calls `f` on every embedded triple, at every depth, parents first.
    pub fn for_each_embedded<'a>(&'a self, f: &mut impl FnMut(&'a StarTriple)) {
        for t in self.direct_embedded() {
            f(t);
            t.for_each_embedded(f);
        }
    }
}

impl fmt::Debug for StarTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<< {self} >>")
    }
}

impl fmt::Display for StarTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.subject, self.predicate, self.object)
    }
}

/// A set of asserted triples plus the derived set of embedded triples.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StarGraph {
    triples: BTreeSet<StarTriple>,
    embedded: BTreeSet<StarTriple>,
}

impl StarGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a triple; returns `false` if an equal triple was already asserted.
    pub fn insert(&mut self, triple: StarTriple) -> bool {
        if self.triples.contains(&triple) {
            return false;
        }
        let embedded = &mut self.embedded;
        triple.for_each_embedded(&mut |t| {
            if !embedded.contains(t) {
                embedded.insert(t.clone());
            }
        });
        self.triples.insert(triple)
    }

    /// Returns a new graph with `triple` added, leaving `self` untouched.
    pub fn with(&self, triple: StarTriple) -> Self {
        let mut g = self.clone();
        g.insert(triple);
        g
    }

    pub fn contains(&self, triple: &StarTriple) -> bool {
        self.triples.contains(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Asserted triples in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = &StarTriple> {
        self.triples.iter()
    }

    /// Every triple embedded, at any depth, in an asserted triple.
    pub fn embedded_triples(&self) -> &BTreeSet<StarTriple> {
        &self.embedded
    }

    /// Union of [`StarTriple::terms_plus`] over the asserted triples.
    pub fn terms_plus(&self) -> BTreeSet<StarTerm> {
        let mut out = BTreeSet::new();
        for t in &self.triples {
            t.collect_terms_plus(&mut out);
        }
        out
    }

    /// Largest nesting depth among asserted triples (0 for an empty graph).
    pub fn max_nesting_depth(&self) -> usize {
        self.triples
            .iter()
            .map(StarTriple::nesting_depth)
            .max()
            .unwrap_or(0)
    }
}

impl FromIterator<StarTriple> for StarGraph {
    fn from_iter<I: IntoIterator<Item = StarTriple>>(iter: I) -> Self {
        let mut g = StarGraph::new();
        g.extend(iter);
        g
    }
}

impl Extend<StarTriple> for StarGraph {
    fn extend<I: IntoIterator<Item = StarTriple>>(&mut self, iter: I) {
        for t in iter {
            self.insert(t);
        }
    }
}

impl<'a> IntoIterator for &'a StarGraph {
    type Item = &'a StarTriple;
    type IntoIter = std::collections::btree_set::Iter<'a, StarTriple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.iter()
    }
}
