//! Query-side values: variables, triple patterns with nested patterns,
//! solution mappings and filter conditions.

use crate::lexical::is_varname;
use crate::model::{BlankNode, Iri, Literal, StarTerm, StarTriple};
use std::collections::btree_map;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("'{0}' is not a valid variable name")]
    InvalidVariable(String),
    #[error("blank node {0} inside an embedded triple pattern")]
    BlankNodeInEmbeddedPattern(BlankNode),
}

/// A query variable, stored without its `?` sigil.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable(Arc<str>);

impl Variable {
    pub fn new(name: impl Into<String>) -> Result<Self, PatternError> {
        let name = name.into();
        if is_varname(&name) {
            Ok(Self(name.into()))
        } else {
            Err(PatternError::InvalidVariable(name))
        }
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

impl fmt::Debug for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternTerm {
    Variable(Variable),
    Iri(Iri),
    BlankNode(BlankNode),
    Literal(Literal),
    Triple(Arc<TriplePattern>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PredicatePattern {
    Variable(Variable),
    Iri(Iri),
}

/// A triple pattern whose subject and object may be nested patterns.
///
/// Nested patterns never contain blank nodes; the top level may. A literal
/// subject is accepted and simply never matches.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriplePattern {
    subject: PatternTerm,
    predicate: PredicatePattern,
    object: PatternTerm,
}

impl TriplePattern {
    pub fn new(
        subject: impl Into<PatternTerm>,
        predicate: impl Into<PredicatePattern>,
        object: impl Into<PatternTerm>,
    ) -> Result<Self, PatternError> {
        let pattern = Self {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
        };
        for term in [&pattern.subject, &pattern.object] {
            if let PatternTerm::Triple(nested) = term {
                if let Some(b) = nested.blank_nodes().into_iter().next() {
                    return Err(PatternError::BlankNodeInEmbeddedPattern(b));
                }
            }
        }
        Ok(pattern)
    }

    pub fn subject(&self) -> &PatternTerm {
        &self.subject
    }

    pub fn predicate(&self) -> &PredicatePattern {
        &self.predicate
    }

    pub fn object(&self) -> &PatternTerm {
        &self.object
    }

    /// Variables at every nesting level.
    pub fn variables(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let PatternTerm::Variable(v) = t {
                out.insert(v.clone());
            }
        });
        if let PredicatePattern::Variable(v) = &self.predicate {
            out.insert(v.clone());
        }
        out
    }

    pub fn blank_nodes(&self) -> BTreeSet<BlankNode> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let PatternTerm::BlankNode(b) = t {
                out.insert(b.clone());
            }
        });
        out
    }

    /// Visits the non-pattern terms in subject and object positions, descending
    /// into nested patterns.
    fn visit(&self, f: &mut impl FnMut(&PatternTerm)) {
        for term in [&self.subject, &self.object] {
            match term {
                PatternTerm::Triple(nested) => {
                    if let PredicatePattern::Variable(v) = &nested.predicate {
                        f(&PatternTerm::Variable(v.clone()));
                    }
                    nested.visit(f);
                }
                other => f(other),
            }
        }
    }

    pub fn nesting_depth(&self) -> usize {
        [&self.subject, &self.object]
            .into_iter()
            .map(|t| match t {
                PatternTerm::Triple(nested) => nested.nesting_depth() + 1,
                _ => 0,
            })
            .max()
            .unwrap_or(0)
    }

    /// Converts a pattern without variables into the triple it denotes.
    ///
    /// Returns `None` if a variable remains or the subject is a literal.
    pub fn to_triple(&self) -> Option<StarTriple> {
        let predicate = match &self.predicate {
            PredicatePattern::Iri(i) => i.clone(),
            PredicatePattern::Variable(_) => return None,
        };
        StarTriple::new(self.subject.to_term()?, predicate, self.object.to_term()?).ok()
    }
}

impl PatternTerm {
    pub fn to_term(&self) -> Option<StarTerm> {
        Some(match self {
            PatternTerm::Variable(_) => return None,
            PatternTerm::Iri(i) => StarTerm::Iri(i.clone()),
            PatternTerm::BlankNode(b) => StarTerm::BlankNode(b.clone()),
            PatternTerm::Literal(l) => StarTerm::Literal(l.clone()),
            PatternTerm::Triple(t) => StarTerm::from(t.to_triple()?),
        })
    }
}

impl From<Variable> for PatternTerm {
    fn from(v: Variable) -> Self {
        PatternTerm::Variable(v)
    }
}

impl From<Iri> for PatternTerm {
    fn from(i: Iri) -> Self {
        PatternTerm::Iri(i)
    }
}

impl From<BlankNode> for PatternTerm {
    fn from(b: BlankNode) -> Self {
        PatternTerm::BlankNode(b)
    }
}

impl From<Literal> for PatternTerm {
    fn from(l: Literal) -> Self {
        PatternTerm::Literal(l)
    }
}

impl From<TriplePattern> for PatternTerm {
    fn from(t: TriplePattern) -> Self {
        PatternTerm::Triple(Arc::new(t))
    }
}

impl From<StarTerm> for PatternTerm {
    fn from(term: StarTerm) -> Self {
        match term {
            StarTerm::Iri(i) => PatternTerm::Iri(i),
            StarTerm::BlankNode(b) => PatternTerm::BlankNode(b),
            StarTerm::Literal(l) => PatternTerm::Literal(l),
            StarTerm::Triple(t) => PatternTerm::from(TriplePattern::from(&*t)),
        }
    }
}

impl From<Variable> for PredicatePattern {
    fn from(v: Variable) -> Self {
        PredicatePattern::Variable(v)
    }
}

impl From<Iri> for PredicatePattern {
    fn from(i: Iri) -> Self {
        PredicatePattern::Iri(i)
    }
}

impl From<&StarTriple> for TriplePattern {
    /// Blank nodes of nested triples are kept, so the result may violate the
    /// blank-node rule for nested patterns; it is only meant for matching.
    fn from(t: &StarTriple) -> Self {
        Self {
            subject: t.subject().clone().into(),
            predicate: PredicatePattern::Iri(t.predicate().clone()),
            object: t.object().clone().into(),
        }
    }
}

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternTerm::Variable(v) => v.fmt(f),
            PatternTerm::Iri(i) => i.fmt(f),
            PatternTerm::BlankNode(b) => b.fmt(f),
            PatternTerm::Literal(l) => l.fmt(f),
            PatternTerm::Triple(t) => write!(f, "<< {t} >>"),
        }
    }
}

impl fmt::Display for PredicatePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredicatePattern::Variable(v) => v.fmt(f),
            PredicatePattern::Iri(i) => i.fmt(f),
        }
    }
}

/// Writes `s p o` in SPARQL* syntax, without the terminating dot.
impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.subject, self.predicate, self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("mappings disagree on {0}")]
pub struct IncompatibleMappings(pub Variable);

/// A partial function from variables to terms.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SolutionMapping(BTreeMap<Variable, StarTerm>);

impl SolutionMapping {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: &Variable) -> Option<&StarTerm> {
        self.0.get(v)
    }

    pub fn contains(&self, v: &Variable) -> bool {
        self.0.contains_key(v)
    }

    /// Binds `v`, returning the previous value if it was bound.
    pub fn insert(&mut self, v: Variable, term: StarTerm) -> Option<StarTerm> {
        self.0.insert(v, term)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Variable> {
        self.0.keys()
    }

    pub fn iter(&self) -> btree_map::Iter<'_, Variable, StarTerm> {
        self.0.iter()
    }

    /// True iff every shared variable has the same value in both mappings.
    pub fn compatible(&self, other: &Self) -> bool {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .iter()
            .all(|(v, a)| large.get(v).is_none_or(|b| a == b))
    }

    pub fn merge(&self, other: &Self) -> Result<Self, IncompatibleMappings> {
        let mut merged = self.clone();
        for (v, term) in other.iter() {
            match merged.0.entry(v.clone()) {
                btree_map::Entry::Vacant(e) => {
                    e.insert(term.clone());
                }
                btree_map::Entry::Occupied(e) if e.get() == term => {}
                btree_map::Entry::Occupied(_) => return Err(IncompatibleMappings(v.clone())),
            }
        }
        Ok(merged)
    }

    /// Replaces the bound variables of `tp` at every nesting level.
    pub fn apply(&self, tp: &TriplePattern) -> TriplePattern {
        TriplePattern {
            subject: self.apply_term(&tp.subject),
            predicate: match &tp.predicate {
                PredicatePattern::Variable(v) => match self.get(v) {
                    Some(StarTerm::Iri(i)) => PredicatePattern::Iri(i.clone()),
                    _ => tp.predicate.clone(),
                },
                p => p.clone(),
            },
            object: self.apply_term(&tp.object),
        }
    }

    fn apply_term(&self, term: &PatternTerm) -> PatternTerm {
        match term {
            PatternTerm::Variable(v) => match self.get(v) {
                Some(value) => value.clone().into(),
                None => term.clone(),
            },
            PatternTerm::Triple(nested) => PatternTerm::Triple(Arc::new(self.apply(nested))),
            _ => term.clone(),
        }
    }

    /// Restricts the domain to `vars`.
    pub fn project(&self, vars: &BTreeSet<Variable>) -> Self {
        Self(
            self.0
                .iter()
                .filter(|(v, _)| vars.contains(*v))
                .map(|(v, t)| (v.clone(), t.clone()))
                .collect(),
        )
    }
}

impl FromIterator<(Variable, StarTerm)> for SolutionMapping {
    fn from_iter<I: IntoIterator<Item = (Variable, StarTerm)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a SolutionMapping {
    type Item = (&'a Variable, &'a StarTerm);
    type IntoIter = btree_map::Iter<'a, Variable, StarTerm>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for SolutionMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} -> {t}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FilterConstant {
    Iri(Iri),
    Literal(Literal),
}

impl From<Iri> for FilterConstant {
    fn from(i: Iri) -> Self {
        FilterConstant::Iri(i)
    }
}

impl From<Literal> for FilterConstant {
    fn from(l: Literal) -> Self {
        FilterConstant::Literal(l)
    }
}

impl From<FilterConstant> for StarTerm {
    fn from(c: FilterConstant) -> Self {
        match c {
            FilterConstant::Iri(i) => StarTerm::Iri(i),
            FilterConstant::Literal(l) => StarTerm::Literal(l),
        }
    }
}

/// Filter conditions; comparisons against unbound variables are unsatisfied.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FilterCondition {
    Bound(Variable),
    EqualsConst(Variable, FilterConstant),
    EqualsVars(Variable, Variable),
    Not(Box<FilterCondition>),
    Or(Box<FilterCondition>, Box<FilterCondition>),
    And(Box<FilterCondition>, Box<FilterCondition>),
}

impl FilterCondition {
    pub fn satisfied_by(&self, mapping: &SolutionMapping) -> bool {
        match self {
            FilterCondition::Bound(v) => mapping.contains(v),
            FilterCondition::EqualsConst(v, c) => match (mapping.get(v), c) {
                (Some(StarTerm::Iri(a)), FilterConstant::Iri(b)) => a == b,
                (Some(StarTerm::Literal(a)), FilterConstant::Literal(b)) => a == b,
                _ => false,
            },
            FilterCondition::EqualsVars(x, y) => match (mapping.get(x), mapping.get(y)) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            },
            FilterCondition::Not(r) => !r.satisfied_by(mapping),
            FilterCondition::Or(a, b) => a.satisfied_by(mapping) || b.satisfied_by(mapping),
            FilterCondition::And(a, b) => a.satisfied_by(mapping) && b.satisfied_by(mapping),
        }
    }

    /// Variables mentioned anywhere in the condition.
    pub fn variables(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<Variable>) {
        match self {
            FilterCondition::Bound(v) | FilterCondition::EqualsConst(v, _) => {
                out.insert(v.clone());
            }
            FilterCondition::EqualsVars(x, y) => {
                out.insert(x.clone());
                out.insert(y.clone());
            }
            FilterCondition::Not(r) => r.collect_variables(out),
            FilterCondition::Or(a, b) | FilterCondition::And(a, b) => {
                a.collect_variables(out);
                b.collect_variables(out);
            }
        }
    }
}
