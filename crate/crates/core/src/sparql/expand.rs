use super::ast::*;
use super::{ExpandError, ExpandErrorKind};
use crate::lexical::SourcePosition;
use crate::model::Iri;
use crate::vocab::rdf;
use std::collections::{HashMap, HashSet};

/// Removes syntactic abbreviations.
///
/// Predicate and object lists become one statement each, prefixed names,
/// relative IRIs and `a` become absolute IRIs (inside embedded patterns too),
/// and `[]` becomes a labelled blank node. Applying it twice changes nothing.
pub fn expand_syntax(query: &Query) -> Result<Query, ExpandError> {
    let mut expander = Expander {
        base: None,
        prefixes: HashMap::new(),
        anon: HashMap::new(),
    };
    for decl in &query.prologue {
        match decl {
            PrologueDecl::Base { iri, position } => {
                expander.base = Some(expander.resolve(iri, *position)?);
            }
            PrologueDecl::Prefix {
                prefix,
                iri,
                position,
            } => {
                let ns = expander.resolve(iri, *position)?;
                expander.prefixes.insert(prefix.clone(), ns);
            }
        }
    }
    expander.allocate_anonymous(&query.pattern);
    Ok(Query {
        prologue: query.prologue.clone(),
        projection: query.projection.clone(),
        pattern: expander.group(&query.pattern)?,
    })
}

struct Expander {
    base: Option<Iri>,
    prefixes: HashMap<String, Iri>,
    anon: HashMap<usize, String>,
}

type EResult<T> = Result<T, ExpandError>;

fn invalid(position: SourcePosition, iri: &str, reason: impl ToString) -> ExpandError {
    ExpandError {
        position,
        kind: ExpandErrorKind::InvalidIri {
            iri: iri.to_owned(),
            reason: reason.to_string(),
        },
    }
}

impl Expander {
    fn resolve(&self, raw: &str, position: SourcePosition) -> EResult<Iri> {
        let resolved = match &self.base {
            Some(base) => oxiri::Iri::parse(base.as_str())
                .map_err(|e| invalid(position, base.as_str(), e))?
                .resolve(raw)
                .map_err(|e| invalid(position, raw, e))?
                .into_inner(),
            None => raw.to_owned(),
        };
        Iri::new(resolved).map_err(|e| invalid(position, raw, e))
    }

    fn iri(&self, iri: &IriRef, position: SourcePosition) -> EResult<IriRef> {
        Ok(IriRef::Resolved(match iri {
            IriRef::Written(raw) => self.resolve(raw, position)?,
            IriRef::Prefixed { prefix, local } => {
                let ns = self.prefixes.get(prefix).ok_or_else(|| ExpandError {
                    position,
                    kind: ExpandErrorKind::UnknownPrefix(prefix.clone()),
                })?;
                let full = format!("{}{local}", ns.as_str());
                Iri::new(full.clone()).map_err(|e| invalid(position, &full, e))?
            }
            IriRef::Resolved(i) => i.clone(),
        }))
    }

    /// Labels `[]` nodes with `b1`, `b2`, ... avoiding labels used in the query.
    fn allocate_anonymous(&mut self, pattern: &GroupPattern) {
        let mut used = HashSet::new();
        let mut anonymous = Vec::new();
        visit_terms(pattern, &mut |t| match &t.kind {
            TermKind::BlankNode(label) => {
                used.insert(label.clone());
            }
            TermKind::AnonBlankNode(n) => anonymous.push(*n),
            _ => {}
        });
        let mut counter = 0;
        for n in anonymous {
            let label = loop {
                counter += 1;
                let candidate = format!("b{counter}");
                if !used.contains(&candidate) {
                    break candidate;
                }
            };
            self.anon.insert(n, label);
        }
    }

    fn group(&self, g: &GroupPattern) -> EResult<GroupPattern> {
        let elements = g
            .elements
            .iter()
            .map(|e| {
                Ok(match e {
                    GroupElement::Triples(block) => {
                        let mut flat = Vec::new();
                        for statement in block {
                            let subject = self.term(&statement.subject)?;
                            for (verb, objects) in &statement.predicates {
                                let verb = self.verb(verb)?;
                                for object in objects {
                                    flat.push(TriplesSameSubject {
                                        subject: subject.clone(),
                                        predicates: vec![(verb.clone(), vec![self.term(object)?])],
                                    });
                                }
                            }
                        }
                        GroupElement::Triples(flat)
                    }
                    GroupElement::Bind(b) => GroupElement::Bind(Bind {
                        position: b.position,
                        expression: match &b.expression {
                            BindExpression::Embedded(t) => BindExpression::Embedded(self.term(t)?),
                            BindExpression::Value(t) => BindExpression::Value(self.term(t)?),
                        },
                        variable: b.variable.clone(),
                    }),
                    GroupElement::Filter(f) => GroupElement::Filter(Filter {
                        position: f.position,
                        condition: self.filter(&f.condition)?,
                    }),
                    GroupElement::Optional(inner) => GroupElement::Optional(self.group(inner)?),
                    GroupElement::Group(inner) => GroupElement::Group(self.group(inner)?),
                    GroupElement::Union(groups) => GroupElement::Union(
                        groups
                            .iter()
                            .map(|g| self.group(g))
                            .collect::<EResult<_>>()?,
                    ),
                })
            })
            .collect::<EResult<_>>()?;
        Ok(GroupPattern {
            position: g.position,
            elements,
        })
    }

    fn verb(&self, verb: &Verb) -> EResult<Verb> {
        let kind = match &verb.kind {
            VerbKind::Variable(_) => verb.kind.clone(),
            VerbKind::Iri(i) => VerbKind::Iri(self.iri(i, verb.position)?),
            VerbKind::Type => VerbKind::Iri(IriRef::Resolved(Iri::known(rdf::TYPE))),
        };
        Ok(Verb {
            position: verb.position,
            kind,
        })
    }

    fn term(&self, term: &Term) -> EResult<Term> {
        let kind = match &term.kind {
            TermKind::Variable(_) | TermKind::BlankNode(_) => term.kind.clone(),
            TermKind::Iri(i) => TermKind::Iri(self.iri(i, term.position)?),
            TermKind::AnonBlankNode(n) => TermKind::BlankNode(self.anon[n].clone()),
            TermKind::Literal {
                lexical,
                language,
                datatype,
            } => TermKind::Literal {
                lexical: lexical.clone(),
                language: language.clone(),
                datatype: datatype
                    .as_ref()
                    .map(|d| self.iri(d, term.position))
                    .transpose()?,
            },
            TermKind::Embedded(e) => TermKind::Embedded(Box::new(EmbeddedPattern {
                subject: self.term(&e.subject)?,
                verb: self.verb(&e.verb)?,
                object: self.term(&e.object)?,
            })),
        };
        Ok(Term {
            position: term.position,
            kind,
        })
    }

    fn filter(&self, e: &FilterExpr) -> EResult<FilterExpr> {
        Ok(match e {
            FilterExpr::Bound(_) => e.clone(),
            FilterExpr::Equals(a, b) => FilterExpr::Equals(self.term(a)?, self.term(b)?),
            FilterExpr::NotEquals(a, b) => FilterExpr::NotEquals(self.term(a)?, self.term(b)?),
            FilterExpr::Not(inner) => FilterExpr::Not(Box::new(self.filter(inner)?)),
            FilterExpr::Or(a, b) => {
                FilterExpr::Or(Box::new(self.filter(a)?), Box::new(self.filter(b)?))
            }
            FilterExpr::And(a, b) => {
                FilterExpr::And(Box::new(self.filter(a)?), Box::new(self.filter(b)?))
            }
        })
    }
}

fn visit_terms(g: &GroupPattern, f: &mut impl FnMut(&Term)) {
    fn term(t: &Term, f: &mut impl FnMut(&Term)) {
        f(t);
        if let TermKind::Embedded(e) = &t.kind {
            term(&e.subject, f);
            term(&e.object, f);
        }
    }
    for element in &g.elements {
        match element {
            GroupElement::Triples(block) => {
                for statement in block {
                    term(&statement.subject, f);
                    statement
                        .predicates
                        .iter()
                        .flat_map(|(_, objects)| objects)
                        .for_each(|o| term(o, f));
                }
            }
            GroupElement::Bind(b) => match &b.expression {
                BindExpression::Embedded(t) | BindExpression::Value(t) => term(t, f),
            },
            GroupElement::Filter(_) => {}
            GroupElement::Optional(inner) | GroupElement::Group(inner) => visit_terms(inner, f),
            GroupElement::Union(groups) => groups.iter().for_each(|inner| visit_terms(inner, f)),
        }
    }
}
