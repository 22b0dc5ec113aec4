use super::ast::*;
use super::TranslateError;
use crate::engine::{Algebra, ExtendValue};
use crate::lexical::SourcePosition;
use crate::model::{BlankNode, Iri, Literal};
use crate::query::{
    FilterCondition, FilterConstant, PatternTerm, PredicatePattern, TriplePattern, Variable,
};
use crate::vocab::rdf;

/// An algebra expression with the variables to report, in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslatedQuery {
    pub algebra: Algebra,
    pub projection: Vec<Variable>,
}

type TResult<T> = Result<T, TranslateError>;

fn not_expanded<T>(position: SourcePosition) -> TResult<T> {
    Err(TranslateError {
        position,
        message: "abbreviated IRI left in query; expand it first".to_owned(),
    })
}

fn resolved(iri: &IriRef, position: SourcePosition) -> TResult<Iri> {
    match iri {
        IriRef::Resolved(i) => Ok(i.clone()),
        _ => not_expanded(position),
    }
}

/// Converts a term of an expanded query, turning embedded triple patterns
/// into nested triple patterns.
pub fn lift(term: &Term) -> TResult<PatternTerm> {
    Ok(match &term.kind {
        TermKind::Variable(v) => PatternTerm::Variable(v.clone()),
        TermKind::Iri(i) => PatternTerm::Iri(resolved(i, term.position)?),
        TermKind::BlankNode(label) => {
            PatternTerm::BlankNode(BlankNode::new(label.as_str()).map_err(|e| TranslateError {
                position: term.position,
                message: e.to_string(),
            })?)
        }
        TermKind::AnonBlankNode(_) => return not_expanded(term.position),
        TermKind::Literal { .. } => PatternTerm::Literal(literal(term)?),
        TermKind::Embedded(e) => {
            PatternTerm::from(pattern(&e.subject, &e.verb, &e.object, term.position)?)
        }
    })
}

fn literal(term: &Term) -> TResult<Literal> {
    let TermKind::Literal {
        lexical,
        language,
        datatype,
    } = &term.kind
    else {
        unreachable!("caller checked the term kind")
    };
    match (language, datatype) {
        (Some(lang), _) => {
            Literal::new_language_tagged(lexical.as_str(), lang.as_str()).map_err(|e| {
                TranslateError {
                    position: term.position,
                    message: e.to_string(),
                }
            })
        }
        (None, Some(dt)) => Ok(Literal::new_typed(
            lexical.as_str(),
            resolved(dt, term.position)?,
        )),
        (None, None) => Ok(Literal::new_simple(lexical.as_str())),
    }
}

fn predicate(verb: &Verb) -> TResult<PredicatePattern> {
    Ok(match &verb.kind {
        VerbKind::Variable(v) => PredicatePattern::Variable(v.clone()),
        VerbKind::Iri(i) => PredicatePattern::Iri(resolved(i, verb.position)?),
        VerbKind::Type => PredicatePattern::Iri(Iri::known(rdf::TYPE)),
    })
}

fn pattern(s: &Term, p: &Verb, o: &Term, position: SourcePosition) -> TResult<TriplePattern> {
    TriplePattern::new(lift(s)?, predicate(p)?, lift(o)?).map_err(|e| TranslateError {
        position,
        message: e.to_string(),
    })
}

/// Translates an expanded, scope-checked query.
///
/// Groups fold left to right: adjacent statements form one BGP, an embedded
/// pattern in `BIND` becomes `TR` joined at its position, other `BIND`s
/// extend the solutions so far, `OPTIONAL` wraps the solutions so far, and
/// the group's filters apply to the whole group.
pub fn translate(query: &Query) -> TResult<TranslatedQuery> {
    let algebra = group(&query.pattern)?;
    let projection = match &query.projection {
        Projection::All => query.pattern.in_scope_variables(),
        Projection::Variables(vars) => {
            let mut out: Vec<Variable> = Vec::new();
            for v in vars {
                if !out.contains(&v.node) {
                    out.push(v.node.clone());
                }
            }
            out
        }
    };
    Ok(TranslatedQuery {
        algebra,
        projection,
    })
}

fn is_empty_bgp(a: &Algebra) -> bool {
    matches!(a, Algebra::Bgp(patterns) if patterns.is_empty())
}

fn join(a: Algebra, b: Algebra) -> Algebra {
    if is_empty_bgp(&a) {
        b
    } else if is_empty_bgp(&b) {
        a
    } else {
        a.and(b)
    }
}

fn group(g: &GroupPattern) -> TResult<Algebra> {
    let mut current = Algebra::bgp([]);
    let mut filters = Vec::new();
    for element in &g.elements {
        match element {
            GroupElement::Triples(block) => {
                let mut patterns = Vec::new();
                for statement in block {
                    for (verb, objects) in &statement.predicates {
                        for object in objects {
                            patterns.push(pattern(
                                &statement.subject,
                                verb,
                                object,
                                statement.subject.position,
                            )?);
                        }
                    }
                }
                current = join(current, Algebra::bgp(patterns));
            }
            GroupElement::Bind(b) => match &b.expression {
                BindExpression::Embedded(t) => {
                    let PatternTerm::Triple(tp) = lift(t)? else {
                        unreachable!("parser only builds embedded BIND expressions from '<<'")
                    };
                    let tr = Algebra::Tr((*tp).clone(), b.variable.node.clone());
                    current = join(current, tr);
                }
                BindExpression::Value(t) => {
                    let value = match lift(t)? {
                        PatternTerm::Variable(v) => ExtendValue::Copy(v),
                        other => {
                            ExtendValue::Constant(other.to_term().expect("constant BIND value"))
                        }
                    };
                    current = Algebra::Extend(Box::new(current), b.variable.node.clone(), value);
                }
            },
            GroupElement::Filter(f) => filters.push(condition(&f.condition)?),
            GroupElement::Optional(inner) => current = current.opt(group(inner)?),
            GroupElement::Union(groups) => {
                let mut iter = groups.iter();
                let first = group(iter.next().expect("UNION has at least two groups"))?;
                let union = iter.try_fold(first, |acc, g| {
                    Ok::<_, TranslateError>(acc.union(group(g)?))
                })?;
                current = join(current, union);
            }
            GroupElement::Group(inner) => current = join(current, group(inner)?),
        }
    }
    Ok(
        match filters
            .into_iter()
            .reduce(|a, b| FilterCondition::And(Box::new(a), Box::new(b)))
        {
            Some(condition) => current.filter(condition),
            None => current,
        },
    )
}

fn condition(e: &FilterExpr) -> TResult<FilterCondition> {
    Ok(match e {
        FilterExpr::Bound(v) => FilterCondition::Bound(v.node.clone()),
        FilterExpr::Equals(a, b) => equals(a, b)?,
        FilterExpr::NotEquals(a, b) => FilterCondition::Not(Box::new(equals(a, b)?)),
        FilterExpr::Not(inner) => FilterCondition::Not(Box::new(condition(inner)?)),
        FilterExpr::Or(a, b) => {
            FilterCondition::Or(Box::new(condition(a)?), Box::new(condition(b)?))
        }
        FilterExpr::And(a, b) => {
            FilterCondition::And(Box::new(condition(a)?), Box::new(condition(b)?))
        }
    })
}

fn equals(a: &Term, b: &Term) -> TResult<FilterCondition> {
    let constant = |t: &Term| -> TResult<FilterConstant> {
        match lift(t)? {
            PatternTerm::Iri(i) => Ok(FilterConstant::Iri(i)),
            PatternTerm::Literal(l) => Ok(FilterConstant::Literal(l)),
            _ => Err(TranslateError {
                position: t.position,
                message: "only IRIs and literals can be compared with a variable".to_owned(),
            }),
        }
    };
    Ok(match (&a.kind, &b.kind) {
        (TermKind::Variable(x), TermKind::Variable(y)) => {
            FilterCondition::EqualsVars(x.clone(), y.clone())
        }
        (TermKind::Variable(x), _) => FilterCondition::EqualsConst(x.clone(), constant(b)?),
        (_, TermKind::Variable(y)) => FilterCondition::EqualsConst(y.clone(), constant(a)?),
        _ => {
            return Err(TranslateError {
                position: a.position,
                message: "a comparison needs a variable".to_owned(),
            })
        }
    })
}
