use crate::lexical::SourcePosition;
use crate::model::Iri;
use crate::query::Variable;

/// A parsed `SELECT` query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub prologue: Vec<PrologueDecl>,
    pub projection: Projection,
    pub pattern: GroupPattern,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrologueDecl {
    Base {
        iri: String,
        position: SourcePosition,
    },
    Prefix {
        prefix: String,
        iri: String,
        position: SourcePosition,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    All,
    Variables(Vec<Spanned<Variable>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spanned<T> {
    pub node: T,
    pub position: SourcePosition,
}

/// `{ ... }`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPattern {
    pub position: SourcePosition,
    pub elements: Vec<GroupElement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupElement {
    /// Adjacent triple statements.
    Triples(Vec<TriplesSameSubject>),
    Bind(Bind),
    Filter(Filter),
    Optional(GroupPattern),
    /// Two or more groups joined by `UNION`.
    Union(Vec<GroupPattern>),
    Group(GroupPattern),
}

/// A subject with its predicate-object list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplesSameSubject {
    pub subject: Term,
    pub predicates: Vec<(Verb, Vec<Term>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub position: SourcePosition,
    pub kind: TermKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermKind {
    Variable(Variable),
    Iri(IriRef),
    BlankNode(String),
    /// `[]`, numbered in order of appearance.
    AnonBlankNode(usize),
    Literal {
        lexical: String,
        language: Option<String>,
        datatype: Option<IriRef>,
    },
    Embedded(Box<EmbeddedPattern>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IriRef {
    /// As written between angle brackets; possibly relative.
    Written(String),
    Prefixed {
        prefix: String,
        local: String,
    },
    /// Absolute, after syntax expansion.
    Resolved(Iri),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verb {
    pub position: SourcePosition,
    pub kind: VerbKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerbKind {
    Variable(Variable),
    Iri(IriRef),
    /// The keyword `a`.
    Type,
}

/// `<< s p o >>`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddedPattern {
    pub subject: Term,
    pub verb: Verb,
    pub object: Term,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bind {
    pub position: SourcePosition,
    pub expression: BindExpression,
    pub variable: Spanned<Variable>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BindExpression {
    Embedded(Term),
    /// A variable or constant.
    Value(Term),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filter {
    pub position: SourcePosition,
    pub condition: FilterExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterExpr {
    Bound(Spanned<Variable>),
    Equals(Term, Term),
    NotEquals(Term, Term),
    Not(Box<FilterExpr>),
    Or(Box<FilterExpr>, Box<FilterExpr>),
    And(Box<FilterExpr>, Box<FilterExpr>),
}

impl Term {
    /// Variables at every nesting level, in order of appearance.
    pub fn variables(&self, out: &mut Vec<Variable>) {
        match &self.kind {
            TermKind::Variable(v) => push_unique(out, v),
            TermKind::Embedded(e) => e.variables(out),
            _ => {}
        }
    }
}

impl Verb {
    pub fn variables(&self, out: &mut Vec<Variable>) {
        if let VerbKind::Variable(v) = &self.kind {
            push_unique(out, v);
        }
    }
}

impl EmbeddedPattern {
    pub fn variables(&self, out: &mut Vec<Variable>) {
        self.subject.variables(out);
        self.verb.variables(out);
        self.object.variables(out);
    }
}

impl TriplesSameSubject {
    pub fn variables(&self, out: &mut Vec<Variable>) {
        self.subject.variables(out);
        for (verb, objects) in &self.predicates {
            verb.variables(out);
            for o in objects {
                o.variables(out);
            }
        }
    }
}

impl GroupPattern {
    /// Variables in scope at the end of the group, in order of appearance.
    pub fn in_scope_variables(&self) -> Vec<Variable> {
        let mut out = Vec::new();
        self.collect_in_scope(&mut out);
        out
    }

    fn collect_in_scope(&self, out: &mut Vec<Variable>) {
        for element in &self.elements {
            match element {
                GroupElement::Triples(block) => block.iter().for_each(|t| t.variables(out)),
                GroupElement::Bind(b) => {
                    if let BindExpression::Embedded(t) = &b.expression {
                        t.variables(out);
                    }
                    push_unique(out, &b.variable.node);
                }
                GroupElement::Filter(_) => {}
                GroupElement::Optional(g) | GroupElement::Group(g) => g.collect_in_scope(out),
                GroupElement::Union(groups) => groups.iter().for_each(|g| g.collect_in_scope(out)),
            }
        }
    }
}

fn push_unique(out: &mut Vec<Variable>, v: &Variable) {
    if !out.contains(v) {
        out.push(v.clone());
    }
}
