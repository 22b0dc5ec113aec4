//! Multisets of solution mappings, the algebra over them, and evaluation of
//! algebra expressions against a frozen graph.

use crate::model::StarTerm;
use crate::query::{
    FilterCondition, PatternTerm, PredicatePattern, SolutionMapping, TriplePattern, Variable,
};
use crate::store::{FrozenGraph, TermId};
use std::collections::{btree_map, BTreeMap, BTreeSet, HashMap};
use std::fmt;

/// A bag of solution mappings. Absent mappings have cardinality zero; stored
/// cardinalities are always positive.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SolutionMultiset(BTreeMap<SolutionMapping, u64>);

impl SolutionMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    /// The multiset holding only the empty mapping, once.
    pub fn unit() -> Self {
        let mut m = Self::new();
        m.insert(SolutionMapping::new(), 1);
        m
    }

    /// Adds `card` occurrences of `mapping`.
    pub fn insert(&mut self, mapping: SolutionMapping, card: u64) {
        if card > 0 {
            *self.0.entry(mapping).or_insert(0) += card;
        }
    }

    pub fn card(&self, mapping: &SolutionMapping) -> u64 {
        self.0.get(mapping).copied().unwrap_or(0)
    }

    /// Number of distinct mappings.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sum of all cardinalities.
    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn iter(&self) -> btree_map::Iter<'_, SolutionMapping, u64> {
        self.0.iter()
    }

    pub fn join(&self, other: &Self) -> Self {
        let mut out = Self::new();
        for (a, ca) in self.iter() {
            for (b, cb) in other.iter() {
                if let Ok(merged) = a.merge(b) {
                    out.insert(merged, ca * cb);
                }
            }
        }
        out
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in other.iter() {
            out.insert(m.clone(), *c);
        }
        out
    }

    /// Mappings of `self` incompatible with every mapping of `other`.
    pub fn difference(&self, other: &Self) -> Self {
        self.iter()
            .filter(|(a, _)| other.0.keys().all(|b| !a.compatible(b)))
            .map(|(m, c)| (m.clone(), *c))
            .collect()
    }

    pub fn left_outer_join(&self, other: &Self) -> Self {
        self.join(other).union(&self.difference(other))
    }

    pub fn selection(&self, condition: &FilterCondition) -> Self {
        self.iter()
            .filter(|(m, _)| condition.satisfied_by(m))
            .map(|(m, c)| (m.clone(), *c))
            .collect()
    }

    /// Restricts every mapping to `vars`, adding up mappings that coincide.
    pub fn project(&self, vars: &BTreeSet<Variable>) -> Self {
        self.iter().map(|(m, c)| (m.project(vars), *c)).collect()
    }
}

impl FromIterator<(SolutionMapping, u64)> for SolutionMultiset {
    fn from_iter<I: IntoIterator<Item = (SolutionMapping, u64)>>(iter: I) -> Self {
        let mut m = Self::new();
        for (mapping, card) in iter {
            m.insert(mapping, card);
        }
        m
    }
}

impl<'a> IntoIterator for &'a SolutionMultiset {
    type Item = (&'a SolutionMapping, &'a u64);
    type IntoIter = btree_map::Iter<'a, SolutionMapping, u64>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for SolutionMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (m, c) in self.iter() {
            writeln!(f, "{c} x {m}")?;
        }
        Ok(())
    }
}

/// The value assigned by an [`Algebra::Extend`] node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtendValue {
    Constant(StarTerm),
    /// Copies another variable; leaves the target unbound if the source is.
    Copy(Variable),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algebra {
    Bgp(BTreeSet<TriplePattern>),
    /// `(tp AS ?v)`: matches `tp` and binds `?v` to the matched triple.
    Tr(TriplePattern, Variable),
    And(Box<Algebra>, Box<Algebra>),
    Union(Box<Algebra>, Box<Algebra>),
    Opt(Box<Algebra>, Box<Algebra>),
    Filter(Box<Algebra>, FilterCondition),
    /// A standard `BIND`; mappings already binding the variable pass unchanged.
    Extend(Box<Algebra>, Variable, ExtendValue),
}

impl Algebra {
    pub fn bgp(patterns: impl IntoIterator<Item = TriplePattern>) -> Self {
        Algebra::Bgp(patterns.into_iter().collect())
    }

    pub fn and(self, other: Self) -> Self {
        Algebra::And(Box::new(self), Box::new(other))
    }

    pub fn union(self, other: Self) -> Self {
        Algebra::Union(Box::new(self), Box::new(other))
    }

    pub fn opt(self, other: Self) -> Self {
        Algebra::Opt(Box::new(self), Box::new(other))
    }

    pub fn filter(self, condition: FilterCondition) -> Self {
        Algebra::Filter(Box::new(self), condition)
    }

    /// Variables that may be bound by solutions of this expression.
    pub fn variables(&self) -> BTreeSet<Variable> {
        match self {
            Algebra::Bgp(patterns) => patterns.iter().flat_map(TriplePattern::variables).collect(),
            Algebra::Tr(tp, v) => {
                let mut vars = tp.variables();
                vars.insert(v.clone());
                vars
            }
            Algebra::And(a, b) | Algebra::Union(a, b) | Algebra::Opt(a, b) => {
                let mut vars = a.variables();
                vars.extend(b.variables());
                vars
            }
            Algebra::Filter(inner, _) => inner.variables(),
            Algebra::Extend(inner, v, _) => {
                let mut vars = inner.variables();
                vars.insert(v.clone());
                vars
            }
        }
    }
}

pub fn evaluate(expr: &Algebra, graph: &FrozenGraph) -> SolutionMultiset {
    match expr {
        Algebra::Bgp(patterns) => eval_bgp(patterns, graph),
        Algebra::Tr(tp, v) => eval_tr(tp, v, graph),
        Algebra::And(a, b) => evaluate(a, graph).join(&evaluate(b, graph)),
        Algebra::Union(a, b) => evaluate(a, graph).union(&evaluate(b, graph)),
        Algebra::Opt(a, b) => evaluate(a, graph).left_outer_join(&evaluate(b, graph)),
        Algebra::Filter(inner, condition) => evaluate(inner, graph).selection(condition),
        Algebra::Extend(inner, v, value) => evaluate(inner, graph)
            .iter()
            .map(|(m, c)| {
                let mut m = m.clone();
                if !m.contains(v) {
                    let term = match value {
                        ExtendValue::Constant(t) => Some(t.clone()),
                        ExtendValue::Copy(source) => m.get(source).cloned(),
                    };
                    if let Some(term) = term {
                        m.insert(v.clone(), term);
                    }
                }
                (m, *c)
            })
            .collect(),
    }
}

/// Evaluates `(tp AS ?v)`.
pub fn eval_tr(tp: &TriplePattern, v: &Variable, graph: &FrozenGraph) -> SolutionMultiset {
    let mut out = SolutionMultiset::new();
    for (eta, card) in eval_bgp([tp], graph).iter() {
        let triple = eta
            .apply(tp)
            .to_triple()
            .expect("a matched pattern instantiates to a triple");
        let mut extended = SolutionMapping::new();
        extended.insert(v.clone(), triple.into());
        if let Ok(merged) = eta.merge(&extended) {
            out.insert(merged, *card);
        }
    }
    out
}

/// Evaluates a basic graph pattern against asserted and embedded triples.
///
/// Each solution's cardinality is the number of distinct blank node
/// assignments that witness it.
pub fn eval_bgp<'a>(
    patterns: impl IntoIterator<Item = &'a TriplePattern>,
    graph: &FrozenGraph,
) -> SolutionMultiset {
    let patterns: Vec<&TriplePattern> = patterns.into_iter().collect();
    let Some(plan) = Plan::compile(&patterns, graph) else {
        return SolutionMultiset::new();
    };
    let mut counts: HashMap<Vec<TermId>, u64> = HashMap::new();
    let mut search = Search {
        graph,
        bindings: vec![None; plan.slot_count],
        trail: Vec::new(),
    };
    search.run(&plan.patterns, &mut |bindings| {
        let key = bindings[..plan.visible.len()]
            .iter()
            .map(|b| b.expect("every slot occurs in some pattern"))
            .collect();
        *counts.entry(key).or_insert(0) += 1;
    });
    counts
        .into_iter()
        .map(|(ids, card)| {
            let mapping = plan
                .visible
                .iter()
                .zip(ids)
                .map(|(v, id)| (v.clone(), graph.term(id).clone()))
                .collect();
            (mapping, card)
        })
        .collect()
}

/// One position of a compiled pattern.
#[derive(Debug, Clone)]
enum Slot {
    Const(TermId),
    /// Variables and blank nodes alike; only variable slots are reported.
    Var(usize),
    Nested(Box<[Slot; 3]>),
}

enum Lookup {
    Known(TermId),
    Unknown,
    Impossible,
}

struct Plan {
    /// In evaluation order.
    patterns: Vec<[Slot; 3]>,
    /// Variables for slots `0..visible.len()`; blank nodes take the rest.
    visible: Vec<Variable>,
    slot_count: usize,
}

impl Plan {
    /// Returns `None` if some constant does not occur in the graph.
    fn compile(patterns: &[&TriplePattern], graph: &FrozenGraph) -> Option<Self> {
        let visible: Vec<Variable> = patterns
            .iter()
            .flat_map(|p| p.variables())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut slots: HashMap<PatternTerm, usize> = visible
            .iter()
            .enumerate()
            .map(|(i, v)| (PatternTerm::Variable(v.clone()), i))
            .collect();
        for p in patterns {
            for b in p.blank_nodes() {
                let next = slots.len();
                slots.entry(PatternTerm::BlankNode(b)).or_insert(next);
            }
        }
        let compiled = patterns
            .iter()
            .map(|p| compile_pattern(p, &slots, graph))
            .collect::<Option<Vec<_>>>()?;
        Some(Self {
            patterns: order(compiled),
            visible,
            slot_count: slots.len(),
        })
    }
}

fn compile_pattern(
    p: &TriplePattern,
    slots: &HashMap<PatternTerm, usize>,
    graph: &FrozenGraph,
) -> Option<[Slot; 3]> {
    let predicate = match p.predicate() {
        PredicatePattern::Variable(v) => Slot::Var(slots[&PatternTerm::Variable(v.clone())]),
        PredicatePattern::Iri(i) => Slot::Const(graph.term_id(&StarTerm::Iri(i.clone()))?),
    };
    Some([
        compile_term(p.subject(), slots, graph)?,
        predicate,
        compile_term(p.object(), slots, graph)?,
    ])
}

fn compile_term(
    term: &PatternTerm,
    slots: &HashMap<PatternTerm, usize>,
    graph: &FrozenGraph,
) -> Option<Slot> {
    Some(match term {
        PatternTerm::Variable(_) | PatternTerm::BlankNode(_) => Slot::Var(slots[term]),
        PatternTerm::Iri(i) => Slot::Const(graph.term_id(&StarTerm::Iri(i.clone()))?),
        PatternTerm::Literal(l) => Slot::Const(graph.term_id(&StarTerm::Literal(l.clone()))?),
        PatternTerm::Triple(nested) => {
            Slot::Nested(Box::new(compile_pattern(nested, slots, graph)?))
        }
    })
}

/// Greedy ordering: next is the pattern with the most positions already
/// determined, ties broken by fewest new slots, then by input order.
fn order(mut patterns: Vec<[Slot; 3]>) -> Vec<[Slot; 3]> {
    fn collect(slot: &Slot, out: &mut Vec<usize>) {
        match slot {
            Slot::Const(_) => {}
            Slot::Var(i) => out.push(*i),
            Slot::Nested(inner) => inner.iter().for_each(|s| collect(s, out)),
        }
    }
    fn determined(slot: &Slot, bound: &[bool]) -> bool {
        match slot {
            Slot::Const(_) => true,
            Slot::Var(i) => bound[*i],
            Slot::Nested(inner) => inner.iter().all(|s| determined(s, bound)),
        }
    }
    let slot_count = patterns
        .iter()
        .flat_map(|p| {
            let mut v = Vec::new();
            p.iter().for_each(|s| collect(s, &mut v));
            v
        })
        .max()
        .map_or(0, |m| m + 1);
    let mut bound = vec![false; slot_count];
    let mut ordered = Vec::with_capacity(patterns.len());
    while !patterns.is_empty() {
        let best = (0..patterns.len())
            .max_by_key(|&i| {
                let p = &patterns[i];
                let score = p.iter().filter(|s| determined(s, &bound)).count();
                let mut fresh = Vec::new();
                p.iter().for_each(|s| collect(s, &mut fresh));
                fresh.retain(|&v| !bound[v]);
                fresh.sort_unstable();
                fresh.dedup();
                (score, std::cmp::Reverse(fresh.len()), std::cmp::Reverse(i))
            })
            .expect("non-empty");
        let chosen = patterns.remove(best);
        let mut vars = Vec::new();
        chosen.iter().for_each(|s| collect(s, &mut vars));
        for v in vars {
            bound[v] = true;
        }
        ordered.push(chosen);
    }
    ordered
}

struct Search<'g> {
    graph: &'g FrozenGraph,
    bindings: Vec<Option<TermId>>,
    trail: Vec<usize>,
}

impl Search<'_> {
    fn run(&mut self, patterns: &[[Slot; 3]], emit: &mut impl FnMut(&[Option<TermId>])) {
        let Some((first, rest)) = patterns.split_first() else {
            emit(&self.bindings);
            return;
        };
        let mut key = [None; 3];
        for (k, slot) in key.iter_mut().zip(first) {
            match self.lookup(slot) {
                Lookup::Known(id) => *k = Some(id),
                Lookup::Unknown => {}
                Lookup::Impossible => return,
            }
        }
        let graph = self.graph;
        for candidate in graph.scan(key[0], key[1], key[2]) {
            let mark = self.trail.len();
            if first
                .iter()
                .zip(candidate)
                .all(|(slot, id)| self.unify(slot, id))
            {
                self.run(rest, emit);
            }
            self.undo(mark);
        }
    }

    fn lookup(&self, slot: &Slot) -> Lookup {
        match slot {
            Slot::Const(id) => Lookup::Known(*id),
            Slot::Var(i) => self.bindings[*i].map_or(Lookup::Unknown, Lookup::Known),
            Slot::Nested(inner) => {
                let mut ids = [0; 3];
                let mut unknown = false;
                for (id, slot) in ids.iter_mut().zip(inner.iter()) {
                    match self.lookup(slot) {
                        Lookup::Known(k) => *id = k,
                        Lookup::Unknown => unknown = true,
                        Lookup::Impossible => return Lookup::Impossible,
                    }
                }
                if unknown {
                    Lookup::Unknown
                } else {
                    self.graph
                        .quoted_id(&ids)
                        .map_or(Lookup::Impossible, Lookup::Known)
                }
            }
        }
    }

    fn unify(&mut self, slot: &Slot, id: TermId) -> bool {
        match slot {
            Slot::Const(c) => *c == id,
            Slot::Var(i) => match self.bindings[*i] {
                Some(bound) => bound == id,
                None => {
                    self.bindings[*i] = Some(id);
                    self.trail.push(*i);
                    true
                }
            },
            Slot::Nested(inner) => match self.graph.quoted(id) {
                Some(&components) => inner.iter().zip(components).all(|(s, c)| self.unify(s, c)),
                None => false,
            },
        }
    }

    fn undo(&mut self, mark: usize) {
        for i in self.trail.drain(mark..) {
            self.bindings[i] = None;
        }
    }
}
