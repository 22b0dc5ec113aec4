//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdfstar::engine::{eval_bgp, SolutionMultiset};
use rdfstar::model::{BlankNode, Iri, Literal, StarGraph, StarTerm, StarTriple};
use rdfstar::query::{PatternTerm, PredicatePattern, SolutionMapping, TriplePattern, Variable};
use rdfstar::reify::{unfold_graph, BnodeAssignment};
use rdfstar::sparql::execute_query;
use rdfstar::turtle::{parse_turtlestar, serialize_turtlestar, TurtleErrorKind};
use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

const FOAF: &str = "http://xmlns.com/foaf/0.1/";
const DCT: &str = "http://purl.org/dc/terms/";
const EX: &str = "http://example.org/";
const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

const PROLOGUE: &str = "@prefix foaf: <http://xmlns.com/foaf/0.1/> .
@prefix dct: <http://purl.org/dc/terms/> .
@prefix : <http://example.org/> .
";

const EXAMPLE_DATA: &str = r#"  :bob foaf:name "Bob" .
  <<:bob foaf:age 23>> dct:creator <http://example.com/crawlers#c1> ;
                       dct:source <http://example.net/homepage-listing.html> .
"#;

const QUERY_PROLOGUE: &str = "PREFIX foaf: <http://xmlns.com/foaf/0.1/>
PREFIX dct: <http://purl.org/dc/terms/>
";

const QUERY_EMBEDDED: &str = r#"  SELECT ?age ?src WHERE {
     ?bob foaf:name "Bob" .
     <<?bob foaf:age ?age>> dct:source ?src .
  }
"#;

const QUERY_BIND: &str = r#"  SELECT ?age ?src WHERE {
     ?bob foaf:name "Bob" .
     BIND( <<?bob foaf:age ?age>> AS ?t )
     ?t dct:source ?src .
  }
"#;

type Outcome = Result<String, String>;

type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn iri(s: &str) -> Iri {
    Iri::new(s).unwrap()
}

fn ex(local: &str) -> Iri {
    iri(&format!("{EX}{local}"))
}

fn var(name: &str) -> Variable {
    Variable::new(name).unwrap()
}

fn typed(lexical: &str, datatype: &str) -> Literal {
    Literal::new_typed(lexical, iri(&format!("{XSD}{datatype}")))
}

fn triple(s: impl Into<StarTerm>, p: Iri, o: impl Into<StarTerm>) -> StarTriple {
    StarTriple::new(s, p, o).unwrap()
}

fn example_graph() -> StarGraph {
    parse_turtlestar(&format!("{PROLOGUE}{EXAMPLE_DATA}"), None)
        .unwrap()
        .graph
}

fn bob_age() -> StarTriple {
    triple(
        ex("bob"),
        iri(&format!("{FOAF}age")),
        typed("23", "integer"),
    )
}

fn criterion_1() -> Outcome {
    let g = example_graph();
    let bob_name = triple(
        ex("bob"),
        iri(&format!("{FOAF}name")),
        Literal::new_simple("Bob"),
    );
    let expected: BTreeSet<StarTriple> = [
        bob_name,
        triple(
            bob_age(),
            iri(&format!("{DCT}creator")),
            iri("http://example.com/crawlers#c1"),
        ),
        triple(
            bob_age(),
            iri(&format!("{DCT}source")),
            iri("http://example.net/homepage-listing.html"),
        ),
    ]
    .into();
    let asserted: BTreeSet<StarTriple> = g.iter().cloned().collect();
    ensure!(
        asserted == expected,
        "asserted triples differ: {asserted:?}"
    );
    let trefs: BTreeSet<StarTriple> = [bob_age()].into();
    ensure!(
        *g.embedded_triples() == trefs,
        "trefs = {:?}",
        g.embedded_triples()
    );
    Ok("3 asserted triples, trefs = {<:bob foaf:age 23>}".into())
}

fn criterion_2() -> Outcome {
    let (plain, assignment) = unfold_graph(&example_graph());
    let b = assignment
        .get(&bob_age())
        .ok_or("no blank node for the embedded triple")?
        .clone();
    let rdf = |l: &str| iri(&format!("{RDF}{l}"));
    let expected: BTreeSet<StarTriple> = [
        triple(
            ex("bob"),
            iri(&format!("{FOAF}name")),
            Literal::new_simple("Bob"),
        ),
        bob_age(),
        triple(b.clone(), rdf("type"), rdf("Statement")),
        triple(b.clone(), rdf("subject"), ex("bob")),
        triple(b.clone(), rdf("predicate"), iri(&format!("{FOAF}age"))),
        triple(b.clone(), rdf("object"), typed("23", "integer")),
        triple(
            b.clone(),
            iri(&format!("{DCT}creator")),
            iri("http://example.com/crawlers#c1"),
        ),
        triple(
            b.clone(),
            iri(&format!("{DCT}source")),
            iri("http://example.net/homepage-listing.html"),
        ),
    ]
    .into();
    let actual: BTreeSet<StarTriple> = plain.iter().cloned().collect();
    ensure!(plain.len() == 8, "{} triples", plain.len());
    ensure!(actual == expected, "unfolded graph differs: {actual:?}");
    let mut bnodes = BTreeSet::new();
    for t in plain.iter() {
        for term in [t.subject(), t.object()] {
            if let StarTerm::BlankNode(n) = term {
                bnodes.insert(n.clone());
            }
        }
    }
    ensure!(bnodes.len() == 1, "blank nodes: {bnodes:?}");
    Ok(format!("8 triples, b = {b}"))
}

fn criterion_3() -> Outcome {
    let g = example_graph().freeze();
    let expected: SolutionMapping = [
        (var("age"), StarTerm::from(typed("23", "integer"))),
        (
            var("src"),
            iri("http://example.net/homepage-listing.html").into(),
        ),
    ]
    .into_iter()
    .collect();
    let mut results = Vec::new();
    for query in [QUERY_EMBEDDED, QUERY_BIND] {
        let r =
            execute_query(&format!("{QUERY_PROLOGUE}{query}"), &g).map_err(|e| e.to_string())?;
        ensure!(
            r.variables == [var("age"), var("src")],
            "projection {:?}",
            r.variables
        );
        ensure!(
            r.solutions.len() == 1,
            "{} distinct solutions",
            r.solutions.len()
        );
        ensure!(
            r.solutions.card(&expected) == 1,
            "solutions: {}",
            r.solutions
        );
        results.push(r.solutions);
    }
    ensure!(
        results[0] == results[1],
        "forms differ: {} vs {}",
        results[0],
        results[1]
    );
    Ok("both forms: 1 x {?age -> 23, ?src -> <http://example.net/homepage-listing.html>}".into())
}

// Random RDF* data for criteria 4 and 7.
struct Vocabulary {
    subjects: Vec<StarTerm>,
    predicates: Vec<Iri>,
    objects: Vec<StarTerm>,
}

impl Vocabulary {
    fn with_blank_nodes() -> Self {
        let mut v = Self::without_blank_nodes();
        for l in ["g1", "g2"] {
            let b = StarTerm::from(BlankNode::new(l).unwrap());
            v.subjects.push(b.clone());
            v.objects.push(b);
        }
        v
    }

    fn without_blank_nodes() -> Self {
        let iris: Vec<StarTerm> = ["a", "b", "c"].iter().map(|l| ex(l).into()).collect();
        let mut objects = iris.clone();
        objects.push(Literal::new_simple("x").into());
        objects.push(typed("1", "integer").into());
        objects.push(Literal::new_language_tagged("y", "en").unwrap().into());
        Vocabulary {
            subjects: iris,
            predicates: vec![ex("p"), ex("q")],
            objects,
        }
    }

    fn term(&self, rng: &mut ChaCha8Rng, depth: usize, subject: bool) -> StarTerm {
        if depth > 0 && rng.gen_bool(0.3) {
            return self.triple(rng, depth - 1).into();
        }
        let pool = if subject {
            &self.subjects
        } else {
            &self.objects
        };
        pool.choose(rng).unwrap().clone()
    }

    fn triple(&self, rng: &mut ChaCha8Rng, depth: usize) -> StarTriple {
        let s = self.term(rng, depth, true);
        let p = self.predicates.choose(rng).unwrap().clone();
        let o = self.term(rng, depth, false);
        triple(s, p, o)
    }

    fn graph(&self, rng: &mut ChaCha8Rng, max_triples: usize, max_depth: usize) -> StarGraph {
        let n = rng.gen_range(0..=max_triples);
        (0..n).map(|_| self.triple(rng, max_depth)).collect()
    }
}

/// Walks every triple, at any depth, of the graph.
fn universe(g: &StarGraph) -> BTreeSet<StarTriple> {
    fn walk(t: &StarTriple, out: &mut BTreeSet<StarTriple>) {
        out.insert(t.clone());
        for term in [t.subject(), t.object()] {
            if let StarTerm::Triple(inner) = term {
                walk(inner, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    g.iter().for_each(|t| walk(t, &mut out));
    out
}

fn has_blank_node(term: &StarTerm) -> bool {
    match term {
        StarTerm::BlankNode(_) => true,
        StarTerm::Triple(t) => has_blank_node(t.subject()) || has_blank_node(t.object()),
        _ => false,
    }
}

struct PatternShape {
    variables: [&'static str; 3],
    blank_node: Option<&'static str>,
    variable_predicates: bool,
}

fn pattern_term(
    rng: &mut ChaCha8Rng,
    term: &StarTerm,
    top: bool,
    shape: &PatternShape,
) -> PatternTerm {
    if let StarTerm::Triple(t) = term {
        if rng.gen_bool(0.4) {
            return pattern_from(rng, t, false, shape).into();
        }
    }
    let roll = rng.gen_range(0..10);
    if roll < 4 && !has_blank_node(term) {
        return match term {
            StarTerm::Triple(t) => TriplePattern::from(&**t).into(),
            other => other.clone().into(),
        };
    }
    match shape.blank_node {
        Some(label) if top && roll == 9 => BlankNode::new(label).unwrap().into(),
        _ => var(shape.variables.choose(rng).unwrap()).into(),
    }
}

fn pattern_from(
    rng: &mut ChaCha8Rng,
    t: &StarTriple,
    top: bool,
    shape: &PatternShape,
) -> TriplePattern {
    let s = pattern_term(rng, t.subject(), top, shape);
    let p = if shape.variable_predicates && rng.gen_bool(0.2) {
        PredicatePattern::from(var(shape.variables.choose(rng).unwrap()))
    } else {
        PredicatePattern::from(t.predicate().clone())
    };
    let o = pattern_term(rng, t.object(), top, shape);
    TriplePattern::new(s, p, o).unwrap()
}

fn random_bgp(
    rng: &mut ChaCha8Rng,
    vocabulary: &Vocabulary,
    g: &StarGraph,
    shape: &PatternShape,
) -> Vec<TriplePattern> {
    let sources: Vec<StarTriple> = universe(g).into_iter().collect();
    let n = rng.gen_range(0..=3);
    (0..n)
        .map(|_| {
            let source = match sources.choose(rng) {
                Some(t) if rng.gen_bool(0.75) => t.clone(),
                _ => vocabulary.triple(rng, 2),
            };
            pattern_from(rng, &source, true, shape)
        })
        .collect()
}

/// Exhaustive evaluation: every assignment of candidate terms to the
/// variables and blank nodes of the BGP, checked pattern by pattern.
fn brute_force(g: &StarGraph, bgp: &[TriplePattern]) -> SolutionMultiset {
    enum Slot {
        Var(Variable),
        Blank(BlankNode),
    }
    let matchable = universe(g);
    let mut candidates = BTreeSet::new();
    for t in &matchable {
        candidates.insert(StarTerm::Triple(t.clone().into()));
        candidates.insert(t.subject().clone());
        candidates.insert(StarTerm::Iri(t.predicate().clone()));
        candidates.insert(t.object().clone());
    }
    let candidates: Vec<StarTerm> = candidates.into_iter().collect();

    let mut slots = Vec::new();
    for tp in bgp {
        for v in tp.variables() {
            if !slots.iter().any(|s| matches!(s, Slot::Var(w) if *w == v)) {
                slots.push(Slot::Var(v));
            }
        }
        for b in tp.blank_nodes() {
            if !slots.iter().any(|s| matches!(s, Slot::Blank(c) if *c == b)) {
                slots.push(Slot::Blank(b));
            }
        }
    }

    fn instantiate(
        tp: &TriplePattern,
        vars: &BTreeMap<Variable, StarTerm>,
        blanks: &BTreeMap<BlankNode, StarTerm>,
    ) -> Option<StarTriple> {
        let term = |t: &PatternTerm| -> Option<StarTerm> {
            match t {
                PatternTerm::Variable(v) => vars.get(v).cloned(),
                PatternTerm::BlankNode(b) => blanks.get(b).cloned(),
                PatternTerm::Iri(i) => Some(i.clone().into()),
                PatternTerm::Literal(l) => Some(l.clone().into()),
                PatternTerm::Triple(inner) => instantiate(inner, vars, blanks).map(StarTerm::from),
            }
        };
        let predicate = match tp.predicate() {
            PredicatePattern::Iri(i) => i.clone(),
            PredicatePattern::Variable(v) => match vars.get(v)? {
                StarTerm::Iri(i) => i.clone(),
                _ => return None,
            },
        };
        StarTriple::new(term(tp.subject())?, predicate, term(tp.object())?).ok()
    }

    struct Search<'a> {
        bgp: &'a [TriplePattern],
        slots: &'a [Slot],
        candidates: &'a [StarTerm],
        matchable: &'a BTreeSet<StarTriple>,
        vars: BTreeMap<Variable, StarTerm>,
        blanks: BTreeMap<BlankNode, StarTerm>,
        out: SolutionMultiset,
    }

    impl Search<'_> {
        // Every pattern whose slots are all assigned must match.
        fn consistent(&self) -> bool {
            self.bgp.iter().all(|tp| {
                let complete = tp.variables().iter().all(|v| self.vars.contains_key(v))
                    && tp.blank_nodes().iter().all(|b| self.blanks.contains_key(b));
                !complete
                    || instantiate(tp, &self.vars, &self.blanks)
                        .is_some_and(|t| self.matchable.contains(&t))
            })
        }

        fn run(&mut self, i: usize) {
            if !self.consistent() {
                return;
            }
            if i == self.slots.len() {
                let eta: SolutionMapping = self.vars.clone().into_iter().collect();
                self.out.insert(eta, 1);
                return;
            }
            for c in self.candidates {
                match &self.slots[i] {
                    Slot::Var(v) => self.vars.insert(v.clone(), c.clone()),
                    Slot::Blank(b) => self.blanks.insert(b.clone(), c.clone()),
                };
                self.run(i + 1);
                match &self.slots[i] {
                    Slot::Var(v) => self.vars.remove(v),
                    Slot::Blank(b) => self.blanks.remove(b),
                };
            }
        }
    }

    let mut search = Search {
        bgp,
        slots: &slots,
        candidates: &candidates,
        matchable: &matchable,
        vars: BTreeMap::new(),
        blanks: BTreeMap::new(),
        out: SolutionMultiset::new(),
    };
    search.run(0);
    search.out
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let vocabulary = Vocabulary::with_blank_nodes();
    let shape = PatternShape {
        variables: ["x", "y", "z"],
        blank_node: Some("b"),
        variable_predicates: true,
    };
    let (mut nonempty, mut multiplied) = (0, 0);
    const INSTANCES: usize = 500;
    for i in 0..INSTANCES {
        let g = vocabulary.graph(&mut rng, 12, 2);
        let bgp = random_bgp(&mut rng, &vocabulary, &g, &shape);
        let expected = brute_force(&g, &bgp);
        let actual = eval_bgp(&bgp, &g.clone().freeze());
        ensure!(
            actual == expected,
            "instance {i}: BGP {bgp:?}\nengine: {actual}\noracle: {expected}"
        );
        nonempty += usize::from(!expected.is_empty());
        multiplied += usize::from(expected.iter().any(|(_, c)| *c > 1));
    }
    Ok(format!(
        "{INSTANCES} instances, {nonempty} with solutions, {multiplied} with cardinality > 1"
    ))
}

fn random_multiset(rng: &mut ChaCha8Rng) -> SolutionMultiset {
    let values: Vec<StarTerm> = vec![
        ex("a").into(),
        ex("b").into(),
        typed("1", "integer").into(),
        triple(ex("a"), ex("p"), ex("b")).into(),
    ];
    let mut m = SolutionMultiset::new();
    for _ in 0..rng.gen_range(0..=5) {
        let mut mapping = SolutionMapping::new();
        for v in ["x", "y", "z"] {
            if rng.gen_bool(0.6) {
                mapping.insert(var(v), values.choose(rng).unwrap().clone());
            }
        }
        m.insert(mapping, rng.gen_range(1..=3));
    }
    m
}

fn compatible(a: &SolutionMapping, b: &SolutionMapping) -> bool {
    a.iter().all(|(v, t)| b.get(v).is_none_or(|u| u == t))
}

fn naive_join(a: &SolutionMultiset, b: &SolutionMultiset) -> SolutionMultiset {
    let mut out = SolutionMultiset::new();
    for (m1, c1) in a.iter() {
        for (m2, c2) in b.iter() {
            if compatible(m1, m2) {
                let merged: SolutionMapping = m1
                    .iter()
                    .chain(m2.iter())
                    .map(|(v, t)| (v.clone(), t.clone()))
                    .collect();
                out.insert(merged, c1 * c2);
            }
        }
    }
    out
}

fn naive_union(a: &SolutionMultiset, b: &SolutionMultiset) -> SolutionMultiset {
    let mut out = SolutionMultiset::new();
    for (m, c) in a.iter().chain(b.iter()) {
        out.insert(m.clone(), *c);
    }
    out
}

fn naive_difference(a: &SolutionMultiset, b: &SolutionMultiset) -> SolutionMultiset {
    let mut out = SolutionMultiset::new();
    for (m1, c1) in a.iter() {
        if !b.iter().any(|(m2, _)| compatible(m1, m2)) {
            out.insert(m1.clone(), *c1);
        }
    }
    out
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    const INSTANCES: usize = 300;
    let mut nonempty_joins = 0;
    for i in 0..INSTANCES {
        let (a, b, c) = (
            random_multiset(&mut rng),
            random_multiset(&mut rng),
            random_multiset(&mut rng),
        );
        let loj = a.left_outer_join(&b);
        ensure!(
            loj == a.join(&b).union(&a.difference(&b)),
            "instance {i}: LOJ identity\n{a}\n{b}"
        );
        ensure!(
            loj == naive_union(&naive_join(&a, &b), &naive_difference(&a, &b)),
            "instance {i}: LOJ differs from the definition"
        );
        ensure!(a.join(&b) == naive_join(&a, &b), "instance {i}: join");
        ensure!(a.union(&b) == naive_union(&a, &b), "instance {i}: union");
        ensure!(
            a.difference(&b) == naive_difference(&a, &b),
            "instance {i}: difference"
        );
        ensure!(a.join(&b) == b.join(&a), "instance {i}: join commutativity");
        ensure!(
            a.union(&b) == b.union(&a),
            "instance {i}: union commutativity"
        );
        ensure!(
            a.join(&b).join(&c) == a.join(&b.join(&c)),
            "instance {i}: join associativity"
        );
        ensure!(
            a.union(&b).union(&c) == a.union(&b.union(&c)),
            "instance {i}: union associativity"
        );
        nonempty_joins += usize::from(!a.join(&b).is_empty());
    }
    Ok(format!(
        "{INSTANCES} triples of multisets, {nonempty_joins} non-empty joins"
    ))
}

fn random_literal(rng: &mut ChaCha8Rng) -> Literal {
    const CHARS: &[char] = &[
        'a', 'Z', ' ', '"', '\'', '\\', '\n', '\r', '\t', 'é', '€', '😀', '>', '#', '.',
    ];
    let text: String = (0..rng.gen_range(0..6))
        .map(|_| *CHARS.choose(rng).unwrap())
        .collect();
    match rng.gen_range(0..7) {
        0 => Literal::new_simple(text),
        1 => Literal::new_language_tagged(text, *["en", "de-ch", "x-y1"].choose(rng).unwrap())
            .unwrap(),
        2 => typed(
            ["0", "-7", "+3", "0042", "12a"].choose(rng).unwrap(),
            "integer",
        ),
        3 => typed(
            ["1.5", "-.5", "2.", "1.2.3"].choose(rng).unwrap(),
            "decimal",
        ),
        4 => typed(
            ["1e3", "-2.5E-1", ".5e1", "e1"].choose(rng).unwrap(),
            "double",
        ),
        5 => typed(["true", "false", "TRUE"].choose(rng).unwrap(), "boolean"),
        _ => Literal::new_typed(text, ex("dt")),
    }
}

fn random_leaf(rng: &mut ChaCha8Rng, subject: bool) -> StarTerm {
    let iris = [
        format!("{EX}a"),
        format!("{EX}ns#b"),
        format!("{EX}x.y"),
        format!("{EX}end."),
        "http://other.org/path/".to_owned(),
        "urn:isbn:0451450523".to_owned(),
    ];
    match rng.gen_range(0..if subject { 4 } else { 6 }) {
        0..=2 => iri(iris.choose(rng).unwrap()).into(),
        3 => BlankNode::new(*["n1", "n2", "a.b"].choose(rng).unwrap())
            .unwrap()
            .into(),
        _ => random_literal(rng).into(),
    }
}

/// A triple of nesting depth exactly `depth`.
fn nested_triple(rng: &mut ChaCha8Rng, depth: usize) -> StarTriple {
    let predicate = iri(
        &[format!("{EX}p"), format!("{RDF}type"), format!("{EX}ns#q")]
            .choose(rng)
            .unwrap()
            .clone(),
    );
    if depth == 0 {
        return triple(random_leaf(rng, true), predicate, random_leaf(rng, false));
    }
    let deep: StarTerm = nested_triple(rng, depth - 1).into();
    let shallow_depth = rng.gen_range(0..depth);
    let other: StarTerm = if rng.gen_bool(0.5) {
        nested_triple(rng, shallow_depth).into()
    } else {
        random_leaf(rng, false)
    };
    if rng.gen_bool(0.5) {
        let subject = match other {
            StarTerm::Literal(_) => random_leaf(rng, true),
            other => other,
        };
        triple(subject, predicate, deep)
    } else {
        triple(deep, predicate, other)
    }
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let prefixes: BTreeMap<String, Iri> = [
        ("".to_owned(), ex("ns#")),
        ("ex".to_owned(), ex("")),
        ("rdf".to_owned(), iri(RDF)),
        ("xsd".to_owned(), iri(XSD)),
    ]
    .into();
    const INSTANCES: usize = 150;
    let mut deepest = 0;
    for i in 0..INSTANCES {
        let mut g = StarGraph::new();
        g.insert(nested_triple(&mut rng, i % 6));
        for _ in 0..rng.gen_range(0..8) {
            let depth = rng.gen_range(0..=5);
            g.insert(nested_triple(&mut rng, depth));
        }
        deepest = deepest.max(g.max_nesting_depth());
        let text = serialize_turtlestar(&g, &prefixes);
        let back = parse_turtlestar(&text, None)
            .map_err(|e| format!("instance {i}: {e}\n{text}"))?
            .graph;
        ensure!(
            back == g,
            "instance {i}: round trip changed the graph\n{text}"
        );
    }
    ensure!(deepest == 5, "deepest graph has depth {deepest}");
    Ok(format!("{INSTANCES} graphs, nesting up to {deepest}"))
}

/// Replaces each embedded pattern by a fresh variable described by the four
/// reification patterns.
fn reification_expanded(bgp: &[TriplePattern]) -> Vec<TriplePattern> {
    fn lower(term: &PatternTerm, counter: &mut usize, out: &mut Vec<TriplePattern>) -> PatternTerm {
        let PatternTerm::Triple(inner) = term else {
            return term.clone();
        };
        *counter += 1;
        let e = var(&format!("reif{counter}"));
        let s = lower(inner.subject(), counter, out);
        let o = lower(inner.object(), counter, out);
        let rdf = |l: &str| iri(&format!("{RDF}{l}"));
        out.push(TriplePattern::new(e.clone(), rdf("type"), rdf("Statement")).unwrap());
        out.push(TriplePattern::new(e.clone(), rdf("subject"), s).unwrap());
        let p = match inner.predicate() {
            PredicatePattern::Iri(i) => PatternTerm::from(i.clone()),
            PredicatePattern::Variable(v) => PatternTerm::from(v.clone()),
        };
        out.push(TriplePattern::new(e.clone(), rdf("predicate"), p).unwrap());
        out.push(TriplePattern::new(e.clone(), rdf("object"), o).unwrap());
        e.into()
    }
    let mut counter = 0;
    let mut out = Vec::new();
    for tp in bgp {
        let s = lower(tp.subject(), &mut counter, &mut out);
        let o = lower(tp.object(), &mut counter, &mut out);
        out.push(TriplePattern::new(s, tp.predicate().clone(), o).unwrap());
    }
    out
}

fn through_assignment(
    m: &SolutionMapping,
    assignment: &BnodeAssignment,
) -> Option<SolutionMapping> {
    m.iter()
        .map(|(v, t)| {
            let value = match t {
                StarTerm::Triple(inner) => assignment.get(inner)?.clone().into(),
                other => other.clone(),
            };
            Some((v.clone(), value))
        })
        .collect()
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let vocabulary = Vocabulary::without_blank_nodes();
    let shape = PatternShape {
        variables: ["x", "y", "z"],
        blank_node: None,
        variable_predicates: false,
    };
    const INSTANCES: usize = 500;
    let (mut nonempty, mut with_embedded) = (0, 0);
    for i in 0..INSTANCES {
        let g = vocabulary.graph(&mut rng, 10, 2);
        let bgp = random_bgp(&mut rng, &vocabulary, &g, &shape);
        let star = eval_bgp(&bgp, &g.clone().freeze());
        let (plain, assignment) = unfold_graph(&g);
        let unfolded: StarGraph = plain.iter().cloned().collect();
        let expanded = reification_expanded(&bgp);
        let reified = eval_bgp(&expanded, &unfolded.freeze());
        ensure!(
            reified.iter().all(|(_, c)| *c == 1),
            "instance {i}: repeated reified solution"
        );
        let original: BTreeSet<Variable> = bgp.iter().flat_map(|tp| tp.variables()).collect();
        let reified = reified.project(&original);
        let mut mapped = SolutionMultiset::new();
        for (m, c) in star.iter() {
            ensure!(
                *c == 1,
                "instance {i}: cardinality {c} for a blank-node-free BGP"
            );
            let image = through_assignment(m, &assignment)
                .ok_or(format!("instance {i}: unassigned triple in {m}"))?;
            mapped.insert(image, 1);
        }
        ensure!(
            mapped.iter().all(|(_, c)| *c == 1),
            "instance {i}: two solutions share an image"
        );
        ensure!(
            mapped == reified,
            "instance {i}: BGP {bgp:?}\nRDF*: {star}\nmapped: {mapped}\nreified: {reified}"
        );
        nonempty += usize::from(!star.is_empty());
        with_embedded += usize::from(!star.is_empty() && expanded.len() > bgp.len());
    }
    Ok(format!(
        "{INSTANCES} instances, {nonempty} with solutions, {with_embedded} of those with embedded patterns"
    ))
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_rdfstar"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let write = |name: &str, text: &str| {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        path.to_str().unwrap().to_owned()
    };

    let bad_data = format!("{PROLOGUE}<<\"Bob\" :p :o>> :q :r .\n");
    let e = parse_turtlestar(&bad_data, None)
        .err()
        .ok_or("literal subject accepted")?;
    ensure!(e.kind == TurtleErrorKind::LiteralSubject, "{e}");
    ensure!(
        (e.position.line, e.position.column) == (4, 3),
        "literal subject at {}",
        e.position
    );
    let path = write("literal.ttl", &bad_data);
    let (code, err) = cli(&["validate", &path]);
    ensure!(
        code == 1 && err.contains("parse error at 4:3"),
        "validate: {code} {err}"
    );

    let data = write("data.ttl", &format!("{PROLOGUE}{EXAMPLE_DATA}"));
    let cases = [
        (
            "SELECT * {\n  <<_:b <http://p> ?o>> <http://q> ?z }",
            "parse error at 2:5",
        ),
        (
            "SELECT * {\n  ?z <http://q> <<?s <http://p> []>> }",
            "parse error at 2:33",
        ),
        (
            "SELECT * {\n  ?t <http://p> ?o .\n  BIND(<<?a <http://q> ?b>> AS ?t)\n}",
            "scope error at 3:32",
        ),
        (
            "SELECT * {\n  ?s <http://p>/<http://q> ?o }",
            "parse error at 2:16",
        ),
        ("SELECT * {\n  ?s <http://p>* ?o }", "parse error at 2:16"),
        ("SELECT * {\n  ?s ^<http://p> ?o }", "parse error at 2:6"),
        (
            "SELECT * {\n  ?s <http://p>|<http://q> ?o }",
            "parse error at 2:16",
        ),
    ];
    for (i, (text, expected)) in cases.iter().enumerate() {
        let query = write(&format!("q{i}.rq"), text);
        let (code, err) = cli(&["query", &data, &query]);
        ensure!(code == 1, "{text}: exit {code}");
        ensure!(err.contains(expected), "{text}: {err}");
    }

    let good = write("good.rq", &format!("{QUERY_PROLOGUE}{QUERY_BIND}"));
    ensure!(cli(&["validate", &data]).0 == 0, "valid data rejected");
    ensure!(cli(&["query", &data, &good]).0 == 0, "valid query rejected");
    let missing = dir.path().join("missing.ttl");
    ensure!(
        cli(&["validate", missing.to_str().unwrap()]).0 == 2,
        "missing file"
    );
    Ok(format!(
        "{} rejected inputs with positions, exit codes 0/1/2",
        cases.len() + 1
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (
            "Turtle* parse of the example graph",
            Some(Duration::from_secs(1)),
            criterion_1,
        ),
        (
            "unfolding to reification",
            Some(Duration::from_secs(1)),
            criterion_2,
        ),
        (
            "both query forms over the example graph",
            Some(Duration::from_secs(1)),
            criterion_3,
        ),
        (
            "BGP evaluation against brute force",
            Some(Duration::from_secs(60)),
            criterion_4,
        ),
        (
            "multiset algebra identities",
            Some(Duration::from_secs(10)),
            criterion_5,
        ),
        (
            "Turtle* round trip",
            Some(Duration::from_secs(10)),
            criterion_6,
        ),
        (
            "reification correspondence",
            Some(Duration::from_secs(30)),
            criterion_7,
        ),
        ("negative grammar tests", None, criterion_8),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, (name, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(format!("panicked: {}", describe_panic(&p))));
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(limit)) if elapsed > limit => {
                Err(format!("took {elapsed:.2?}, limit {limit:?}"))
            }
            (other, _) => other,
        };
        let budget = limit.map_or(String::new(), |l| format!(" of {l:?}"));
        match outcome {
            Ok(detail) => println!(
                "criterion {}: PASS  {name}: {detail} [{elapsed:.2?}{budget}]",
                n + 1
            ),
            Err(reason) => {
                failed += 1;
                println!(
                    "criterion {}: FAIL  {name}: {reason} [{elapsed:.2?}{budget}]",
                    n + 1
                );
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn describe_panic(payload: &Box<dyn std::any::Any + Send>) -> String {
    payload
        .downcast_ref::<String>()
        .cloned()
        .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_default()
}
