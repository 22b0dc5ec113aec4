//! Unfolding of nested-triple graphs into ordinary RDF using the standard
//! reification vocabulary.
//!
//! Every embedded triple gets a fresh blank node `b` and four triples
//! `b rdf:type rdf:Statement`, `b rdf:subject s`, `b rdf:predicate p` and
//! `b rdf:object o`. Metadata triples are rewritten to point at `b`, and the
//! embedded triple itself is asserted as well.

use crate::model::{BlankNode, Iri, StarGraph, StarTerm, StarTriple};
use crate::vocab::rdf;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReificationError {
    #[error("triple << {0} >> has no blank node in the assignment")]
    Unassigned(Box<StarTriple>),
    #[error("triple << {0} >> is nested and cannot appear in a plain RDF graph")]
    Nested(Box<StarTriple>),
}

/// A bijection from the embedded triples of a graph to blank nodes that
/// occur nowhere in that graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BnodeAssignment {
    ids: BTreeMap<StarTriple, BlankNode>,
    triples: BTreeMap<BlankNode, StarTriple>,
}

impl BnodeAssignment {
    /// Assigns `_:t1`, `_:t2`, ... to the embedded triples of `graph` in
    /// canonical order, skipping labels the graph already uses.
    pub fn for_graph(graph: &StarGraph) -> Self {
        let used: HashSet<String> = graph
            .terms_plus()
            .into_iter()
            .filter_map(|t| match t {
                StarTerm::BlankNode(b) => Some(b.label().to_owned()),
                _ => None,
            })
            .collect();
        let mut ids = BTreeMap::new();
        let mut triples = BTreeMap::new();
        let mut counter = 0usize;
        for t in graph.embedded_triples() {
            let node = loop {
                counter += 1;
                let label = format!("t{counter}");
                if !used.contains(&label) {
                    break BlankNode::new(label).expect("generated label is valid");
                }
            };
            ids.insert(t.clone(), node.clone());
            triples.insert(node, t.clone());
        }
        Self { ids, triples }
    }

    pub fn get(&self, triple: &StarTriple) -> Option<&BlankNode> {
        self.ids.get(triple)
    }

    /// Inverse lookup: the embedded triple a blank node stands for.
    pub fn triple_for(&self, node: &BlankNode) -> Option<&StarTriple> {
        self.triples.get(node)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StarTriple, &BlankNode)> {
        self.ids.iter()
    }

    fn node(&self, triple: &StarTriple) -> Result<&BlankNode, ReificationError> {
        self.ids
            .get(triple)
            .ok_or_else(|| ReificationError::Unassigned(Box::new(triple.clone())))
    }

    /// Replaces an embedded triple by its blank node, identity otherwise.
    fn replace(&self, term: &StarTerm) -> Result<StarTerm, ReificationError> {
        match term {
            StarTerm::Triple(t) => Ok(StarTerm::BlankNode(self.node(t)?.clone())),
            other => Ok(other.clone()),
        }
    }
}

/// A set of ordinary RDF triples (none of them nested).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlainGraph {
    triples: BTreeSet<StarTriple>,
}

impl PlainGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, triple: StarTriple) -> Result<bool, ReificationError> {
        if triple.is_metadata() {
            return Err(ReificationError::Nested(Box::new(triple)));
        }
        Ok(self.triples.insert(triple))
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

    pub fn iter(&self) -> impl Iterator<Item = &StarTriple> {
        self.triples.iter()
    }

    fn absorb(&mut self, other: PlainGraph) {
        self.triples.extend(other.triples);
    }
}

impl TryFrom<StarGraph> for PlainGraph {
    type Error = ReificationError;

    fn try_from(graph: StarGraph) -> Result<Self, Self::Error> {
        let mut plain = PlainGraph::new();
        for t in graph.iter() {
            plain.insert(t.clone())?;
        }
        Ok(plain)
    }
}

impl From<PlainGraph> for StarGraph {
    fn from(plain: PlainGraph) -> Self {
        plain.triples.into_iter().collect()
    }
}

impl<'a> IntoIterator for &'a PlainGraph {
    type Item = &'a StarTriple;
    type IntoIter = std::collections::btree_set::Iter<'a, StarTriple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.iter()
    }
}

fn plain(subject: impl Into<StarTerm>, predicate: &str, object: impl Into<StarTerm>) -> StarTriple {
    StarTriple::new(subject, Iri::known(predicate), object).expect("reification triples are plain")
}

/// The four reification triples describing `triple`.
pub fn reify(
    triple: &StarTriple,
    assignment: &BnodeAssignment,
) -> Result<[StarTriple; 4], ReificationError> {
    let node = assignment.node(triple)?.clone();
    Ok([
        plain(node.clone(), rdf::TYPE, Iri::known(rdf::STATEMENT)),
        plain(
            node.clone(),
            rdf::SUBJECT,
            assignment.replace(triple.subject())?,
        ),
        plain(node.clone(), rdf::PREDICATE, triple.predicate().clone()),
        plain(node, rdf::OBJECT, assignment.replace(triple.object())?),
    ])
}

/// Unfolds one triple: embedded triples are replaced by their blank nodes,
/// and each embedded triple contributes its reification and, recursively,
/// its own unfolding.
pub fn unfold_triple(
    triple: &StarTriple,
    assignment: &BnodeAssignment,
) -> Result<PlainGraph, ReificationError> {
    let mut out = PlainGraph::new();
    unfold_into(triple, assignment, &mut out)?;
    Ok(out)
}

fn unfold_into(
    triple: &StarTriple,
    assignment: &BnodeAssignment,
    out: &mut PlainGraph,
) -> Result<(), ReificationError> {
    if !triple.is_metadata() {
        out.triples.insert(triple.clone());
        return Ok(());
    }
    let rewritten = StarTriple::new(
        assignment.replace(triple.subject())?,
        triple.predicate().clone(),
        assignment.replace(triple.object())?,
    )
    .expect("replacing embedded triples by blank nodes keeps the subject valid");
    out.triples.insert(rewritten);
    for embedded in triple.direct_embedded() {
        out.triples.extend(reify(embedded, assignment)?);
        unfold_into(embedded, assignment, out)?;
    }
    Ok(())
}

/// Unfolds a whole graph with one shared assignment, which is returned so
/// callers can map blank nodes back to embedded triples.
pub fn unfold_graph(graph: &StarGraph) -> (PlainGraph, BnodeAssignment) {
    let assignment = BnodeAssignment::for_graph(graph);
    let mut out = PlainGraph::new();
    for t in graph.iter() {
        let unfolded = unfold_triple(t, &assignment)
            .expect("the assignment covers every embedded triple of the graph");
        out.absorb(unfolded);
    }
    (out, assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{arb_triple, example_graph, iri, t};
    use crate::model::Literal;
    use crate::vocab::xsd;
    use proptest::prelude::*;

    fn bob_age() -> StarTriple {
        t(
            iri("bob"),
            "age",
            Literal::new_typed("23", Iri::known(xsd::INTEGER)),
        )
    }

    fn bnode(l: &str) -> BlankNode {
        BlankNode::new(l).unwrap()
    }

    fn rdf_t(s: impl Into<StarTerm>, p: &str, o: impl Into<StarTerm>) -> StarTriple {
        StarTriple::new(s, Iri::known(p), o).unwrap()
    }

    #[test]
    fn assignment_for_example() {
        let a = BnodeAssignment::for_graph(&example_graph());
        assert_eq!(a.len(), 1);
        assert_eq!(a.get(&bob_age()), Some(&bnode("t1")));
        assert_eq!(a.triple_for(&bnode("t1")), Some(&bob_age()));
        let empty = BnodeAssignment::for_graph(&[t(iri("a"), "p", iri("b"))].into_iter().collect());
        assert!(empty.is_empty());
    }

    #[test]
    fn assignment_skips_used_labels() {
        let mut g = example_graph();
        g.insert(t(bnode("t1"), "p", iri("x")));
        let a = BnodeAssignment::for_graph(&g);
        assert_eq!(a.get(&bob_age()), Some(&bnode("t2")));
    }

    #[test]
    fn reify_bob_age() {
        let a = BnodeAssignment::for_graph(&example_graph());
        let b = bnode("t1");
        let got: BTreeSet<_> = reify(&bob_age(), &a).unwrap().into();
        let want: BTreeSet<_> = [
            rdf_t(b.clone(), rdf::TYPE, Iri::known(rdf::STATEMENT)),
            rdf_t(b.clone(), rdf::SUBJECT, iri("bob")),
            rdf_t(b.clone(), rdf::PREDICATE, iri("age")),
            rdf_t(
                b,
                rdf::OBJECT,
                Literal::new_typed("23", Iri::known(xsd::INTEGER)),
            ),
        ]
        .into();
        assert_eq!(got, want);
    }

    #[test]
    fn reify_nested_subject_uses_inner_node() {
        let inner = t(iri("a"), "p", iri("b"));
        let middle = t(inner.clone(), "q", iri("c"));
        let g: StarGraph = [t(middle.clone(), "r", iri("d"))].into_iter().collect();
        let a = BnodeAssignment::for_graph(&g);
        let inner_node = a.get(&inner).unwrap().clone();
        let quad = reify(&middle, &a).unwrap();
        assert!(quad.contains(&rdf_t(
            a.get(&middle).unwrap().clone(),
            rdf::SUBJECT,
            inner_node
        )));
    }

    #[test]
    fn reify_outside_domain_fails() {
        let a = BnodeAssignment::for_graph(&example_graph());
        let stranger = t(iri("x"), "p", iri("y"));
        assert_eq!(
            reify(&stranger, &a),
            Err(ReificationError::Unassigned(Box::new(stranger)))
        );
    }

    #[test]
    fn unfold_plain_triple_is_identity() {
        let a = BnodeAssignment::for_graph(&example_graph());
        let name = t(iri("bob"), "name", Literal::new_simple("Bob"));
        let u = unfold_triple(&name, &a).unwrap();
        assert_eq!(u.iter().collect::<Vec<_>>(), vec![&name]);
    }

    #[test]
    fn unfold_metadata_triple() {
        let a = BnodeAssignment::for_graph(&example_graph());
        let meta = t(bob_age(), "creator", iri("c1"));
        let u = unfold_triple(&meta, &a).unwrap();
        let mut want: BTreeSet<_> = reify(&bob_age(), &a).unwrap().into();
        want.insert(t(bnode("t1"), "creator", iri("c1")));
        want.insert(bob_age());
        assert_eq!(u.triples, want);
    }

    #[test]
    fn unfold_example_graph_gives_eight_triples() {
        let (u, a) = unfold_graph(&example_graph());
        let b = a.get(&bob_age()).unwrap().clone();
        let want: BTreeSet<_> = [
            t(iri("bob"), "name", Literal::new_simple("Bob")),
            bob_age(),
            rdf_t(b.clone(), rdf::TYPE, Iri::known(rdf::STATEMENT)),
            rdf_t(b.clone(), rdf::SUBJECT, iri("bob")),
            rdf_t(b.clone(), rdf::PREDICATE, iri("age")),
            rdf_t(
                b.clone(),
                rdf::OBJECT,
                Literal::new_typed("23", Iri::known(xsd::INTEGER)),
            ),
            t(b.clone(), "creator", iri("c1")),
            t(b, "source", iri("listing")),
        ]
        .into();
        assert_eq!(u.triples, want);
    }

    /// ⟨⟨⟨a,p,b⟩,q,c⟩,r,d⟩ unrolled by hand: the rewritten outer triple, the
    /// rewritten middle triple, the inner triple and two reification quads.
    #[test]
    fn unfold_doubly_nested_by_hand() {
        let inner = t(iri("a"), "p", iri("b"));
        let middle = t(inner.clone(), "q", iri("c"));
        let outer = t(middle.clone(), "r", iri("d"));
        let g: StarGraph = [outer].into_iter().collect();
        let (u, a) = unfold_graph(&g);
        let bi = a.get(&inner).unwrap().clone();
        let bm = a.get(&middle).unwrap().clone();
        let mut want: BTreeSet<StarTriple> = BTreeSet::new();
        want.insert(t(bm.clone(), "r", iri("d")));
        want.insert(t(bi.clone(), "q", iri("c")));
        want.insert(inner.clone());
        want.insert(rdf_t(bm.clone(), rdf::TYPE, Iri::known(rdf::STATEMENT)));
        want.insert(rdf_t(bm.clone(), rdf::SUBJECT, bi.clone()));
        want.insert(rdf_t(bm.clone(), rdf::PREDICATE, iri("q")));
        want.insert(rdf_t(bm, rdf::OBJECT, iri("c")));
        want.insert(rdf_t(bi.clone(), rdf::TYPE, Iri::known(rdf::STATEMENT)));
        want.insert(rdf_t(bi.clone(), rdf::SUBJECT, iri("a")));
        want.insert(rdf_t(bi.clone(), rdf::PREDICATE, iri("p")));
        want.insert(rdf_t(bi, rdf::OBJECT, iri("b")));
        assert_eq!(want.len(), 11);
        assert_eq!(u.triples, want);
    }

    #[test]
    fn plain_graph_rejects_nested() {
        let mut p = PlainGraph::new();
        assert!(p.insert(t(bob_age(), "p", iri("x"))).is_err());
        assert!(PlainGraph::try_from(example_graph()).is_err());
    }

    proptest! {
        #[test]
        fn unfolding_invariants(triples in prop::collection::vec(arb_triple(2), 0..8)) {
            let g: StarGraph = triples.into_iter().collect();
            let (u, a) = unfold_graph(&g);

            // bijective and fresh
            prop_assert_eq!(a.len(), g.embedded_triples().len());
            let nodes: HashSet<_> = a.iter().map(|(_, b)| b.clone()).collect();
            prop_assert_eq!(nodes.len(), a.len());
            let terms = g.terms_plus();
            for b in &nodes {
                prop_assert!(!terms.contains(&StarTerm::BlankNode(b.clone())));
            }

            // plain output that contains every embedded triple in unfolded form
            prop_assert!(u.iter().all(|t| !t.is_metadata()));
            for e in g.embedded_triples() {
                if !e.is_metadata() {
                    prop_assert!(u.contains(e));
                }
            }

            // deterministic
            let (u2, a2) = unfold_graph(&g.clone());
            prop_assert_eq!(&u, &u2);
            prop_assert_eq!(&a, &a2);

            // identity on graphs without embedded triples
            if g.embedded_triples().is_empty() {
                prop_assert_eq!(StarGraph::from(u), g);
            }
        }
    }
}
