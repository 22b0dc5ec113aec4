//! Frozen graphs with term dictionary and triple indexes.
//!
//! Query evaluation matches patterns against the asserted triples *and* the
//! triples embedded in them, so both sets go into one SPO/POS/OSP index.
//! Each indexed triple is flagged with whether it is asserted.

use crate::model::{StarGraph, StarTerm, StarTriple};
use std::collections::{BTreeSet, HashMap, HashSet};
use std::ops::RangeInclusive;

pub(crate) type TermId = u32;
pub(crate) type EncodedTriple = [TermId; 3];

/// An immutable graph ready to be queried. Cheap to share across threads.
#[derive(Debug, Clone)]
pub struct FrozenGraph {
    graph: StarGraph,
    terms: Vec<StarTerm>,
    ids: HashMap<StarTerm, TermId>,
    quoted: HashMap<TermId, EncodedTriple>,
    quoted_ids: HashMap<EncodedTriple, TermId>,
    spo: BTreeSet<EncodedTriple>,
    pos: BTreeSet<EncodedTriple>,
    osp: BTreeSet<EncodedTriple>,
    asserted: HashSet<EncodedTriple>,
}

impl StarGraph {
    /// Freezes the graph and builds its indexes.
    pub fn freeze(self) -> FrozenGraph {
        FrozenGraph::new(self)
    }
}

impl From<StarGraph> for FrozenGraph {
    fn from(graph: StarGraph) -> Self {
        FrozenGraph::new(graph)
    }
}

impl FrozenGraph {
    pub fn new(graph: StarGraph) -> Self {
        let mut frozen = FrozenGraph {
            graph: StarGraph::new(),
            terms: Vec::new(),
            ids: HashMap::new(),
            quoted: HashMap::new(),
            quoted_ids: HashMap::new(),
            spo: BTreeSet::new(),
            pos: BTreeSet::new(),
            osp: BTreeSet::new(),
            asserted: HashSet::new(),
        };
        for t in graph.embedded_triples() {
            let encoded = frozen.encode_triple(t);
            frozen.index(encoded);
        }
        for t in graph.iter() {
            let encoded = frozen.encode_triple(t);
            frozen.index(encoded);
            frozen.asserted.insert(encoded);
        }
        frozen.graph = graph;
        frozen
    }

    fn intern(&mut self, term: &StarTerm) -> TermId {
        if let Some(&id) = self.ids.get(term) {
            return id;
        }
        let components = term.as_triple().map(|t| self.encode_triple(t));
        let id = TermId::try_from(self.terms.len()).expect("more than u32::MAX distinct terms");
        self.terms.push(term.clone());
        self.ids.insert(term.clone(), id);
        if let Some(c) = components {
            self.quoted.insert(id, c);
            self.quoted_ids.insert(c, id);
        }
        id
    }

    fn encode_triple(&mut self, t: &StarTriple) -> EncodedTriple {
        [
            self.intern(t.subject()),
            self.intern(&StarTerm::Iri(t.predicate().clone())),
            self.intern(t.object()),
        ]
    }

    fn index(&mut self, [s, p, o]: EncodedTriple) {
        self.spo.insert([s, p, o]);
        self.pos.insert([p, o, s]);
        self.osp.insert([o, s, p]);
    }

    pub fn graph(&self) -> &StarGraph {
        &self.graph
    }

    pub fn into_graph(self) -> StarGraph {
        self.graph
    }

    /// Number of distinct triples that patterns are matched against
    /// (asserted plus embedded).
    pub fn indexed_len(&self) -> usize {
        self.spo.len()
    }

    pub(crate) fn term_id(&self, term: &StarTerm) -> Option<TermId> {
        self.ids.get(term).copied()
    }

    pub(crate) fn term(&self, id: TermId) -> &StarTerm {
        &self.terms[id as usize]
    }

    /// Components of a triple-valued term.
    pub(crate) fn quoted(&self, id: TermId) -> Option<&EncodedTriple> {
        self.quoted.get(&id)
    }

    /// The id of the triple term with these components, if it occurs in the graph.
    pub(crate) fn quoted_id(&self, components: &EncodedTriple) -> Option<TermId> {
        self.quoted_ids.get(components).copied()
    }

    fn lookup(&self, t: &StarTriple) -> Option<EncodedTriple> {
        Some([
            self.term_id(t.subject())?,
            self.term_id(&StarTerm::Iri(t.predicate().clone()))?,
            self.term_id(t.object())?,
        ])
    }

    /// Whether `t` is asserted or embedded somewhere in the graph.
    pub fn contains(&self, t: &StarTriple) -> bool {
        self.lookup(t).is_some_and(|e| self.spo.contains(&e))
    }

    /// Whether `t` is asserted, as opposed to only embedded.
    pub fn is_asserted(&self, t: &StarTriple) -> bool {
        self.lookup(t).is_some_and(|e| self.asserted.contains(&e))
    }

    /// Indexed triples matching the given positions, picking the index with
    /// the longest bound prefix.
    pub(crate) fn scan(
        &self,
        s: Option<TermId>,
        p: Option<TermId>,
        o: Option<TermId>,
    ) -> Box<dyn Iterator<Item = EncodedTriple> + '_> {
        const MAX: TermId = TermId::MAX;
        fn prefix(a: TermId, b: Option<TermId>) -> RangeInclusive<EncodedTriple> {
            match b {
                Some(b) => [a, b, 0]..=[a, b, MAX],
                None => [a, 0, 0]..=[a, MAX, MAX],
            }
        }
        match (s, p, o) {
            (Some(s), Some(p), Some(o)) => Box::new(self.spo.get(&[s, p, o]).copied().into_iter()),
            (Some(s), p, None) => Box::new(self.spo.range(prefix(s, p)).copied()),
            (Some(s), None, Some(o)) => Box::new(
                self.osp
                    .range(prefix(o, Some(s)))
                    .map(|&[o, s, p]| [s, p, o]),
            ),
            (None, Some(p), o) => {
                Box::new(self.pos.range(prefix(p, o)).map(|&[p, o, s]| [s, p, o]))
            }
            (None, None, Some(o)) => {
                Box::new(self.osp.range(prefix(o, None)).map(|&[o, s, p]| [s, p, o]))
            }
            (None, None, None) => Box::new(self.spo.iter().copied()),
        }
    }
}
