//! Text and JSON renderings of query results and graph statistics.

use rdfstar::model::{StarGraph, StarTerm, StarTriple};
use rdfstar::sparql::QueryResults;
use rdfstar::turtle::TermFormatter;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::fmt::Write;

/// Tab-separated rows, one per occurrence of each solution; unbound
/// variables are empty fields.
pub fn tsv(results: &QueryResults, formatter: &TermFormatter) -> String {
    let mut out = String::new();
    let header: Vec<String> = results.variables.iter().map(|v| v.to_string()).collect();
    out.push_str(&header.join("\t"));
    out.push('\n');
    for (mapping, count) in results.solutions.iter() {
        let row: Vec<String> = results
            .variables
            .iter()
            .map(|v| {
                mapping
                    .get(v)
                    .map(|t| formatter.term(t))
                    .unwrap_or_default()
            })
            .collect();
        let line = row.join("\t");
        for _ in 0..*count {
            out.push_str(&line);
            out.push('\n');
        }
    }
    out
}

/// SPARQL JSON results, with embedded triples as
/// `{"type": "triple", "value": {"subject", "predicate", "object"}}`.
pub fn json(results: &QueryResults) -> String {
    let vars: Vec<&str> = results.variables.iter().map(|v| v.name()).collect();
    let mut bindings = Vec::new();
    for (mapping, count) in results.solutions.iter() {
        let mut binding = Map::new();
        for v in &results.variables {
            if let Some(term) = mapping.get(v) {
                binding.insert(v.name().to_owned(), term_json(term));
            }
        }
        for _ in 0..*count {
            bindings.push(Value::Object(binding.clone()));
        }
    }
    let doc = json!({ "head": { "vars": vars }, "results": { "bindings": bindings } });
    let mut text = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
    text.push('\n');
    text
}

fn term_json(term: &StarTerm) -> Value {
    match term {
        StarTerm::Iri(i) => json!({ "type": "uri", "value": i.as_str() }),
        StarTerm::BlankNode(b) => json!({ "type": "bnode", "value": b.label() }),
        StarTerm::Literal(l) => {
            let mut v = json!({ "type": "literal", "value": l.lexical() });
            match l.language() {
                Some(lang) => v["xml:lang"] = json!(lang),
                None => v["datatype"] = json!(l.datatype().as_str()),
            }
            v
        }
        StarTerm::Triple(t) => json!({ "type": "triple", "value": triple_json(t) }),
    }
}

fn triple_json(t: &StarTriple) -> Value {
    json!({
        "subject": term_json(t.subject()),
        "predicate": { "type": "uri", "value": t.predicate().as_str() },
        "object": term_json(t.object()),
    })
}

/// One-line summary used by `validate`.
pub fn summary(graph: &StarGraph) -> String {
    format!(
        "{} triples, {} embedded, max depth {}",
        graph.len(),
        graph.embedded_triples().len(),
        graph.max_nesting_depth()
    )
}

pub fn stats(graph: &StarGraph) -> String {
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for t in graph.iter() {
        *histogram.entry(t.nesting_depth()).or_default() += 1;
    }
    let mut out = String::new();
    let _ = writeln!(out, "asserted triples: {}", graph.len());
    let _ = writeln!(
        out,
        "metadata triples: {}",
        graph.iter().filter(|t| t.is_metadata()).count()
    );
    let _ = writeln!(out, "embedded triples: {}", graph.embedded_triples().len());
    let _ = writeln!(out, "max nesting depth: {}", graph.max_nesting_depth());
    out.push_str("nesting depth histogram:\n");
    for (depth, n) in histogram {
        let _ = writeln!(out, "  {depth}: {n}");
    }
    out
}
