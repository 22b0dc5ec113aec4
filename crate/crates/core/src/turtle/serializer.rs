use crate::lexical::{
    escape_string, is_decimal_lexical, is_double_lexical, is_integer_lexical, is_plain_pn_local,
    is_pn_chars, is_pn_chars_base,
};
use crate::model::{Iri, Literal, StarGraph, StarTerm, StarTriple};
use crate::reify::ReificationError;
use crate::vocab::{rdf, xsd};
use std::collections::BTreeMap;
use std::fmt::Write;

/// Writes terms in Turtle* syntax, abbreviating IRIs with the longest
/// matching namespace.
#[derive(Debug, Clone, Default)]
pub struct TermFormatter {
    // (prefix, namespace), longest namespace first
    prefixes: Vec<(String, String)>,
}

fn is_pn_prefix(p: &str) -> bool {
    let mut chars = p.chars();
    match chars.next() {
        None => true,
        Some(c) if is_pn_chars_base(c) => {
            !p.ends_with('.') && chars.all(|c| is_pn_chars(c) || c == '.')
        }
        Some(_) => false,
    }
}

impl TermFormatter {
    pub fn new(prefixes: &BTreeMap<String, Iri>) -> Self {
        let mut prefixes: Vec<(String, String)> = prefixes
            .iter()
            .filter(|(p, _)| is_pn_prefix(p))
            .map(|(p, ns)| (p.clone(), ns.as_str().to_owned()))
            .collect();
        prefixes.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(&b.0)));
        Self { prefixes }
    }

    pub fn iri(&self, iri: &Iri) -> String {
        let value = iri.as_str();
        for (prefix, ns) in &self.prefixes {
            if let Some(local) = value.strip_prefix(ns.as_str()) {
                if is_plain_pn_local(local) {
                    return format!("{prefix}:{local}");
                }
            }
        }
        format!("<{value}>")
    }

    pub fn literal(&self, literal: &Literal) -> String {
        let lexical = literal.lexical();
        let bare = match literal.datatype().as_str() {
            xsd::INTEGER => is_integer_lexical(lexical),
            xsd::DECIMAL => is_decimal_lexical(lexical),
            xsd::DOUBLE => is_double_lexical(lexical),
            xsd::BOOLEAN => lexical == "true" || lexical == "false",
            _ => false,
        };
        if bare {
            return lexical.to_owned();
        }
        let mut out = String::with_capacity(lexical.len() + 2);
        out.push('"');
        escape_string(lexical, &mut out);
        out.push('"');
        if let Some(lang) = literal.language() {
            out.push('@');
            out.push_str(lang);
        } else if literal.datatype().as_str() != xsd::STRING {
            out.push_str("^^");
            out.push_str(&self.iri(literal.datatype()));
        }
        out
    }

    pub fn term(&self, term: &StarTerm) -> String {
        match term {
            StarTerm::Iri(i) => self.iri(i),
            StarTerm::BlankNode(b) => b.to_string(),
            StarTerm::Literal(l) => self.literal(l),
            StarTerm::Triple(t) => format!("<<{}>>", self.embedded(t)),
        }
    }

    /// The inside of `<< >>`; no `a` shorthand there.
    fn embedded(&self, t: &StarTriple) -> String {
        format!(
            "{} {} {}",
            self.term(t.subject()),
            self.iri(t.predicate()),
            self.term(t.object())
        )
    }

    /// A complete statement without the final ` .`.
    pub fn triple(&self, t: &StarTriple) -> String {
        let predicate = if t.predicate().as_str() == rdf::TYPE {
            "a".to_owned()
        } else {
            self.iri(t.predicate())
        };
        format!(
            "{} {} {}",
            self.term(t.subject()),
            predicate,
            self.term(t.object())
        )
    }
}

/// Writes a graph as Turtle*, one statement per asserted triple in canonical order.
pub fn serialize_turtlestar(graph: &StarGraph, prefixes: &BTreeMap<String, Iri>) -> String {
    let formatter = TermFormatter::new(prefixes);
    let mut out = String::new();
    for (prefix, ns) in prefixes {
        if is_pn_prefix(prefix) {
            let _ = writeln!(out, "@prefix {prefix}: <{}> .", ns.as_str());
        }
    }
    if !out.is_empty() && !graph.is_empty() {
        out.push('\n');
    }
    for t in graph.iter() {
        out.push_str(&formatter.triple(t));
        out.push_str(" .\n");
    }
    out
}

/// Writes plain triples as N-Triples, one per line; fails on nested triples.
pub fn serialize_ntriples<'a>(
    triples: impl IntoIterator<Item = &'a StarTriple>,
) -> Result<String, ReificationError> {
    let mut out = String::new();
    for t in triples {
        if t.is_metadata() {
            return Err(ReificationError::Nested(Box::new(t.clone())));
        }
        let _ = writeln!(out, "{} {} {} .", t.subject(), t.predicate(), t.object());
    }
    Ok(out)
}
