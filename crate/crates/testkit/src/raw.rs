//! Minimal triple representation for fixtures.

use std::fmt::Write as _;

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const OWL_SAME_AS: &str = "http://www.w3.org/2002/07/owl#sameAs";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Obj {
    Iri(String),
    Lit(String),
}

impl Obj {
    /// IRI string or lexical form.
    pub fn key(&self) -> &str {
        match self {
            Obj::Iri(s) | Obj::Lit(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RawTriple {
    pub s: String,
    pub p: String,
    pub o: Obj,
}

impl RawTriple {
    pub fn iri(s: &str, p: &str, o: &str) -> Self {
        Self { s: s.to_owned(), p: p.to_owned(), o: Obj::Iri(o.to_owned()) }
    }

    pub fn lit(s: &str, p: &str, o: &str) -> Self {
        Self { s: s.to_owned(), p: p.to_owned(), o: Obj::Lit(o.to_owned()) }
    }
}

fn escape(out: &mut String, s: &str) {
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
}

pub fn to_ntriples(triples: &[RawTriple]) -> String {
    let mut out = String::new();
    for t in triples {
        let _ = write!(out, "<{}> <{}> ", t.s, t.p);
        match &t.o {
            Obj::Iri(o) => {
                let _ = write!(out, "<{o}>");
            }
            Obj::Lit(l) => {
                out.push('"');
                escape(&mut out, l);
                out.push('"');
            }
        }
        out.push_str(" .\n");
    }
    out
}

/// `source \t target` lines.
pub fn pairs_tsv(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(a, b)| format!("{a}\t{b}\n")).collect()
}
