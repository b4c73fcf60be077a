//! Reference alignments and precision / recall / F1.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::model::{vocab, Term};
use crate::ntriples::parse_line;

const ALIGN_NS: &str = "http://knowledgeweb.semanticweb.org/heterogeneity/alignment";
const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cannot tell the format of {0}")]
    UnknownFormat(String),
    #[error("malformed entry at {location}: {reason}")]
    MalformedEntry { location: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn malformed(location: impl Into<String>, reason: impl Into<String>) -> EvalError {
    EvalError::MalformedEntry { location: location.into(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignmentFormat {
    Tsv,
    NTriples,
    AlignmentXml,
}

/// A set of `(source IRI, target IRI)` pairs compared by exact string
/// equality.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AlignmentSet {
    pairs: BTreeSet<(String, String)>,
}

impl AlignmentSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false when the pair was already present.
    pub fn insert(&mut self, source: impl Into<String>, target: impl Into<String>) -> bool {
        self.pairs.insert((source.into(), target.into()))
    }

    pub fn contains(&self, source: &str, target: &str) -> bool {
        self.pairs.contains(&(source.to_owned(), target.to_owned()))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(String, String)> {
        self.pairs.iter()
    }

    pub fn swapped(&self) -> Self {
        self.pairs.iter().map(|(a, b)| (b.clone(), a.clone())).collect()
    }
}

impl FromIterator<(String, String)> for AlignmentSet {
    fn from_iter<I: IntoIterator<Item = (String, String)>>(iter: I) -> Self {
        Self { pairs: iter.into_iter().collect() }
    }
}

/// Reads an alignment file, detecting its format by extension and then by
/// content.
pub fn load_reference(path: &Path) -> Result<AlignmentSet, EvalError> {
    let text = std::fs::read_to_string(path)?;
    let format = format_from_extension(path)
        .or_else(|| sniff_format(&text))
        .ok_or_else(|| EvalError::UnknownFormat(path.display().to_string()))?;
    parse_alignment(&text, format)
}

pub fn parse_alignment(text: &str, format: AlignmentFormat) -> Result<AlignmentSet, EvalError> {
    match format {
        AlignmentFormat::Tsv => parse_tsv(text),
        AlignmentFormat::NTriples => parse_same_as(text),
        AlignmentFormat::AlignmentXml => parse_alignment_xml(text),
    }
}

pub fn format_from_extension(path: &Path) -> Option<AlignmentFormat> {
    match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
        "tsv" | "tab" => Some(AlignmentFormat::Tsv),
        "nt" => Some(AlignmentFormat::NTriples),
        "xml" | "rdf" => Some(AlignmentFormat::AlignmentXml),
        _ => None,
    }
}

pub fn sniff_format(text: &str) -> Option<AlignmentFormat> {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#'))?;
    if first.starts_with("<?xml") || first.starts_with("<rdf:RDF") || text.contains("<Alignment") {
        Some(AlignmentFormat::AlignmentXml)
    } else if first.starts_with('<') && first.ends_with('.') {
        Some(AlignmentFormat::NTriples)
    } else if first.contains('\t') {
        Some(AlignmentFormat::Tsv)
    } else {
        None
    }
}

fn strip_angles(s: &str) -> &str {
    s.strip_prefix('<').and_then(|s| s.strip_suffix('>')).unwrap_or(s)
}

/// `source \t target [\t ...]` rows; blank lines and `#` comments are
/// ignored, further columns too.
pub fn parse_tsv(text: &str) -> Result<AlignmentSet, EvalError> {
    let mut set = AlignmentSet::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        let (Some(s), Some(t)) = (cols.next(), cols.next()) else {
            return Err(malformed(format!("line {}", n + 1), "expected two tab-separated columns"));
        };
        let (s, t) = (strip_angles(s.trim()), strip_angles(t.trim()));
        if s.is_empty() || t.is_empty() {
            return Err(malformed(format!("line {}", n + 1), "empty IRI"));
        }
        set.insert(s, t);
    }
    Ok(set)
}

/// `owl:sameAs` statements between IRIs; other statements are ignored.
pub fn parse_same_as(text: &str) -> Result<AlignmentSet, EvalError> {
    let mut set = AlignmentSet::new();
    for (n, line) in text.lines().enumerate() {
        let triple = parse_line(line).map_err(|e| malformed(format!("line {}", n + 1), e))?;
        let Some(triple) = triple else { continue };
        if triple.predicate().as_iri() != Some(vocab::OWL_SAME_AS) {
            continue;
        }
        match (triple.subject(), triple.object()) {
            (Term::Iri(s), Term::Iri(o)) => {
                set.insert(s.clone(), o.clone());
            }
            _ => return Err(malformed(format!("line {}", n + 1), "sameAs between non-IRIs")),
        }
    }
    Ok(set)
}

/// OAEI Alignment format: one pair per `Cell` with `entity1`/`entity2`
/// given as `rdf:resource` or as text. Cells whose relation is not `=`
/// are skipped.
pub fn parse_alignment_xml(text: &str) -> Result<AlignmentSet, EvalError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| malformed("document", e.to_string()))?;
    let mut set = AlignmentSet::new();
    let cells = doc.descendants().filter(|n| n.is_element() && n.tag_name().name() == "Cell");
    for (i, cell) in cells.enumerate() {
        let location = format!("Cell #{} (line {})", i + 1, doc.text_pos_at(cell.range().start).row);
        let child = |name: &str| {
            cell.children().find(|c| {
                c.is_element()
                    && c.tag_name().name() == name
                    && matches!(c.tag_name().namespace(), None | Some(ALIGN_NS))
            })
        };
        if let Some(rel) = child("relation") {
            if rel.text().map(str::trim).unwrap_or("=") != "=" {
                continue;
            }
        }
        let entity = |name: &str| -> Result<String, EvalError> {
            let node = child(name).ok_or_else(|| malformed(&location, format!("missing {name}")))?;
            let value = node
                .attribute((RDF_NS, "resource"))
                .or_else(|| node.attribute("resource"))
                .or_else(|| node.text())
                .map(str::trim)
                .unwrap_or("");
            if value.is_empty() {
                return Err(malformed(&location, format!("{name} has no IRI")));
            }
            Ok(value.to_owned())
        };
        set.insert(entity("entity1")?, entity("entity2")?);
    }
    Ok(set)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        Self { true_positives: tp, false_positives: fp, false_negatives: fn_, precision, recall, f1 }
    }

    /// Names of the metrics whose denominator was zero.
    pub fn undefined(&self) -> Vec<&'static str> {
        let (tp, fp, fn_) = (self.true_positives, self.false_positives, self.false_negatives);
        let mut out = Vec::new();
        if tp + fp == 0 {
            out.push("precision");
        }
        if tp + fn_ == 0 {
            out.push("recall");
        }
        if self.precision + self.recall == 0.0 {
            out.push("f1");
        }
        out
    }

    /// Machine-readable `key=value` lines.
    pub fn key_values(&self) -> String {
        format!(
            "tp={}\nfp={}\nfn={}\nprecision={:.6}\nrecall={:.6}\nf1={:.6}\n",
            self.true_positives, self.false_positives, self.false_negatives, self.precision, self.recall, self.f1
        )
    }
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "precision={:.3} recall={:.3} f1={:.3}", self.precision, self.recall, self.f1)
    }
}

pub fn score(found: &AlignmentSet, reference: &AlignmentSet) -> Metrics {
    let tp = found.pairs.intersection(&reference.pairs).count();
    Metrics::from_counts(tp, found.len() - tp, reference.len() - tp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(pairs: &[(&str, &str)]) -> AlignmentSet {
        pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn tsv_with_duplicates() {
        let s = parse_tsv("http://a/1\thttp://b/1\n<http://a/2>\t<http://b/2>\t0.9\nhttp://a/1\thttp://b/1\n").unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.contains("http://a/2", "http://b/2"));
        assert!(parse_tsv("only-one-column\n").is_err());
    }

    #[test]
    fn alignment_xml_cell() {
        let xml = r#"<?xml version="1.0" encoding="utf-8"?>
<rdf:RDF xmlns="http://knowledgeweb.semanticweb.org/heterogeneity/alignment"
         xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#">
<Alignment>
  <map><Cell>
    <entity1 rdf:resource="http://a/person1"/>
    <entity2 rdf:resource="http://b/person1"/>
    <relation>=</relation>
    <measure rdf:datatype="http://www.w3.org/2001/XMLSchema#float">1.0</measure>
  </Cell></map>
  <map><Cell>
    <entity1 rdf:resource="http://a/x"/>
    <entity2 rdf:resource="http://b/y"/>
    <relation>&lt;</relation>
  </Cell></map>
</Alignment>
</rdf:RDF>"#;
        assert_eq!(sniff_format(xml), Some(AlignmentFormat::AlignmentXml));
        let s = parse_alignment_xml(xml).unwrap();
        assert_eq!(s, set(&[("http://a/person1", "http://b/person1")]));
    }

    #[test]
    fn xml_cell_without_entity_is_malformed() {
        let xml = "<Alignment><map><Cell><entity1>http://a/1</entity1></Cell></map></Alignment>";
        assert!(matches!(parse_alignment_xml(xml), Err(EvalError::MalformedEntry { .. })));
    }

    #[test]
    fn same_as_ntriples() {
        let text = "<http://a/1> <http://www.w3.org/2002/07/owl#sameAs> <http://b/1> .\n\
                    <http://a/1> <http://ex.org/p> <http://b/9> .\n";
        assert_eq!(sniff_format(text), Some(AlignmentFormat::NTriples));
        assert_eq!(parse_same_as(text).unwrap(), set(&[("http://a/1", "http://b/1")]));
    }

    #[test]
    fn sniff_unknown() {
        assert_eq!(sniff_format("hello world\n"), None);
        assert_eq!(sniff_format("a\tb\n"), Some(AlignmentFormat::Tsv));
    }

    #[test]
    fn identical_sets_score_one() {
        let s = set(&[("a", "b"), ("c", "d")]);
        let m = score(&s, &s);
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
        assert_eq!(m.to_string(), "precision=1.000 recall=1.000 f1=1.000");
    }

    #[test]
    fn disjoint_and_empty() {
        let m = score(&set(&[("a", "b")]), &set(&[("a", "c")]));
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
        let m = score(&AlignmentSet::new(), &set(&[("a", "c")]));
        assert_eq!(m.to_string(), "precision=0.000 recall=0.000 f1=0.000");
        assert_eq!(m.undefined(), vec!["precision", "f1"]);
    }

    #[test]
    fn f1_from_table_counts() {
        // tp = 969, fn = 31 gives recall 0.969; fp = 27 gives precision
        // 969 / 996 = 0.97289. F1 = 2PR / (P + R) = 0.97094.
        let m = Metrics::from_counts(969, 27, 31);
        assert!((m.precision - 0.973).abs() < 0.0005);
        assert!((m.recall - 0.969).abs() < 1e-12);
        assert!((m.f1 - 0.971).abs() < 0.001);
    }

    proptest! {
        #[test]
        fn harmonic_mean_bounds(tp in 0usize..200, fp in 0usize..200, fn_ in 0usize..200) {
            let m = Metrics::from_counts(tp, fp, fn_);
            for x in [m.precision, m.recall, m.f1] {
                prop_assert!((0.0..=1.0).contains(&x));
            }
            if m.precision > 0.0 && m.recall > 0.0 {
                prop_assert!(m.f1 <= m.precision.max(m.recall) + 1e-12);
                prop_assert!(m.f1 >= m.precision.min(m.recall) - 1e-12);
            }
        }

        #[test]
        fn swapping_swaps_precision_and_recall(
            a in proptest::collection::btree_set((0u8..6, 0u8..6), 0..12),
            b in proptest::collection::btree_set((0u8..6, 0u8..6), 0..12),
        ) {
            let to_set = |s: &BTreeSet<(u8, u8)>| s.iter().map(|(x, y)| (x.to_string(), y.to_string())).collect::<AlignmentSet>();
            let (a, b) = (to_set(&a), to_set(&b));
            let ab = score(&a, &b);
            let ba = score(&b, &a);
            prop_assert_eq!(ab.precision, ba.recall);
            prop_assert_eq!(ab.recall, ba.precision);
        }

        #[test]
        fn adding_a_correct_pair_never_hurts(
            reference in proptest::collection::btree_set((0u8..6, 0u8..6), 1..12),
            found in proptest::collection::btree_set((0u8..6, 0u8..6), 0..12),
            pick in 0usize..12,
        ) {
            let to_set = |s: &BTreeSet<(u8, u8)>| s.iter().map(|(x, y)| (x.to_string(), y.to_string())).collect::<AlignmentSet>();
            let (r, f) = (to_set(&reference), to_set(&found));
            let (x, y) = reference.iter().nth(pick % reference.len()).unwrap();
            let mut more = f.clone();
            more.insert(x.to_string(), y.to_string());
            let before = score(&f, &r);
            let after = score(&more, &r);
            prop_assert!(after.precision >= before.precision);
            prop_assert!(after.recall >= before.recall);
            prop_assert!(after.f1 >= before.f1);
        }
    }
}
