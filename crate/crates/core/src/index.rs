//! In-memory indexed dataset.
//!
//! Holds the deduplicated triples of one RDF graph with three indexes built
//! once at load time:
//!
//! * subject → triple positions, which backs the description function;
//! * predicate → triple count and distinct-object census;
//! * normalized token → literal triples, used for candidate blocking.
//!
//! After [`Dataset::load`] returns nothing is mutated, so a `&Dataset` can
//! be queried from any number of threads.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::model::{vocab, Term, Triple};

/// Default cap on the number of subjects returned by one literal search.
pub const DEFAULT_POOL_CAP: usize = 500;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PredicateStats {
    pub triples: usize,
    pub distinct_objects: usize,
}

/// All outgoing statements of one subject.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Description {
    pub subject: Term,
    pub statements: Vec<(Term, Term)>,
}

impl Description {
    pub fn empty(subject: Term) -> Self {
        Self { subject, statements: Vec::new() }
    }

    pub fn triples(&self) -> impl Iterator<Item = (&Term, &Term, &Term)> {
        self.statements.iter().map(move |(p, o)| (&self.subject, p, o))
    }
}

/// A literal returned by a token search.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LiteralHit {
    pub subject: Term,
    pub predicate: Term,
    pub literal: String,
}

#[derive(Debug, Default)]
pub struct Dataset {
    triples: Vec<Triple>,
    by_subject: HashMap<Term, Vec<usize>>,
    by_predicate: HashMap<Term, PredicateStats>,
    literal_index: HashMap<String, Vec<usize>>,
}

impl Dataset {
    /// Builds the dataset and its indexes. Duplicate triples are dropped;
    /// first-seen order is kept.
    pub fn load<I: IntoIterator<Item = Triple>>(triples: I) -> Self {
        let mut seen = HashSet::new();
        let mut ds = Dataset::default();
        let mut objects: HashMap<Term, HashSet<Term>> = HashMap::new();
        for t in triples {
            if !seen.insert(t.clone()) {
                continue;
            }
            let pos = ds.triples.len();
            ds.by_subject.entry(t.subject().clone()).or_default().push(pos);
            ds.by_predicate.entry(t.predicate().clone()).or_default().triples += 1;
            objects.entry(t.predicate().clone()).or_default().insert(t.object().clone());
            if let Term::Literal(lit) = t.object() {
                let mut tokens = tokenize(lit.lexical());
                tokens.sort_unstable();
                tokens.dedup();
                for tok in tokens {
                    ds.literal_index.entry(tok).or_default().push(pos);
                }
            }
            ds.triples.push(t);
        }
        for (p, objs) in objects {
            if let Some(stats) = ds.by_predicate.get_mut(&p) {
                stats.distinct_objects = objs.len();
            }
        }
        ds
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Triples in load order.
    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn subjects(&self) -> impl Iterator<Item = &Term> {
        self.by_subject.keys()
    }

    pub fn predicate_stats(&self, predicate: &Term) -> Option<&PredicateStats> {
        self.by_predicate.get(predicate)
    }

    pub fn predicates(&self) -> impl Iterator<Item = (&Term, &PredicateStats)> {
        self.by_predicate.iter()
    }

    /// Outgoing triples of `subject`, in load order.
    pub fn triples_of<'a>(&'a self, subject: &Term) -> impl Iterator<Item = &'a Triple> + 'a {
        self.by_subject.get(subject).map(|v| v.as_slice()).unwrap_or_default().iter().map(|&i| &self.triples[i])
    }

    pub fn describe(&self, subject: &Term) -> Description {
        Description {
            subject: subject.clone(),
            statements: self.triples_of(subject).map(|t| (t.predicate().clone(), t.object().clone())).collect(),
        }
    }

    /// The description function: one description per requested subject,
    /// empty for subjects without outgoing triples.
    pub fn df<'a, I>(&self, subjects: I) -> Vec<Description>
    where
        I: IntoIterator<Item = &'a Term>,
    {
        subjects.into_iter().map(|s| self.describe(s)).collect()
    }

    pub fn instances_of_class(&self, class: &Term) -> BTreeSet<Term> {
        let rdf_type = Term::Iri(vocab::RDF_TYPE.to_owned());
        self.triples
            .iter()
            .filter(|t| t.predicate() == &rdf_type && t.object() == class)
            .map(|t| t.subject().clone())
            .collect()
    }

    /// Every `rdf:type` object with its number of distinct instances,
    /// most populated first, ties by class IRI.
    pub fn class_census(&self) -> Vec<(Term, usize)> {
        let rdf_type = Term::Iri(vocab::RDF_TYPE.to_owned());
        let mut counts: BTreeMap<&Term, usize> = BTreeMap::new();
        for t in self.triples.iter().filter(|t| t.predicate() == &rdf_type) {
            *counts.entry(t.object()).or_default() += 1;
        }
        let mut out: Vec<(Term, usize)> = counts.into_iter().map(|(c, n)| (c.clone(), n)).collect();
        out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        out
    }

    /// Token-overlap search over literal objects of the given predicates.
    ///
    /// A literal matches when it shares at least one normalized token with
    /// `query`. When more than `pool_cap` subjects match, the subjects whose
    /// best literal shares the most distinct query tokens are kept, ties by
    /// subject order. All matching literals of the kept subjects are
    /// returned, sorted.
    pub fn search_literals(&self, query: &str, predicates: &BTreeSet<Term>, pool_cap: usize) -> Vec<LiteralHit> {
        let query_tokens: BTreeSet<String> = tokenize(query).into_iter().collect();
        let mut overlap: HashMap<usize, usize> = HashMap::new();
        for tok in &query_tokens {
            for &pos in self.literal_index.get(tok).into_iter().flatten() {
                if predicates.contains(self.triples[pos].predicate()) {
                    *overlap.entry(pos).or_default() += 1;
                }
            }
        }
        let hits = overlap.into_iter().map(|(pos, n)| {
            let t = &self.triples[pos];
            let hit = LiteralHit {
                subject: t.subject().clone(),
                predicate: t.predicate().clone(),
                literal: t.object().key().to_owned(),
            };
            (hit, n)
        });
        cap_pool(hits, pool_cap)
    }
}

/// Applies the pool cap to `(hit, shared-token count)` pairs.
pub fn cap_pool<I>(hits: I, pool_cap: usize) -> Vec<LiteralHit>
where
    I: IntoIterator<Item = (LiteralHit, usize)>,
{
    let mut best: BTreeMap<Term, usize> = BTreeMap::new();
    let mut all = Vec::new();
    for (hit, n) in hits {
        let e = best.entry(hit.subject.clone()).or_default();
        *e = (*e).max(n);
        all.push(hit);
    }
    let keep: HashSet<Term> = if best.len() > pool_cap {
        let mut ranked: Vec<(Term, usize)> = best.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.into_iter().take(pool_cap).map(|(s, _)| s).collect()
    } else {
        best.into_keys().collect()
    };
    all.retain(|h| keep.contains(&h.subject));
    all.sort();
    all.dedup();
    all
}

/// Lower-cases, removes punctuation and symbols, and splits on whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    let cleaned: String =
        text.chars().filter(|c| c.is_alphanumeric() || c.is_whitespace()).flat_map(char::to_lowercase).collect();
    cleaned.split_whitespace().map(str::to_owned).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Literal;

    fn iri(s: &str) -> Term {
        Term::iri(s).unwrap()
    }

    fn lit_triple(s: &str, p: &str, o: &str) -> Triple {
        Triple::new(iri(s), iri(p), Term::literal(Literal::simple(o))).unwrap()
    }

    fn preds(ps: &[&str]) -> BTreeSet<Term> {
        ps.iter().map(|p| iri(p)).collect()
    }

    #[test]
    fn empty_dataset() {
        let ds = Dataset::load(Vec::new());
        assert!(ds.is_empty());
        assert_eq!(ds.subjects().count(), 0);
        assert!(ds.df([]).is_empty());
        assert!(ds.class_census().is_empty());
    }

    #[test]
    fn tokens_are_case_folded_and_stripped() {
        assert_eq!(tokenize("São Paulo"), vec!["são", "paulo"]);
        assert_eq!(tokenize("  Smith, J.  (Jr)"), vec!["smith", "j", "jr"]);
        assert!(tokenize("...").is_empty());
        let ds = Dataset::load(vec![lit_triple("http://sp", "http://label", "São Paulo")]);
        let p = preds(&["http://label"]);
        for q in ["são", "PAULO", "paulo!"] {
            let hits = ds.search_literals(q, &p, 10);
            assert_eq!(hits.len(), 1, "{q}");
            assert_eq!(hits[0].literal, "São Paulo");
        }
    }

    #[test]
    fn duplicates_are_dropped() {
        let t = lit_triple("http://a", "http://p", "x");
        let ds = Dataset::load(vec![t.clone(), t.clone()]);
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.predicate_stats(&iri("http://p")).unwrap().triples, 1);
    }

    #[test]
    fn describe_returns_exactly_outgoing_statements() {
        let ds = Dataset::load(vec![
            lit_triple("http://s", "http://p1", "a"),
            lit_triple("http://s", "http://p2", "b"),
            lit_triple("http://t", "http://p1", "c"),
            Triple::new(iri("http://s"), iri("http://p3"), iri("http://t")).unwrap(),
        ]);
        let d = ds.describe(&iri("http://s"));
        assert_eq!(d.statements.len(), 3);
        assert!(ds.describe(&iri("http://nobody")).statements.is_empty());
        let both = ds.df([&iri("http://s"), &iri("http://t")]);
        assert_eq!(both.iter().map(|d| d.statements.len()).sum::<usize>(), 4);
    }

    #[test]
    fn instances_and_census() {
        let ty = vocab::RDF_TYPE;
        let t = |s: &str, c: &str| Triple::new(iri(s), iri(ty), iri(c)).unwrap();
        let ds = Dataset::load(vec![t("http://a", "http://C"), t("http://b", "http://C"), t("http://a", "http://D")]);
        assert_eq!(ds.instances_of_class(&iri("http://C")), [iri("http://a"), iri("http://b")].into_iter().collect());
        assert!(ds.instances_of_class(&iri("http://D")).contains(&iri("http://a")));
        assert!(ds.instances_of_class(&iri("http://E")).is_empty());
        assert_eq!(ds.class_census(), vec![(iri("http://C"), 2), (iri("http://D"), 1)]);
    }

    #[test]
    fn brazil_search_excludes_unrelated_labels() {
        let l = "http://www.w3.org/2000/01/rdf-schema#label";
        let ds = Dataset::load(vec![
            lit_triple("http://dbpedia.org/resource/Brazil", l, "Brazil"),
            lit_triple("http://dbpedia.org/resource/Empire_of_Brazil", l, "Empire of Brazil"),
            lit_triple("http://dbpedia.org/resource/Corcovado", l, "Corcovado"),
        ]);
        let hits = ds.search_literals("Brazil", &preds(&[l]), DEFAULT_POOL_CAP);
        let subjects: Vec<&str> = hits.iter().map(|h| h.subject.key()).collect();
        assert_eq!(
            subjects,
            vec!["http://dbpedia.org/resource/Brazil", "http://dbpedia.org/resource/Empire_of_Brazil"]
        );
        assert!(ds.search_literals("Lisbon", &preds(&[l]), DEFAULT_POOL_CAP).is_empty());
    }

    #[test]
    fn search_respects_predicate_restriction() {
        let ds = Dataset::load(vec![
            lit_triple("http://a", "http://name", "Rio"),
            lit_triple("http://b", "http://comment", "Rio"),
        ]);
        let hits = ds.search_literals("rio", &preds(&["http://name"]), 10);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].subject, iri("http://a"));
    }

    #[test]
    fn pool_cap_keeps_max_overlap() {
        let ds = Dataset::load(vec![
            lit_triple("http://a", "http://l", "new york city"),
            lit_triple("http://b", "http://l", "new york"),
            lit_triple("http://c", "http://l", "new"),
        ]);
        let p = preds(&["http://l"]);
        let hits = ds.search_literals("New York City", &p, 1);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].subject, iri("http://a"));
        let hits = ds.search_literals("New York City", &p, 2);
        let subjects: BTreeSet<_> = hits.iter().map(|h| h.subject.clone()).collect();
        assert_eq!(subjects, [iri("http://a"), iri("http://b")].into_iter().collect());
    }

    #[test]
    fn pool_cap_ties_break_by_subject() {
        let ds = Dataset::load(vec![
            lit_triple("http://z", "http://l", "alpha"),
            lit_triple("http://y", "http://l", "alpha"),
        ]);
        let hits = ds.search_literals("alpha", &preds(&["http://l"]), 1);
        assert_eq!(hits[0].subject, iri("http://y"));
    }
}
