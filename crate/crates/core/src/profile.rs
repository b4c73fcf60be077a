//! Entity-label property selection.
//!
//! A predicate qualifies as a label candidate when every literal it takes
//! on the profiled subjects is shorter than `max_len` characters and it is
//! observed on at least two subjects. Each qualifying predicate is scored
//! by the Shannon entropy of its literal values; those at or above the mean
//! entropy of all qualifying predicates form the profile.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::Hash;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::index::Dataset;
use crate::model::Term;

pub const DEFAULT_MAX_LABEL_LEN: usize = 200;
pub const DEFAULT_SAMPLE_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProfileError {
    #[error("entropy of an empty multiset is undefined")]
    EmptyInput,
    #[error("no predicate qualifies as an entity label property")]
    NoLabelProperty,
    #[error("{subject} has no value for label property {predicate}")]
    MissingLabel { subject: String, predicate: String },
    #[error("label rank {rank} is outside the profile ({len} predicates)")]
    RankOutOfRange { rank: usize, len: usize },
}

/// Shannon entropy in bits of the empirical distribution of `values`.
pub fn entropy<I>(values: I) -> Result<f64, ProfileError>
where
    I: IntoIterator,
    I::Item: Hash + Eq,
{
    let mut counts: HashMap<I::Item, usize> = HashMap::new();
    let mut n = 0usize;
    for v in values {
        *counts.entry(v).or_default() += 1;
        n += 1;
    }
    if n == 0 {
        return Err(ProfileError::EmptyInput);
    }
    Ok(entropy_of_counts(counts.into_values().collect(), n))
}

/// Entropy from value frequencies. Counts are summed in sorted order so
/// the result does not depend on hash iteration order.
pub fn entropy_of_counts(mut counts: Vec<usize>, total: usize) -> f64 {
    counts.sort_unstable();
    let n = total as f64;
    let h: f64 = counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    // a constant predicate gives -0.0
    h.max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredicateEntropy {
    pub predicate: Term,
    pub entropy: f64,
    pub values: usize,
    pub subjects: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelProfile {
    /// Predicates with entropy at or above the threshold, highest first.
    pub ranked: Vec<PredicateEntropy>,
    pub omega_threshold: f64,
    /// Every qualifying predicate, in the same order.
    pub considered: Vec<PredicateEntropy>,
}

impl LabelProfile {
    pub fn predicates(&self) -> BTreeSet<Term> {
        self.ranked.iter().map(|p| p.predicate.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProfileOptions {
    pub max_len: usize,
    /// Per-predicate cap on observed literal triples; `None` disables sampling.
    pub sample_cap: Option<usize>,
    pub seed: u64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self { max_len: DEFAULT_MAX_LABEL_LEN, sample_cap: None, seed: 0 }
    }
}

/// Literal observations per predicate: `(subject, lexical form)` pairs.
pub type Observations = BTreeMap<Term, Vec<(Term, String)>>;

/// Scores the observed predicates and builds the profile.
pub fn profile_observations(obs: &Observations, max_len: usize) -> Result<LabelProfile, ProfileError> {
    let mut considered = Vec::new();
    for (predicate, values) in obs {
        if values.is_empty() || values.iter().any(|(_, v)| v.chars().count() >= max_len) {
            continue;
        }
        let subjects = values.iter().map(|(s, _)| s).collect::<BTreeSet<_>>().len();
        if subjects < 2 {
            continue;
        }
        let entropy = entropy(values.iter().map(|(_, v)| v.as_str()))?;
        considered.push(PredicateEntropy { predicate: predicate.clone(), entropy, values: values.len(), subjects });
    }
    if considered.is_empty() {
        return Err(ProfileError::NoLabelProperty);
    }
    considered.sort_by(|a, b| b.entropy.total_cmp(&a.entropy).then_with(|| a.predicate.cmp(&b.predicate)));
    let omega_threshold = considered.iter().map(|p| p.entropy).sum::<f64>() / considered.len() as f64;
    let ranked = considered.iter().filter(|p| p.entropy >= omega_threshold).cloned().collect();
    Ok(LabelProfile { ranked, omega_threshold, considered })
}

/// Profiles the literal predicates of the given subjects.
pub fn build_label_profile(
    ds: &Dataset,
    subjects: &BTreeSet<Term>,
    opts: &ProfileOptions,
) -> Result<LabelProfile, ProfileError> {
    let mut sampler = Sampler::new(opts);
    for s in subjects {
        for t in ds.triples_of(s) {
            if let Term::Literal(lit) = t.object() {
                sampler.offer(t.predicate(), s, lit.lexical());
            }
        }
    }
    profile_observations(&sampler.finish(), opts.max_len)
}

/// Profiles every subject that carries a literal, in load order.
pub fn build_target_profile(ds: &Dataset, opts: &ProfileOptions) -> Result<LabelProfile, ProfileError> {
    let mut sampler = Sampler::new(opts);
    for t in ds.triples() {
        if let Term::Literal(lit) = t.object() {
            sampler.offer(t.predicate(), t.subject(), lit.lexical());
        }
    }
    profile_observations(&sampler.finish(), opts.max_len)
}

/// Per-predicate reservoir sampling over the triple stream.
struct Sampler {
    cap: Option<usize>,
    rng: ChaCha8Rng,
    seen: HashMap<Term, usize>,
    obs: Observations,
}

impl Sampler {
    fn new(opts: &ProfileOptions) -> Self {
        Self {
            cap: opts.sample_cap,
            rng: ChaCha8Rng::seed_from_u64(opts.seed),
            seen: HashMap::new(),
            obs: BTreeMap::new(),
        }
    }

    fn offer(&mut self, predicate: &Term, subject: &Term, value: &str) {
        let seen = self.seen.entry(predicate.clone()).or_default();
        *seen += 1;
        let bucket = self.obs.entry(predicate.clone()).or_default();
        match self.cap {
            Some(cap) if bucket.len() >= cap => {
                let j = self.rng.random_range(0..*seen);
                if j < cap {
                    bucket[j] = (subject.clone(), value.to_owned());
                }
            }
            _ => bucket.push((subject.clone(), value.to_owned())),
        }
    }

    fn finish(self) -> Observations {
        self.obs
    }
}

/// The label of `subject` under the `rank`-th profiled predicate. With
/// several values the lexicographically smallest is returned.
pub fn label_of(ds: &Dataset, subject: &Term, profile: &LabelProfile, rank: usize) -> Result<String, ProfileError> {
    let entry = profile.ranked.get(rank).ok_or(ProfileError::RankOutOfRange { rank, len: profile.ranked.len() })?;
    ds.triples_of(subject)
        .filter(|t| t.predicate() == &entry.predicate)
        .filter_map(|t| t.object().as_literal())
        .map(|l| l.lexical())
        .min()
        .map(str::to_owned)
        .ok_or_else(|| ProfileError::MissingLabel {
            subject: subject.to_string(),
            predicate: entry.predicate.to_string(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{vocab, Literal, Triple};
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest};
    use rand::Rng;

    fn iri(s: &str) -> Term {
        Term::iri(s).unwrap()
    }

    fn lt(s: &str, p: &str, o: &str) -> Triple {
        Triple::new(iri(s), iri(p), Term::literal(Literal::simple(o))).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(["a", "a", "a"]).unwrap(), 0.0);
        assert!((entropy(["a", "b", "c", "d"]).unwrap() - 2.0).abs() < 1e-12);
        assert!((entropy(["a", "a", "b", "b"]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(entropy(Vec::<&str>::new()), Err(ProfileError::EmptyInput));
    }

    #[test]
    fn constant_predicate_is_dropped() {
        let mut triples = Vec::new();
        for i in 0..8 {
            let s = format!("http://x/{i}");
            triples.push(lt(&s, vocab::RDFS_LABEL, &format!("name {i}")));
            triples.push(lt(&s, "http://x/status", "active"));
        }
        let ds = Dataset::load(triples);
        let subjects: BTreeSet<Term> = ds.subjects().cloned().collect();
        let p = build_label_profile(&ds, &subjects, &ProfileOptions::default()).unwrap();
        assert_eq!(p.considered.len(), 2);
        assert_eq!(p.ranked.len(), 1);
        assert_eq!(p.ranked[0].predicate, iri(vocab::RDFS_LABEL));
        assert!((p.ranked[0].entropy - 3.0).abs() < 1e-12);
        assert!((p.omega_threshold - 1.5).abs() < 1e-12);
    }

    #[test]
    fn single_predicate_profile() {
        let ds = Dataset::load(vec![lt("http://a", "http://n", "A"), lt("http://b", "http://n", "B")]);
        let subjects: BTreeSet<Term> = ds.subjects().cloned().collect();
        let p = build_label_profile(&ds, &subjects, &ProfileOptions::default()).unwrap();
        assert_eq!(p.ranked.len(), 1);
        assert_eq!(p.omega_threshold, p.ranked[0].entropy);
    }

    #[test]
    fn long_literals_disqualify() {
        let long = "x".repeat(300);
        let ds = Dataset::load(vec![
            lt("http://a", "http://abstract", &format!("{long}a")),
            lt("http://b", "http://abstract", &format!("{long}b")),
            lt("http://a", "http://n", "A"),
            lt("http://b", "http://n", "B"),
        ]);
        let subjects: BTreeSet<Term> = ds.subjects().cloned().collect();
        let p = build_label_profile(&ds, &subjects, &ProfileOptions::default()).unwrap();
        assert_eq!(p.considered.len(), 1);
        assert_eq!(p.ranked[0].predicate, iri("http://n"));
    }

    #[test]
    fn length_rule_is_strict_and_counts_chars() {
        let at_limit = "é".repeat(200);
        let below = "é".repeat(199);
        let ds = Dataset::load(vec![
            lt("http://a", "http://p", &at_limit),
            lt("http://b", "http://p", "short"),
            lt("http://a", "http://q", &below),
            lt("http://b", "http://q", "short"),
        ]);
        let subjects: BTreeSet<Term> = ds.subjects().cloned().collect();
        let p = build_label_profile(&ds, &subjects, &ProfileOptions::default()).unwrap();
        let names: Vec<&Term> = p.considered.iter().map(|e| &e.predicate).collect();
        assert_eq!(names, vec![&iri("http://q")]);
    }

    #[test]
    fn single_subject_predicates_excluded() {
        let ds = Dataset::load(vec![lt("http://a", "http://n", "A"), lt("http://a", "http://n", "B")]);
        let subjects: BTreeSet<Term> = ds.subjects().cloned().collect();
        assert_eq!(build_label_profile(&ds, &subjects, &ProfileOptions::default()), Err(ProfileError::NoLabelProperty));
    }

    #[test]
    fn ties_break_by_predicate() {
        let ds = Dataset::load(vec![
            lt("http://a", "http://z", "1"),
            lt("http://b", "http://z", "2"),
            lt("http://a", "http://m", "A"),
            lt("http://b", "http://m", "B"),
        ]);
        let subjects: BTreeSet<Term> = ds.subjects().cloned().collect();
        let p = build_label_profile(&ds, &subjects, &ProfileOptions::default()).unwrap();
        assert_eq!(p.ranked[0].predicate, iri("http://m"));
        assert_eq!(p.ranked[1].predicate, iri("http://z"));
    }

    #[test]
    fn target_sampling_is_seeded() {
        let mut triples = Vec::new();
        for i in 0..200 {
            triples.push(lt(&format!("http://t/{i}"), "http://n", &format!("v{}", i % 37)));
        }
        let ds = Dataset::load(triples);
        let opts = ProfileOptions { sample_cap: Some(50), seed: 7, ..Default::default() };
        let a = build_target_profile(&ds, &opts).unwrap();
        let b = build_target_profile(&ds, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.ranked[0].values, 50);
        let full = build_target_profile(&ds, &ProfileOptions::default()).unwrap();
        assert_eq!(full.ranked[0].values, 200);
    }

    #[test]
    fn label_of_picks_smallest_value() {
        let ds = Dataset::load(vec![
            lt("http://a", vocab::RDFS_LABEL, "Brazil"),
            lt("http://b", vocab::RDFS_LABEL, "B"),
            lt("http://b", vocab::RDFS_LABEL, "A"),
            lt("http://c", "http://other", "x"),
        ]);
        let profile = LabelProfile {
            ranked: vec![PredicateEntropy { predicate: iri(vocab::RDFS_LABEL), entropy: 1.0, values: 3, subjects: 2 }],
            omega_threshold: 1.0,
            considered: vec![],
        };
        assert_eq!(label_of(&ds, &iri("http://a"), &profile, 0).unwrap(), "Brazil");
        assert_eq!(label_of(&ds, &iri("http://b"), &profile, 0).unwrap(), "A");
        assert!(matches!(label_of(&ds, &iri("http://c"), &profile, 0), Err(ProfileError::MissingLabel { .. })));
        assert!(matches!(label_of(&ds, &iri("http://a"), &profile, 1), Err(ProfileError::RankOutOfRange { .. })));
    }

    proptest! {
        #[test]
        fn entropy_invariances(values in proptest::collection::vec(0u8..6, 1..40), seed in any::<u64>()) {
            let h = entropy(values.iter()).unwrap();
            let distinct = values.iter().collect::<BTreeSet<_>>().len();
            prop_assert!(h >= 0.0 && h <= (distinct as f64).log2() + 1e-12);

            let mut shuffled = values.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in (1..shuffled.len()).rev() {
                shuffled.swap(i, rng.random_range(0..=i));
            }
            prop_assert_eq!(entropy(shuffled.iter()).unwrap(), h);

            let renamed: Vec<String> = values.iter().map(|v| format!("value-{}", 97 - *v as i32)).collect();
            prop_assert_eq!(entropy(renamed.iter()).unwrap(), h);
        }
    }
}
