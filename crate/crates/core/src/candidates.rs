//! Pseudo-homonym sets: target resources whose label is closest to a
//! source resource's entity label.

use std::collections::{BTreeMap, BTreeSet};

use crate::index::{Dataset, DEFAULT_POOL_CAP};
use crate::model::Term;
use crate::profile::{label_of, LabelProfile, ProfileError};
use crate::similarity::jaro_winkler;
use crate::target::{TargetError, TargetStore};

pub const DEFAULT_JW_FLOOR: f64 = 0.70;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateOptions {
    pub jw_floor: f64,
    pub pool_cap: usize,
}

impl Default for CandidateOptions {
    fn default() -> Self {
        Self { jw_floor: DEFAULT_JW_FLOOR, pool_cap: DEFAULT_POOL_CAP }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoHomonymSet {
    pub source: Term,
    /// The label that produced the members (the last one tried when the
    /// set is empty).
    pub query_label: String,
    pub members: BTreeSet<Term>,
    /// Jaro-Winkler score shared by every member.
    pub score: Option<f64>,
    /// Profile rank of the label property used; `None` when every rank
    /// was tried without a hit.
    pub label_rank_used: Option<usize>,
}

impl PseudoHomonymSet {
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }
}

fn same_score(a: f64, b: f64) -> bool {
    (a * 1e9).round() == (b * 1e9).round()
}

/// Walks the source profile from the highest-entropy property down. The
/// first label with any target hit decides the set: the subjects attaining
/// the maximum Jaro-Winkler score, or nothing if that maximum is below
/// `jw_floor`.
pub fn build_pseudo_homonyms(
    source_subject: &Term,
    source_profile: &LabelProfile,
    source_ds: &Dataset,
    target_profile: &LabelProfile,
    target: &dyn TargetStore,
    opts: &CandidateOptions,
) -> Result<PseudoHomonymSet, TargetError> {
    let target_predicates = target_profile.predicates();
    let mut last_label = String::new();
    for rank in 0..source_profile.len() {
        let label = match label_of(source_ds, source_subject, source_profile, rank) {
            Ok(l) => l,
            Err(ProfileError::MissingLabel { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        let hits = target.search_literals(&label, &target_predicates, opts.pool_cap)?;
        let mut best: BTreeMap<Term, f64> = BTreeMap::new();
        for hit in hits.into_iter().filter(|h| h.subject.is_iri()) {
            let s = jaro_winkler(&label, &hit.literal);
            let e = best.entry(hit.subject).or_insert(s);
            *e = e.max(s);
        }
        if best.is_empty() {
            last_label = label;
            continue;
        }
        let max = best.values().copied().fold(f64::NEG_INFINITY, f64::max);
        let members = if max >= opts.jw_floor {
            best.into_iter().filter(|(_, s)| same_score(*s, max)).map(|(t, _)| t).collect()
        } else {
            BTreeSet::new()
        };
        return Ok(PseudoHomonymSet {
            source: source_subject.clone(),
            query_label: label,
            members,
            score: Some(max),
            label_rank_used: Some(rank),
        });
    }
    Ok(PseudoHomonymSet {
        source: source_subject.clone(),
        query_label: last_label,
        members: BTreeSet::new(),
        score: None,
        label_rank_used: None,
    })
}
