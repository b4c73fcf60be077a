//! Resource-description similarity scoring.
//!
//! Every resource of every pseudo-homonym set is compared with all the
//! other sets of the same round. A resource that looks like the other sets
//! (shared predicates, values, linked resources) is more likely to belong
//! to the class the source labels denote than a homonym of another kind.
//!
//! The steps, in order:
//!
//! 1. [`measure`] turns a description into four feature sets: predicates,
//!    literal values, object IRIs and predicate/object pairs.
//! 2. [`rds`] sums the set index of the four feature sets.
//! 3. [`urds`] sums `rds({r}, S') / |S'|` over the other sets `S'`.
//! 4. [`ScoreTable::eliminate_outliers`] drops resources scoring below
//!    `mean − σ` when the scores are spread enough (`σ > 0.13`).
//! 5. [`ScoreTable::normalize`] divides by the best score of the set.
//! 6. [`ScoreTable::select`] applies a threshold policy.

use std::collections::{BTreeSet, HashMap};
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;

use crate::index::Description;
use crate::model::Term;
use crate::similarity::SetIndex;

/// Outlier elimination only runs when the URDS spread exceeds this.
pub const SIGMA_GATE: f64 = 0.13;
/// Floor of the per-subject predicate cardinality cut-off.
pub const MIN_NOISE_CARDINALITY: f64 = 5.0;

/// Items of measurement of a set of resources.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Measurement {
    pub predicates: BTreeSet<String>,
    pub literals: BTreeSet<String>,
    pub objects: BTreeSet<String>,
    pub pairs: BTreeSet<(String, String)>,
}

impl Measurement {
    pub fn size(&self) -> usize {
        self.predicates.len() + self.literals.len() + self.objects.len() + self.pairs.len()
    }
}

/// Builds the items of measurement of the described subjects.
///
/// Predicates come from every triple. Literals, objects and pairs skip
/// triples whose predicate occurs on the same subject more than
/// `max(η, 5)` times, `η` being the mean per-subject predicate cardinality
/// over all `(subject, predicate)` pairs in `descriptions`.
pub fn measure(descriptions: &[Description]) -> Measurement {
    let mut m = Measurement::default();
    let mut cardinality: HashMap<(&Term, &Term), usize> = HashMap::new();
    for d in descriptions {
        for (p, _) in &d.statements {
            *cardinality.entry((&d.subject, p)).or_default() += 1;
            m.predicates.insert(p.key().to_owned());
        }
    }
    if cardinality.is_empty() {
        return m;
    }
    let eta = cardinality.values().sum::<usize>() as f64 / cardinality.len() as f64;
    let cutoff = eta.max(MIN_NOISE_CARDINALITY);
    for d in descriptions {
        for (p, o) in &d.statements {
            if cardinality[&(&d.subject, p)] as f64 > cutoff {
                continue;
            }
            match o {
                Term::Literal(l) => {
                    m.literals.insert(l.lexical().to_owned());
                }
                Term::Iri(v) => {
                    m.objects.insert(v.clone());
                }
                Term::BlankNode(_) => {}
            }
            m.pairs.insert((p.key().to_owned(), o.key().to_owned()));
        }
    }
    m
}

/// Sum of the set index over the four items of measurement, equally
/// weighted.
pub fn rds(a: &Measurement, b: &Measurement, index: SetIndex) -> f64 {
    index.score(&a.predicates, &b.predicates)
        + index.score(&a.literals, &b.literals)
        + index.score(&a.objects, &b.objects)
        + index.score(&a.pairs, &b.pairs)
}

/// Memoized measurements keyed by the sorted subject list.
pub struct MeasurementCache<'a> {
    descriptions: &'a HashMap<Term, Description>,
    cache: RwLock<HashMap<Vec<Term>, Arc<Measurement>>>,
}

impl<'a> MeasurementCache<'a> {
    /// Subjects missing from `descriptions` are treated as having no
    /// triples.
    pub fn new(descriptions: &'a HashMap<Term, Description>) -> Self {
        Self { descriptions, cache: RwLock::new(HashMap::new()) }
    }

    pub fn get<'t, I>(&self, subjects: I) -> Arc<Measurement>
    where
        I: IntoIterator<Item = &'t Term>,
    {
        let mut key: Vec<Term> = subjects.into_iter().cloned().collect();
        key.sort();
        key.dedup();
        if let Some(m) = self.cache.read().expect("cache lock").get(&key) {
            return m.clone();
        }
        let descs: Vec<Description> = key
            .iter()
            .map(|s| self.descriptions.get(s).cloned().unwrap_or_else(|| Description::empty(s.clone())))
            .collect();
        let m = Arc::new(measure(&descs));
        self.cache.write().expect("cache lock").entry(key).or_insert(m).clone()
    }

    pub fn len(&self) -> usize {
        self.cache.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Raw score of `resource` from set `home` against every other set.
///
/// `sets` are the pseudo-homonym sets of the round, `pivots` extra
/// singleton sets. Sets that are empty, are the home set, or contain the
/// resource are skipped. Each term is divided by the member count of the
/// set it compares against. Negative sums are clamped to 0.
pub fn urds(
    resource: &Term,
    home: usize,
    sets: &[BTreeSet<Term>],
    pivots: &[Term],
    cache: &MeasurementCache<'_>,
    index: SetIndex,
) -> f64 {
    let own = cache.get([resource]);
    let mut sum = 0.0;
    for (i, other) in sets.iter().enumerate() {
        if i == home || other.is_empty() || other.contains(resource) {
            continue;
        }
        sum += rds(&own, &cache.get(other), index) / other.len() as f64;
    }
    for pivot in pivots {
        if pivot == resource {
            continue;
        }
        sum += rds(&own, &cache.get([pivot]), index);
    }
    sum.max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub resource: Term,
    pub home: usize,
    pub urds: f64,
    /// Normalized score; `None` until normalized or when eliminated.
    pub delta: Option<f64>,
    pub eliminated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub rows: Vec<ScoreRow>,
    pub set_count: usize,
    pub mean: f64,
    /// Population standard deviation of all raw scores.
    pub sigma: f64,
    /// Elimination cut-off, set only when the gate opened.
    pub phi: Option<f64>,
    /// Per-set `max(mean, median)` of surviving deltas.
    pub delta_m: Vec<Option<f64>>,
}

/// Scores every member of every set. Pivots with duplicate entries count
/// once.
pub fn score_sets(
    sets: &[BTreeSet<Term>],
    pivots: &[Term],
    cache: &MeasurementCache<'_>,
    index: SetIndex,
) -> ScoreTable {
    let mut unique_pivots: Vec<Term> = Vec::with_capacity(pivots.len());
    for p in pivots {
        if !unique_pivots.contains(p) {
            unique_pivots.push(p.clone());
        }
    }
    let jobs: Vec<(usize, &Term)> = sets.iter().enumerate().flat_map(|(i, s)| s.iter().map(move |r| (i, r))).collect();
    let rows = jobs
        .into_par_iter()
        .map(|(home, r)| ScoreRow {
            resource: r.clone(),
            home,
            urds: urds(r, home, sets, &unique_pivots, cache, index),
            delta: None,
            eliminated: false,
        })
        .collect();
    ScoreTable::new(sets.len(), rows)
}

impl ScoreTable {
    pub fn new(set_count: usize, rows: Vec<ScoreRow>) -> Self {
        let n = rows.len() as f64;
        let (mean, sigma) = if rows.is_empty() {
            (0.0, 0.0)
        } else {
            let mean = rows.iter().map(|r| r.urds).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r.urds - mean).powi(2)).sum::<f64>() / n;
            (mean, var.sqrt())
        };
        Self { rows, set_count, mean, sigma, phi: None, delta_m: vec![None; set_count] }
    }

    /// Marks resources with `urds < mean − σ`, only when `σ > 0.13`.
    pub fn eliminate_outliers(&mut self) {
        if self.sigma <= SIGMA_GATE {
            self.phi = None;
            return;
        }
        let phi = self.mean - self.sigma;
        self.phi = Some(phi);
        for row in &mut self.rows {
            if row.urds < phi {
                row.eliminated = true;
                row.delta = None;
            }
        }
    }

    /// Divides each surviving score by the best surviving score of its set
    /// (all zero when that best is 0) and computes each set's `δ_m`.
    pub fn normalize(&mut self) {
        let mut best = vec![0.0f64; self.set_count];
        for row in self.rows.iter().filter(|r| !r.eliminated) {
            best[row.home] = best[row.home].max(row.urds);
        }
        for row in self.rows.iter_mut().filter(|r| !r.eliminated) {
            let max = best[row.home];
            row.delta = Some(if max > 0.0 { row.urds / max } else { 0.0 });
        }
        let mut per_set: Vec<Vec<f64>> = vec![Vec::new(); self.set_count];
        for row in &self.rows {
            if let Some(d) = row.delta {
                per_set[row.home].push(d);
            }
        }
        self.delta_m = per_set.into_iter().map(|ds| delta_m(&ds)).collect();
    }

    /// Chosen rows per set, best first.
    pub fn select(&self, policy: SelectionPolicy) -> Vec<Vec<&ScoreRow>> {
        let mut per_set: Vec<Vec<&ScoreRow>> = vec![Vec::new(); self.set_count];
        for row in self.rows.iter().filter(|r| r.delta.is_some()) {
            per_set[row.home].push(row);
        }
        for (home, rows) in per_set.iter_mut().enumerate() {
            rows.sort_by(|a, b| rank_order(a, b));
            match policy {
                SelectionPolicy::DeltaM => {
                    if let Some(t) = self.delta_m[home] {
                        rows.retain(|r| r.delta.unwrap_or(0.0) >= t);
                    }
                }
                SelectionPolicy::Fixed(t) => rows.retain(|r| r.delta.unwrap_or(0.0) >= t),
                SelectionPolicy::TopK(k) => rows.truncate(k),
            }
        }
        per_set
    }
}

/// Descending delta, then descending raw score, then ascending IRI.
pub fn rank_order(a: &ScoreRow, b: &ScoreRow) -> std::cmp::Ordering {
    let da = a.delta.unwrap_or(f64::NEG_INFINITY);
    let db = b.delta.unwrap_or(f64::NEG_INFINITY);
    db.total_cmp(&da).then_with(|| b.urds.total_cmp(&a.urds)).then_with(|| a.resource.cmp(&b.resource))
}

/// `max(mean, median)`, capped at the maximum so the best resource always
/// passes.
pub fn delta_m(deltas: &[f64]) -> Option<f64> {
    if deltas.is_empty() {
        return None;
    }
    let mut sorted = deltas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 { sorted[n / 2] } else { (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0 };
    let mean = sorted.iter().sum::<f64>() / n as f64;
    Some(mean.max(median).min(sorted[n - 1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SelectionPolicy {
    /// Per set, `δ ≥ max(mean, median)` of the set's deltas.
    #[default]
    DeltaM,
    Fixed(f64),
    TopK(usize),
}

impl FromStr for SelectionPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "delta-m" {
            return Ok(SelectionPolicy::DeltaM);
        }
        if let Some(x) = s.strip_prefix("fixed:") {
            let t: f64 = x.parse().map_err(|_| format!("invalid threshold {x:?}"))?;
            if !(0.0..=1.0).contains(&t) {
                return Err(format!("threshold {t} outside [0, 1]"));
            }
            return Ok(SelectionPolicy::Fixed(t));
        }
        if let Some(k) = s.strip_prefix("top-k:") {
            let k: usize = k.parse().map_err(|_| format!("invalid k {k:?}"))?;
            if k == 0 {
                return Err("top-k needs k >= 1".into());
            }
            return Ok(SelectionPolicy::TopK(k));
        }
        Err(format!("unknown policy {s:?} (expected delta-m, fixed:<x> or top-k:<k>)"))
    }
}

impl std::fmt::Display for SelectionPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SelectionPolicy::DeltaM => f.write_str("delta-m"),
            SelectionPolicy::Fixed(t) => write!(f, "fixed:{t}"),
            SelectionPolicy::TopK(k) => write!(f, "top-k:{k}"),
        }
    }
}
