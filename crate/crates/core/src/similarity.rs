//! String and set similarity.
//!
//! The set functions follow the contrast model with cardinality as the
//! scale function:
//!
//! ```text
//! tversky(A, B) = λ·|A ∩ B| − α·|A − B| − β·|B − A|
//! ```
//!
//! [`set_sim`] is the specialization `λ = 1`, `α = 1/|A ∪ B|`, `β = 0`:
//! commonality dominates and only the features of `A` missing from `B`
//! are charged, at a weight below one feature.

use std::collections::BTreeSet;

/// Jaro similarity over Unicode scalar values.
pub fn jaro(a: &str, b: &str) -> f64 {
    let (a, b) = canonical_order(a, b);
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let window = (a.len().max(b.len()) / 2).saturating_sub(1);
    let mut a_matched = vec![false; a.len()];
    let mut b_matched = vec![false; b.len()];
    let mut matches = 0usize;
    for (i, ca) in a.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(b.len());
        for j in lo..hi {
            if !b_matched[j] && b[j] == *ca {
                a_matched[i] = true;
                b_matched[j] = true;
                matches += 1;
                break;
            }
        }
    }
    if matches == 0 {
        return 0.0;
    }
    let a_seq = a.iter().zip(&a_matched).filter(|(_, m)| **m).map(|(c, _)| c);
    let b_seq = b.iter().zip(&b_matched).filter(|(_, m)| **m).map(|(c, _)| c);
    let half_transpositions = a_seq.zip(b_seq).filter(|(x, y)| x != y).count();
    let m = matches as f64;
    let t = (half_transpositions / 2) as f64;
    (m / a.len() as f64 + m / b.len() as f64 + (m - t) / m) / 3.0
}

/// Jaro-Winkler similarity: Jaro boosted by the common prefix, prefix
/// length capped at 4 and scaling factor 0.1.
pub fn jaro_winkler(a: &str, b: &str) -> f64 {
    const PREFIX_CAP: usize = 4;
    const SCALE: f64 = 0.1;
    let j = jaro(a, b);
    let prefix = a.chars().zip(b.chars()).take_while(|(x, y)| x == y).take(PREFIX_CAP).count();
    (j + prefix as f64 * SCALE * (1.0 - j)).min(1.0)
}

// Greedy matching depends on argument order in rare cases; fixing the
// order makes both functions symmetric.
fn canonical_order<'a>(a: &'a str, b: &'a str) -> (&'a str, &'a str) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Overlap {
    pub common: usize,
    pub a_only: usize,
    pub b_only: usize,
}

impl Overlap {
    pub fn of<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> Self {
        let common = a.intersection(b).count();
        Self { common, a_only: a.len() - common, b_only: b.len() - common }
    }

    pub fn union(&self) -> usize {
        self.common + self.a_only + self.b_only
    }
}

/// The contrast model with `f = |·|`.
pub fn tversky<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>, lambda: f64, alpha: f64, beta: f64) -> f64 {
    let o = Overlap::of(a, b);
    lambda * o.common as f64 - alpha * o.a_only as f64 - beta * o.b_only as f64
}

/// `|A ∩ B| − |A − B| / |A ∪ B|`, and 0 for two empty sets.
///
/// Not symmetric: only `A − B` is charged.
pub fn set_sim<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    set_sim_from(Overlap::of(a, b))
}

pub fn set_sim_from(o: Overlap) -> f64 {
    let union = o.union();
    if union == 0 {
        return 0.0;
    }
    o.common as f64 - o.a_only as f64 * (union as f64).recip()
}

/// `|A ∩ B| / |A ∪ B|`, and 0 for two empty sets.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    jaccard_from(Overlap::of(a, b))
}

pub fn jaccard_from(o: Overlap) -> f64 {
    let union = o.union();
    if union == 0 {
        return 0.0;
    }
    o.common as f64 / union as f64
}

/// Which set index scores the items of measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SetIndex {
    #[default]
    SetSim,
    Jaccard,
}

impl SetIndex {
    pub fn score<T: Ord>(self, a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
        let o = Overlap::of(a, b);
        match self {
            SetIndex::SetSim => set_sim_from(o),
            SetIndex::Jaccard => jaccard_from(o),
        }
    }
}

impl std::str::FromStr for SetIndex {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "setsim" | "set-sim" => Ok(SetIndex::SetSim),
            "jaccard" => Ok(SetIndex::Jaccard),
            other => Err(format!("unknown set index {other:?} (expected setsim or jaccard)")),
        }
    }
}

impl std::fmt::Display for SetIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SetIndex::SetSim => "setsim",
            SetIndex::Jaccard => "jaccard",
        })
    }
}
