//! Brute-force scoring straight from raw triples.
//!
//! Every quantity is recomputed from a linear scan of the triple list for
//! each term of each sum: no index, no cache, no shared helpers with the
//! production code. Sets are plain vectors kept duplicate-free by hand.

use crate::raw::{Obj, RawTriple};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NaiveIndex {
    SetSim,
    Jaccard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveRow {
    pub set: usize,
    pub resource: String,
    pub urds: f64,
    /// `None` when eliminated as an outlier.
    pub delta: Option<f64>,
}

fn push_unique<T: PartialEq>(v: &mut Vec<T>, x: T) {
    if !v.contains(&x) {
        v.push(x);
    }
}

#[derive(Debug, Default)]
struct Items {
    p: Vec<String>,
    d: Vec<String>,
    o: Vec<String>,
    t: Vec<String>,
}

fn items(triples: &[RawTriple], subjects: &[String]) -> Items {
    let mut described: Vec<&RawTriple> = Vec::new();
    for t in triples {
        if subjects.contains(&t.s) && !described.contains(&t) {
            described.push(t);
        }
    }
    // (subject, predicate) -> cardinality, by scanning
    let mut pairs: Vec<(&str, &str, usize)> = Vec::new();
    for t in &described {
        match pairs.iter_mut().find(|(s, p, _)| *s == t.s && *p == t.p) {
            Some(entry) => entry.2 += 1,
            None => pairs.push((&t.s, &t.p, 1)),
        }
    }
    let mut out = Items::default();
    if pairs.is_empty() {
        return out;
    }
    let total: usize = pairs.iter().map(|x| x.2).sum();
    let eta = total as f64 / pairs.len() as f64;
    let cutoff = if eta > 5.0 { eta } else { 5.0 };
    for t in &described {
        push_unique(&mut out.p, t.p.clone());
        let c = pairs.iter().find(|(s, p, _)| *s == t.s && *p == t.p).unwrap().2;
        if c as f64 > cutoff {
            continue;
        }
        match &t.o {
            Obj::Lit(l) => push_unique(&mut out.d, l.clone()),
            Obj::Iri(i) => push_unique(&mut out.o, i.clone()),
        }
        // The separator cannot occur inside an IRI.
        push_unique(&mut out.t, format!("{} {}", t.p, t.o.key()));
    }
    out
}

fn index_value(a: &[String], b: &[String], index: NaiveIndex) -> f64 {
    let common = a.iter().filter(|x| b.contains(x)).count() as f64;
    let a_only = a.len() as f64 - common;
    let b_only = b.len() as f64 - common;
    let union = common + a_only + b_only;
    if union == 0.0 {
        return 0.0;
    }
    match index {
        NaiveIndex::SetSim => common - a_only / union,
        NaiveIndex::Jaccard => common / union,
    }
}

fn rds(triples: &[RawTriple], a: &[String], b: &[String], index: NaiveIndex) -> f64 {
    let x = items(triples, a);
    let y = items(triples, b);
    index_value(&x.p, &y.p, index)
        + index_value(&x.d, &y.d, index)
        + index_value(&x.o, &y.o, index)
        + index_value(&x.t, &y.t, index)
}

fn distinct(v: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for x in v {
        push_unique(&mut out, x.clone());
    }
    out
}

/// Raw score of `resource` from set `home`.
pub fn naive_urds(
    triples: &[RawTriple],
    resource: &str,
    home: usize,
    sets: &[Vec<String>],
    pivots: &[String],
    index: NaiveIndex,
) -> f64 {
    let me = vec![resource.to_owned()];
    let mut sum = 0.0;
    for (j, set) in sets.iter().enumerate() {
        let set = distinct(set);
        if j == home || set.is_empty() || set.iter().any(|m| m == resource) {
            continue;
        }
        sum += rds(triples, &me, &set, index) / set.len() as f64;
    }
    for pivot in distinct(pivots) {
        if pivot != resource {
            sum += rds(triples, &me, &[pivot], index);
        }
    }
    if sum < 0.0 {
        0.0
    } else {
        sum
    }
}

/// Raw scores, outlier elimination and per-set normalization for every
/// member of every set, in set order then member order.
pub fn naive_scores(
    triples: &[RawTriple],
    sets: &[Vec<String>],
    pivots: &[String],
    index: NaiveIndex,
) -> Vec<NaiveRow> {
    let mut rows = Vec::new();
    for (i, set) in sets.iter().enumerate() {
        for r in distinct(set) {
            let urds = naive_urds(triples, &r, i, sets, pivots, index);
            rows.push(NaiveRow { set: i, resource: r, urds, delta: None });
        }
    }
    if rows.is_empty() {
        return rows;
    }
    let n = rows.len() as f64;
    let mean = rows.iter().map(|r| r.urds).sum::<f64>() / n;
    let sigma = (rows.iter().map(|r| (r.urds - mean) * (r.urds - mean)).sum::<f64>() / n).sqrt();
    let eliminated: Vec<bool> = rows.iter().map(|r| sigma > 0.13 && r.urds < mean - sigma).collect();
    for i in 0..rows.len() {
        if eliminated[i] {
            continue;
        }
        let mut max = 0.0f64;
        for j in 0..rows.len() {
            if rows[j].set == rows[i].set && !eliminated[j] && rows[j].urds > max {
                max = rows[j].urds;
            }
        }
        rows[i].delta = Some(if max > 0.0 { rows[i].urds / max } else { 0.0 });
    }
    rows
}

/// `max(mean, median)` of the set's surviving deltas.
pub fn naive_delta_m(rows: &[NaiveRow], set: usize) -> Option<f64> {
    let mut ds: Vec<f64> = rows.iter().filter(|r| r.set == set).filter_map(|r| r.delta).collect();
    if ds.is_empty() {
        return None;
    }
    ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = ds.len();
    let median = if n % 2 == 1 { ds[n / 2] } else { (ds[n / 2 - 1] + ds[n / 2]) / 2.0 };
    let mean = ds.iter().sum::<f64>() / n as f64;
    Some(mean.max(median))
}

/// Members chosen under the δ_m rule, per set, sorted. Comparisons allow
/// 1e-12 of slack so rounding in the mean cannot drop the best resource.
pub fn naive_select_delta_m(rows: &[NaiveRow], set_count: usize) -> Vec<Vec<String>> {
    (0..set_count)
        .map(|i| {
            let Some(t) = naive_delta_m(rows, i) else { return Vec::new() };
            let mut chosen: Vec<String> = rows
                .iter()
                .filter(|r| r.set == i && r.delta.is_some_and(|d| d >= t - 1e-12))
                .map(|r| r.resource.clone())
                .collect();
            chosen.sort();
            chosen
        })
        .collect()
}

/// Subjects holding a literal equal to `label` ignoring case, sorted.
pub fn naive_exact_label_matches(triples: &[RawTriple], label: &str) -> Vec<String> {
    let mut out = Vec::new();
    for t in triples {
        if let Obj::Lit(l) = &t.o {
            if l.to_lowercase() == label.to_lowercase() {
                push_unique(&mut out, t.s.clone());
            }
        }
    }
    out.sort();
    out
}
