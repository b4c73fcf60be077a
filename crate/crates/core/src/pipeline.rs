//! End-to-end matching run: class selection, profiling, chunked candidate
//! building, scoring with pivot accumulation, and link emission.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::candidates::{build_pseudo_homonyms, CandidateOptions, PseudoHomonymSet, DEFAULT_JW_FLOOR};
use crate::index::{Dataset, Description, DEFAULT_POOL_CAP};
use crate::model::{vocab, Term};
use crate::profile::{build_label_profile, LabelProfile, ProfileError, ProfileOptions, DEFAULT_MAX_LABEL_LEN};
use crate::rds::{score_sets, MeasurementCache, SelectionPolicy};
use crate::similarity::SetIndex;
use crate::target::{TargetError, TargetStore};

pub const DEFAULT_MU: usize = 20;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("class {0} has no instances in the source dataset")]
    NoInstances(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("source profiling failed: {0}")]
    Profile(#[from] ProfileError),
    #[error("target access failed: {0}")]
    Target(#[from] TargetError),
}

/// How accepted matches are carried into later chunks as singleton sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotMode {
    /// Keep the μ most recent pivots.
    #[default]
    Fifo,
    /// Keep every pivot for the rest of the run.
    Cumulative,
    Off,
}

impl FromStr for PivotMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fifo" => Ok(PivotMode::Fifo),
            "cumulative" => Ok(PivotMode::Cumulative),
            "off" => Ok(PivotMode::Off),
            other => Err(format!("unknown pivot mode {other:?} (expected fifo, cumulative or off)")),
        }
    }
}

impl std::fmt::Display for PivotMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PivotMode::Fifo => "fifo",
            PivotMode::Cumulative => "cumulative",
            PivotMode::Off => "off",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub class_of_interest: Term,
    pub mu: usize,
    pub jw_floor: f64,
    pub max_label_len: usize,
    pub policy: SelectionPolicy,
    pub pool_cap: usize,
    pub sampling_seed: u64,
    /// Per-predicate sample cap for the target profile.
    pub profile_sample_cap: Option<usize>,
    pub pivots: PivotMode,
    pub index: SetIndex,
}

impl PipelineConfig {
    pub fn new(class_of_interest: Term) -> Self {
        Self {
            class_of_interest,
            mu: DEFAULT_MU,
            jw_floor: DEFAULT_JW_FLOOR,
            max_label_len: DEFAULT_MAX_LABEL_LEN,
            policy: SelectionPolicy::DeltaM,
            pool_cap: DEFAULT_POOL_CAP,
            sampling_seed: 0,
            profile_sample_cap: Some(crate::profile::DEFAULT_SAMPLE_CAP),
            pivots: PivotMode::Fifo,
            index: SetIndex::SetSim,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.mu < 2 {
            return Err(PipelineError::InvalidConfig(format!("mu must be at least 2, got {}", self.mu)));
        }
        if !(0.0..=1.0).contains(&self.jw_floor) {
            return Err(PipelineError::InvalidConfig(format!("jw floor {} outside [0, 1]", self.jw_floor)));
        }
        if self.max_label_len == 0 {
            return Err(PipelineError::InvalidConfig("max label length must be positive".into()));
        }
        if self.pool_cap == 0 {
            return Err(PipelineError::InvalidConfig("pool cap must be positive".into()));
        }
        if !self.class_of_interest.is_iri() {
            return Err(PipelineError::InvalidConfig("class of interest must be an IRI".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentLink {
    pub source: Term,
    pub target: Term,
    pub delta: f64,
    pub urds: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    pub instances: usize,
    pub chunks: usize,
    pub nonempty_sets: usize,
    pub empty_sets: usize,
    pub candidates: usize,
    pub links: usize,
    pub profile_time: Duration,
    pub candidate_time: Duration,
    pub scoring_time: Duration,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub links: Vec<AlignmentLink>,
    pub source_profile: LabelProfile,
    pub target_profile: LabelProfile,
    /// Pseudo-homonym sets in source order.
    pub sets: Vec<PseudoHomonymSet>,
    pub stats: RunStats,
}

/// Links the instances of the configured class to the target.
pub fn run(source: &Dataset, target: &dyn TargetStore, config: &PipelineConfig) -> Result<RunOutput, PipelineError> {
    config.validate()?;
    let mut stats = RunStats::default();

    let instances = source.instances_of_class(&config.class_of_interest);
    let instances: BTreeSet<Term> = instances.into_iter().filter(Term::is_iri).collect();
    if instances.is_empty() {
        return Err(PipelineError::NoInstances(config.class_of_interest.key().to_owned()));
    }
    stats.instances = instances.len();

    let started = Instant::now();
    let source_opts = ProfileOptions { max_len: config.max_label_len, sample_cap: None, seed: config.sampling_seed };
    let source_profile = build_label_profile(source, &instances, &source_opts)?;
    let target_opts = ProfileOptions {
        max_len: config.max_label_len,
        sample_cap: config.profile_sample_cap,
        seed: config.sampling_seed,
    };
    let target_profile = target.label_profile(&target_opts)?;
    stats.profile_time = started.elapsed();
    log::info!("profiles: source {} label properties, target {}", source_profile.len(), target_profile.len());

    let candidate_opts = CandidateOptions { jw_floor: config.jw_floor, pool_cap: config.pool_cap };
    let instances: Vec<Term> = instances.into_iter().collect();
    let mut pivots: VecDeque<Term> = VecDeque::new();
    let mut links = Vec::new();
    let mut all_sets = Vec::with_capacity(instances.len());

    for chunk in instances.chunks(config.mu) {
        stats.chunks += 1;
        let started = Instant::now();
        let sets: Vec<PseudoHomonymSet> = chunk
            .par_iter()
            .map(|s| build_pseudo_homonyms(s, &source_profile, source, &target_profile, target, &candidate_opts))
            .collect::<Result<_, _>>()?;
        stats.candidate_time += started.elapsed();

        let started = Instant::now();
        let members: Vec<BTreeSet<Term>> = sets.iter().map(|s| s.members.clone()).collect();
        let pivot_list: Vec<Term> = pivots.iter().cloned().collect();
        let mut needed: BTreeSet<Term> = members.iter().flatten().cloned().collect();
        needed.extend(pivot_list.iter().cloned());
        let needed: Vec<Term> = needed.into_iter().collect();
        let descriptions: HashMap<Term, Description> = if needed.is_empty() {
            HashMap::new()
        } else {
            target.describe(&needed)?.into_iter().map(|d| (d.subject.clone(), d)).collect()
        };
        let cache = MeasurementCache::new(&descriptions);
        let mut table = score_sets(&members, &pivot_list, &cache, config.index);
        table.eliminate_outliers();
        table.normalize();
        let selected = table.select(config.policy);
        stats.scoring_time += started.elapsed();

        let mut new_pivots = Vec::new();
        for (set, rows) in sets.iter().zip(&selected) {
            if set.is_empty() {
                stats.empty_sets += 1;
            } else {
                stats.nonempty_sets += 1;
                stats.candidates += set.len();
            }
            for row in rows {
                links.push(AlignmentLink {
                    source: set.source.clone(),
                    target: row.resource.clone(),
                    delta: row.delta.unwrap_or(0.0),
                    urds: row.urds,
                });
            }
            if let Some(best) = rows.first() {
                new_pivots.push(best.resource.clone());
            }
        }
        match config.pivots {
            PivotMode::Off => {}
            PivotMode::Cumulative => pivots.extend(new_pivots),
            PivotMode::Fifo => {
                pivots.extend(new_pivots);
                while pivots.len() > config.mu {
                    pivots.pop_front();
                }
            }
        }
        log::debug!("chunk {}: {} sets, {} pivots carried", stats.chunks, sets.len(), pivots.len());
        all_sets.extend(sets);
    }

    sort_links(&mut links);
    stats.links = links.len();
    Ok(RunOutput { links, source_profile, target_profile, sets: all_sets, stats })
}

/// Source IRI ascending, then delta descending, then target ascending.
pub fn sort_links(links: &mut [AlignmentLink]) {
    links.sort_by(|a, b| {
        a.source.cmp(&b.source).then_with(|| b.delta.total_cmp(&a.delta)).then_with(|| a.target.cmp(&b.target))
    });
}

pub const LINKS_NT: &str = "links.nt";
pub const LINKS_TSV: &str = "links.tsv";
pub const MANIFEST: &str = "manifest.txt";

/// Writes `links.nt` and `links.tsv` into `dir`, creating it if needed.
pub fn emit_links(links: &[AlignmentLink], dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut sorted = links.to_vec();
    sort_links(&mut sorted);
    let mut nt = BufWriter::new(fs::File::create(dir.join(LINKS_NT))?);
    nt.write_all(links_ntriples(&sorted).as_bytes())?;
    nt.flush()?;
    let mut tsv = BufWriter::new(fs::File::create(dir.join(LINKS_TSV))?);
    tsv.write_all(links_tsv(&sorted).as_bytes())?;
    tsv.flush()
}

pub fn links_ntriples(links: &[AlignmentLink]) -> String {
    let same_as = Term::Iri(vocab::OWL_SAME_AS.to_owned());
    let mut out = String::new();
    for l in links {
        let _ = writeln!(out, "{} {} {} .", l.source, same_as, l.target);
    }
    out
}

pub fn links_tsv(links: &[AlignmentLink]) -> String {
    let mut out = String::new();
    for l in links {
        let _ = writeln!(out, "{}\t{}\t{:.6}\t{:.6}", l.source.key(), l.target.key(), l.delta, l.urds);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Literal, Triple};

    fn iri(s: &str) -> Term {
        Term::iri(format!("http://ex.org/{s}")).unwrap()
    }

    fn lit(s: &str) -> Term {
        Term::literal(Literal::simple(s))
    }

    fn t(s: &str, p: &str, o: Term) -> Triple {
        Triple::new(iri(s), iri(p), o).unwrap()
    }

    fn typed(s: &str, class: &str) -> Triple {
        Triple::new(iri(s), Term::iri(vocab::RDF_TYPE).unwrap(), iri(class)).unwrap()
    }

    fn source() -> Dataset {
        Dataset::load(vec![
            typed("a1", "Country"),
            t("a1", "name", lit("Alpha")),
            typed("a2", "Country"),
            t("a2", "name", lit("Beta")),
            typed("a3", "Country"),
            t("a3", "name", lit("Gamma")),
        ])
    }

    fn target() -> Dataset {
        let mut triples = Vec::new();
        for (name, kind) in [("Alpha", "x"), ("Beta", "y"), ("Gamma", "z")] {
            let country = format!("{name}_country");
            triples.push(t(&country, "label", lit(name)));
            triples.push(t(&country, "kind", iri("Country")));
            triples.push(t(&country, "capital", lit("yes")));
            let river = format!("{name}_river");
            triples.push(t(&river, "label", lit(name)));
            triples.push(t(&river, "kind", iri(&format!("River_{kind}"))));
        }
        Dataset::load(triples)
    }

    fn config() -> PipelineConfig {
        PipelineConfig::new(iri("Country"))
    }

    #[test]
    fn links_the_shared_class() {
        let out = run(&source(), &target(), &config()).unwrap();
        let pairs: Vec<(String, String)> =
            out.links.iter().map(|l| (l.source.key().to_owned(), l.target.key().to_owned())).collect();
        assert_eq!(
            pairs,
            vec![
                ("http://ex.org/a1".into(), "http://ex.org/Alpha_country".into()),
                ("http://ex.org/a2".into(), "http://ex.org/Beta_country".into()),
                ("http://ex.org/a3".into(), "http://ex.org/Gamma_country".into()),
            ]
        );
        assert_eq!(out.stats.instances, 3);
        assert_eq!(out.stats.nonempty_sets, 3);
    }

    #[test]
    fn no_instances() {
        let mut cfg = config();
        cfg.class_of_interest = iri("Planet");
        assert!(matches!(run(&source(), &target(), &cfg), Err(PipelineError::NoInstances(_))));
    }

    #[test]
    fn mu_below_two_rejected() {
        let mut cfg = config();
        cfg.mu = 1;
        assert!(matches!(run(&source(), &target(), &cfg), Err(PipelineError::InvalidConfig(_))));
    }

    #[test]
    fn oversized_mu_equals_instance_count() {
        let mut big = config();
        big.mu = 1000;
        let mut exact = config();
        exact.mu = 3;
        let a = run(&source(), &target(), &big).unwrap().links;
        let b = run(&source(), &target(), &exact).unwrap().links;
        assert_eq!(a, b);
    }

    #[test]
    fn targets_come_from_candidate_sets() {
        let mut cfg = config();
        cfg.policy = SelectionPolicy::TopK(5);
        cfg.mu = 2;
        let out = run(&source(), &target(), &cfg).unwrap();
        for l in &out.links {
            let set = out.sets.iter().find(|s| s.source == l.source).unwrap();
            assert!(set.members.contains(&l.target));
        }
    }

    #[test]
    fn tsv_and_ntriples_layout() {
        let links = vec![
            AlignmentLink { source: iri("b"), target: iri("y"), delta: 1.0, urds: 2.5 },
            AlignmentLink { source: iri("a"), target: iri("x"), delta: 0.5, urds: 1.0 },
            AlignmentLink { source: iri("a"), target: iri("z"), delta: 1.0, urds: 2.0 },
        ];
        let mut sorted = links.clone();
        sort_links(&mut sorted);
        assert_eq!(
            links_tsv(&sorted),
            "http://ex.org/a\thttp://ex.org/z\t1.000000\t2.000000\n\
             http://ex.org/a\thttp://ex.org/x\t0.500000\t1.000000\n\
             http://ex.org/b\thttp://ex.org/y\t1.000000\t2.500000\n"
        );
        assert_eq!(
            links_ntriples(&sorted[..1]),
            "<http://ex.org/a> <http://www.w3.org/2002/07/owl#sameAs> <http://ex.org/z> .\n"
        );
    }

    #[test]
    fn empty_links_write_empty_files() {
        let dir = tempfile::tempdir().unwrap();
        emit_links(&[], dir.path()).unwrap();
        assert_eq!(fs::read_to_string(dir.path().join(LINKS_NT)).unwrap(), "");
        assert_eq!(fs::read_to_string(dir.path().join(LINKS_TSV)).unwrap(), "");
    }

    #[test]
    fn pivot_mode_parses() {
        assert_eq!("fifo".parse::<PivotMode>().unwrap(), PivotMode::Fifo);
        assert_eq!("off".parse::<PivotMode>().unwrap(), PivotMode::Off);
        assert!("all".parse::<PivotMode>().is_err());
    }
}
