use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;
use std::time::{Duration, Instant};

use rdflink_core::endpoint::{EndpointConfig, EndpointError, SparqlEndpoint};
use rdflink_core::eval::{load_reference, score, EvalError};
use rdflink_core::ntriples::{parse_ntriples, Mode};
use rdflink_core::pipeline::{emit_links, run, PipelineConfig, PipelineError, RunOutput, MANIFEST};
use rdflink_core::profile::{build_label_profile, build_target_profile, LabelProfile, ProfileError, ProfileOptions};
use rdflink_core::target::{TargetError, TargetStore};
use rdflink_core::{Dataset, Term};

use crate::{ClassesArgs, EvalArgs, LinkArgs, ProfileArgs};

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DATA: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub stage: &'static str,
    pub message: String,
}

fn config_error(stage: &'static str, message: impl ToString) -> Failure {
    Failure { code: EXIT_CONFIG, stage, message: message.to_string() }
}

fn data_error(stage: &'static str, message: impl ToString) -> Failure {
    Failure { code: EXIT_DATA, stage, message: message.to_string() }
}

fn parse_iri(stage: &'static str, value: &str) -> Result<Term, Failure> {
    let term = Term::iri(value).map_err(|e| config_error(stage, e))?;
    if !value.contains(':') {
        return Err(config_error(stage, format!("{value:?} is not an absolute IRI")));
    }
    Ok(term)
}

fn load_dataset(path: &Path, lenient: bool, stage: &'static str) -> Result<(Dataset, usize), Failure> {
    let file = File::open(path).map_err(|e| data_error(stage, format!("{}: {e}", path.display())))?;
    let mode = if lenient { Mode::Lenient } else { Mode::Strict };
    let doc = parse_ntriples(BufReader::new(file), mode)
        .map_err(|e| data_error(stage, format!("{}: {e}", path.display())))?;
    for skipped in &doc.skipped {
        log::warn!("{}:{}: skipped: {}", path.display(), skipped.line, skipped.reason);
    }
    let skipped = doc.skipped.len();
    let ds = Dataset::load(doc.triples);
    log::info!("{}: {} triples", path.display(), ds.len());
    Ok((ds, skipped))
}

fn is_remote(target: &str) -> bool {
    target.starts_with("http://") || target.starts_with("https://")
}

fn pipeline_failure(e: PipelineError) -> Failure {
    match e {
        PipelineError::InvalidConfig(_) => config_error("configuration", e),
        PipelineError::NoInstances(_) => data_error("selecting instances", e),
        PipelineError::Profile(_) => data_error("profiling source", e),
        PipelineError::Target(TargetError::Endpoint(EndpointError::InvalidConfig(_))) => config_error("endpoint", e),
        PipelineError::Target(_) => data_error("target", e),
    }
}

pub fn link(args: &LinkArgs) -> Result<(), Failure> {
    let total = Instant::now();
    let mut config = PipelineConfig::new(parse_iri("configuration", &args.class)?);
    config.mu = args.mu;
    config.jw_floor = args.jw_floor;
    config.max_label_len = args.max_label_len;
    config.policy = args.policy;
    config.pool_cap = args.pool_cap;
    config.sampling_seed = args.seed;
    config.profile_sample_cap = Some(args.sample_cap);
    config.pivots = args.pivots;
    config.index = args.index;
    config.validate().map_err(pipeline_failure)?;

    let started = Instant::now();
    let (source, source_skipped) = load_dataset(&args.source, args.lenient, "loading source")?;
    let local_target;
    let remote_target;
    let mut target_skipped = 0;
    let target: &dyn TargetStore = if is_remote(&args.target) {
        let mut ec = EndpointConfig::new(args.target.clone());
        ec.timeout = Duration::from_secs(args.timeout);
        ec.max_retries = args.retries;
        ec.page_size = args.page_size;
        ec.max_in_flight = args.max_in_flight;
        remote_target = SparqlEndpoint::new(ec).map_err(|e| config_error("endpoint", e))?;
        &remote_target
    } else {
        let (ds, skipped) = load_dataset(Path::new(&args.target), args.lenient, "loading target")?;
        target_skipped = skipped;
        local_target = ds;
        &local_target
    };
    let load_time = started.elapsed();

    let out = run(&source, target, &config).map_err(pipeline_failure)?;

    let started = Instant::now();
    emit_links(&out.links, &args.out)
        .map_err(|e| data_error("writing links", format!("{}: {e}", args.out.display())))?;
    let emit_time = started.elapsed();
    log::info!("{} links written to {}", out.links.len(), args.out.display());

    let manifest = manifest(args, &config, target, &source, source_skipped, target_skipped, &out, |m| {
        let ms = |d: Duration| d.as_secs_f64() * 1000.0;
        let _ = writeln!(m, "time_load_ms: {:.1}", ms(load_time));
        let _ = writeln!(m, "time_profile_ms: {:.1}", ms(out.stats.profile_time));
        let _ = writeln!(m, "time_candidates_ms: {:.1}", ms(out.stats.candidate_time));
        let _ = writeln!(m, "time_scoring_ms: {:.1}", ms(out.stats.scoring_time));
        let _ = writeln!(m, "time_emit_ms: {:.1}", ms(emit_time));
        let _ = writeln!(m, "time_total_ms: {:.1}", ms(total.elapsed()));
    });
    fs::write(args.out.join(MANIFEST), manifest).map_err(|e| data_error("writing manifest", e))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn manifest(
    args: &LinkArgs,
    config: &PipelineConfig,
    target: &dyn TargetStore,
    source: &Dataset,
    source_skipped: usize,
    target_skipped: usize,
    out: &RunOutput,
    timings: impl FnOnce(&mut String),
) -> String {
    let mut m = String::new();
    let names = |p: &LabelProfile| p.ranked.iter().map(|e| e.predicate.key().to_owned()).collect::<Vec<_>>().join(" ");
    let s = &out.stats;
    let _ = writeln!(m, "version: rdflink {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "source: {}", args.source.display());
    let _ = writeln!(m, "target: {}", args.target);
    let _ = writeln!(m, "target_location: {}", target.location());
    let _ = writeln!(m, "class: {}", config.class_of_interest.key());
    let _ = writeln!(m, "mu: {}", config.mu);
    let _ = writeln!(m, "policy: {}", config.policy);
    let _ = writeln!(m, "jw_floor: {}", config.jw_floor);
    let _ = writeln!(m, "max_label_len: {}", config.max_label_len);
    let _ = writeln!(m, "pool_cap: {}", config.pool_cap);
    let _ = writeln!(m, "seed: {}", config.sampling_seed);
    let _ = writeln!(m, "sample_cap: {}", args.sample_cap);
    let _ = writeln!(m, "pivots: {}", config.pivots);
    let _ = writeln!(m, "index: {}", config.index);
    let _ = writeln!(m, "lenient: {}", args.lenient);
    let _ = writeln!(m, "source_triples: {}", source.len());
    let _ = writeln!(m, "source_skipped_lines: {source_skipped}");
    let _ = writeln!(m, "target_skipped_lines: {target_skipped}");
    let _ = writeln!(m, "source_label_properties: {}", names(&out.source_profile));
    let _ = writeln!(m, "target_label_properties: {}", names(&out.target_profile));
    let _ = writeln!(m, "instances: {}", s.instances);
    let _ = writeln!(m, "chunks: {}", s.chunks);
    let _ = writeln!(m, "candidate_sets: {}", s.nonempty_sets);
    let _ = writeln!(m, "empty_candidate_sets: {}", s.empty_sets);
    let _ = writeln!(m, "candidates: {}", s.candidates);
    let _ = writeln!(m, "links: {}", s.links);
    timings(&mut m);
    m
}

fn eval_failure(stage: &'static str, e: EvalError) -> Failure {
    match e {
        EvalError::Io(_) => data_error(stage, e),
        _ => config_error(stage, e),
    }
}

pub fn eval(args: &EvalArgs) -> Result<(), Failure> {
    let found = load_reference(&args.found).map_err(|e| eval_failure("reading found links", e))?;
    let reference = load_reference(&args.reference).map_err(|e| eval_failure("reading reference", e))?;
    let metrics = score(&found, &reference);
    println!("{metrics}");
    let undefined = metrics.undefined();
    if !undefined.is_empty() {
        println!("note: {} undefined (zero denominator), reported as 0", undefined.join(", "));
    }
    if args.detailed {
        print!("{}", metrics.key_values());
    }
    Ok(())
}

pub fn profile(args: &ProfileArgs) -> Result<(), Failure> {
    let (ds, _) = load_dataset(&args.dataset, args.lenient, "loading dataset")?;
    let opts = ProfileOptions { max_len: args.max_label_len, sample_cap: None, seed: 0 };
    let result = match &args.class {
        Some(class) => {
            let class = parse_iri("configuration", class)?;
            let instances = ds.instances_of_class(&class);
            if instances.is_empty() {
                return Err(data_error("selecting instances", PipelineError::NoInstances(class.key().to_owned())));
            }
            build_label_profile(&ds, &instances, &opts)
        }
        None => build_target_profile(&ds, &opts),
    };
    let profile = match result {
        Ok(p) => p,
        Err(ProfileError::NoLabelProperty) => {
            println!("no qualifying predicates");
            return Ok(());
        }
        Err(e) => return Err(data_error("profiling", e)),
    };
    println!("predicate\tentropy\tvalues\tsubjects\tqualifies");
    for p in &profile.considered {
        let qualifies = if p.entropy >= profile.omega_threshold { "yes" } else { "no" };
        println!("{}\t{:.6}\t{}\t{}\t{qualifies}", p.predicate.key(), p.entropy, p.values, p.subjects);
    }
    println!("omega_threshold\t{:.6}", profile.omega_threshold);
    Ok(())
}

pub fn classes(args: &ClassesArgs) -> Result<(), Failure> {
    let (ds, _) = load_dataset(&args.dataset, args.lenient, "loading dataset")?;
    for (class, count) in ds.class_census() {
        println!("{}\t{count}", class.key());
    }
    Ok(())
}
