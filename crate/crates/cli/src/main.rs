//! `rdflink`: link the instances of a class in one RDF dataset to another.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rdflink_core::pipeline::{PivotMode, DEFAULT_MU};
use rdflink_core::rds::SelectionPolicy;
use rdflink_core::similarity::SetIndex;

#[derive(Debug, Parser)]
#[command(name = "rdflink", version, about = "Unsupervised instance matching between RDF datasets")]
struct Cli {
    /// Cap on worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Link instances of a source class to target resources.
    Link(LinkArgs),
    /// Score a link set against a reference alignment.
    Eval(EvalArgs),
    /// Show the entropy profile of literal predicates.
    Profile(ProfileArgs),
    /// List rdf:type classes with their instance counts.
    Classes(ClassesArgs),
}

#[derive(Debug, Args)]
pub struct LinkArgs {
    /// Source dataset (N-Triples).
    #[arg(long)]
    pub source: PathBuf,
    /// Target dataset: an N-Triples file or an http(s) SPARQL endpoint URL.
    #[arg(long)]
    pub target: String,
    /// IRI of the class whose instances are linked.
    #[arg(long)]
    pub class: String,
    /// Chunk size (at least 2).
    #[arg(long, default_value_t = DEFAULT_MU)]
    pub mu: usize,
    /// delta-m, fixed:<x> or top-k:<k>.
    #[arg(long, default_value_t = SelectionPolicy::DeltaM)]
    pub policy: SelectionPolicy,
    /// Minimum Jaro-Winkler score for a candidate label.
    #[arg(long, default_value_t = 0.70)]
    pub jw_floor: f64,
    /// Output directory for links.nt, links.tsv and manifest.txt.
    #[arg(long)]
    pub out: PathBuf,
    /// Seed for profile sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Skip malformed input lines instead of failing.
    #[arg(long)]
    pub lenient: bool,
    /// Set index used to compare descriptions: setsim or jaccard.
    #[arg(long, default_value_t = SetIndex::SetSim)]
    pub index: SetIndex,
    /// Pivot retention: fifo, cumulative or off.
    #[arg(long, default_value_t = PivotMode::Fifo)]
    pub pivots: PivotMode,
    /// Literal values of at least this many characters disqualify a label property.
    #[arg(long, default_value_t = 200)]
    pub max_label_len: usize,
    /// Subjects kept per label search.
    #[arg(long, default_value_t = 500)]
    pub pool_cap: usize,
    /// Per-predicate sample size when profiling the target.
    #[arg(long, default_value_t = 100_000)]
    pub sample_cap: usize,
    /// Endpoint request timeout in seconds.
    #[arg(long, default_value_t = 60)]
    pub timeout: u64,
    /// Endpoint retries per request.
    #[arg(long, default_value_t = 3)]
    pub retries: u32,
    /// Endpoint rows per request.
    #[arg(long, default_value_t = 1000)]
    pub page_size: usize,
    /// Concurrent endpoint requests.
    #[arg(long, default_value_t = 4)]
    pub max_in_flight: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Produced links (links.tsv or links.nt).
    #[arg(long)]
    pub found: PathBuf,
    /// Reference alignment (TSV, N-Triples sameAs or Alignment XML).
    #[arg(long)]
    pub reference: PathBuf,
    /// Also print tp/fp/fn and metrics as key=value lines.
    #[arg(long)]
    pub detailed: bool,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Dataset (N-Triples).
    #[arg(long)]
    pub dataset: PathBuf,
    /// Restrict the profile to instances of this class.
    #[arg(long)]
    pub class: Option<String>,
    #[arg(long, default_value_t = 200)]
    pub max_label_len: usize,
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args)]
pub struct ClassesArgs {
    /// Dataset (N-Triples).
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub lenient: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error [configuration]: --threads must be at least 1");
            return ExitCode::from(commands::EXIT_CONFIG);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error [configuration]: {e}");
            return ExitCode::from(commands::EXIT_CONFIG);
        }
    }
    let result = match cli.command {
        Command::Link(args) => commands::link(&args),
        Command::Eval(args) => commands::eval(&args),
        Command::Profile(args) => commands::profile(&args),
        Command::Classes(args) => commands::classes(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {}", e.stage, e.message);
            ExitCode::from(e.code)
        }
    }
}
