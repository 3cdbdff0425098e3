use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use semrheo_core::document::SplitMode;
use semrheo_core::msd::AnalysisOptions;
use semrheo_core::Error;

mod commands;
mod output;

#[derive(Parser, Debug)]
#[command(name = "semrheo", version, about = "Similarity walks and MSD analysis of embedding trajectories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert a word2vec or GloVe text file to the canonical binary format.
    Convert(ConvertArgs),
    /// Free similarity walk from a start token.
    Walk(WalkArgs),
    /// Similarity walk tethered to guide tokens.
    Guided(GuidedArgs),
    /// MSD analysis of a document's sentence trajectory.
    Doc(DocArgs),
    /// Generate and analyze a synthetic trajectory.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TextFormat {
    Word2vec,
    Glove,
}

#[derive(Args, Debug)]
struct ConvertArgs {
    #[arg(long, value_enum)]
    format: TextFormat,
    /// Vector width, required for GloVe files (they carry no header).
    #[arg(long)]
    dims: Option<usize>,
    input: PathBuf,
    output: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct AnalysisArgs {
    /// Fit window as `LO,HI` delays.
    #[arg(long, value_parser = parse_window)]
    window: Option<(usize, usize)>,
    #[arg(long, default_value_t = 2)]
    max_breakpoints: usize,
    #[arg(long, default_value_t = 0.1)]
    tail_fraction: f64,
    /// Largest delay to evaluate (default: all).
    #[arg(long)]
    max_delay: Option<usize>,
}

impl AnalysisArgs {
    fn options(&self) -> AnalysisOptions {
        AnalysisOptions {
            window: self.window,
            max_breakpoints: self.max_breakpoints,
            tail_fraction: self.tail_fraction,
            max_delay: self.max_delay,
        }
    }
}

fn parse_window(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected LO,HI")?;
    let lo = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi = hi.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((lo, hi))
}

#[derive(Args, Debug, Clone)]
struct WalkArgs {
    /// Canonical embedding file.
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    start: String,
    #[arg(long, default_value_t = 10)]
    top_n: usize,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of walks, seeded `seed`, `seed + 1`, ...
    #[arg(long, default_value_t = 1)]
    ensemble: usize,
    /// Let the current token be offered as its own candidate.
    #[arg(long)]
    allow_self: bool,
    /// Walk over unit-length vectors.
    #[arg(long)]
    normalize: bool,
    /// Window length for absorption detection (default: min(50, steps)).
    #[arg(long)]
    absorption_window: Option<usize>,
    #[arg(long, default_value_t = 10)]
    distinct_threshold: usize,
    /// Leave the per-step candidate lists out of the walk JSON.
    #[arg(long)]
    no_candidates: bool,
    #[arg(long, env = "SEMRHEO_JOBS")]
    jobs: Option<usize>,
    #[command(flatten)]
    analysis: AnalysisArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GuidedArgs {
    #[command(flatten)]
    walk: WalkArgs,
    /// Guide token; repeat for several.
    #[arg(long = "guide", required = true)]
    guides: Vec<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SplitArg {
    Lines,
    NaivePunct,
}

impl From<SplitArg> for SplitMode {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Lines => SplitMode::Lines,
            SplitArg::NaivePunct => SplitMode::NaivePunct,
        }
    }
}

#[derive(Args, Debug)]
struct DocArgs {
    /// UTF-8 text to split into sentences.
    #[arg(long, requires = "embeddings", conflicts_with = "sentences")]
    text: Option<PathBuf>,
    /// Canonical word-vector file used to average each sentence.
    #[arg(long, requires = "text")]
    embeddings: Option<PathBuf>,
    /// Canonical file of precomputed sentence vectors keyed "0".."N-1".
    #[arg(long, required_unless_present = "text")]
    sentences: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "naive-punct")]
    split: SplitArg,
    #[arg(long)]
    normalize: bool,
    #[arg(long, env = "SEMRHEO_JOBS")]
    jobs: Option<usize>,
    #[command(flatten)]
    analysis: AnalysisArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Brownian,
    Ballistic,
    Ou,
    Levy,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long, default_value_t = 2)]
    dims: usize,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    step_std: f64,
    /// Comma-separated velocity (default: all ones).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    velocity: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.05)]
    theta: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1.5)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    x_min: f64,
    #[arg(long, env = "SEMRHEO_JOBS")]
    jobs: Option<usize>,
    #[command(flatten)]
    analysis: AnalysisArgs,
    #[arg(long)]
    out: PathBuf,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::UnknownToken(_) => 3,
        Error::EmptyPool
        | Error::InsufficientData(_)
        | Error::EmptyDocument(_)
        | Error::TooShort { .. }
        | Error::DegenerateTrajectory(_)
        | Error::DegenerateVector(_) => 4,
        _ => 2,
    }
}

fn init_threads(jobs: Option<usize>) {
    if let Some(n) = jobs.filter(|&n| n > 0) {
        // only fails if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Convert(a) => commands::convert(&a),
        Command::Walk(a) => {
            init_threads(a.jobs);
            commands::walk(&a, &[])
        }
        Command::Guided(a) => {
            init_threads(a.walk.jobs);
            commands::walk(&a.walk, &a.guides)
        }
        Command::Doc(a) => {
            init_threads(a.jobs);
            commands::doc(&a)
        }
        Command::Simulate(a) => {
            init_threads(a.jobs);
            commands::simulate(&a)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
