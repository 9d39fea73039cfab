//! Command-line front-end: train ordering models, synthesize galactic
//! treebanks, and compute corpus statistics and language-model selection.

mod commands;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use galactic::langmodel::DEFAULT_OOV_THRESHOLD;
use galactic::ordering::DEFAULT_LAMBDA;
use galactic::treebank::LabelMode;

const EXIT_CODES: &str = "\
Exit status:
  0  success
  1  unexpected internal error
  2  usage error (unknown flag, bad value)
  3  missing or unreadable file or directory
  4  malformed treebank, model or language-model file
  5  model/spec mismatch (missing model, wrong POS class, bad spec string)
  6  data failed validation (invariant violated, unfilterable input)

Environment:
  GALACTIC_JOBS  default for --jobs
  RUST_LOG       log filter (default: warn)";

#[derive(Parser, Debug)]
#[command(name = "galactic", version, about, after_help = EXIT_CODES)]
pub struct Cli {
    /// Label checking for tags and relations (default depends on the subcommand:
    /// strict for train, permute, batch and validate; lenient otherwise)
    #[arg(long, global = true, value_enum)]
    labels: Option<Labels>,

    /// Worker threads (default: number of CPUs)
    #[arg(long, global = true, env = "GALACTIC_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Labels {
    /// Unknown POS tags or relations are errors
    Strict,
    /// Unknown POS tags or relations pass through unchanged
    Lenient,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train the N and V ordering models of one treebank
    #[command(after_help = EXIT_CODES)]
    Train(TrainArgs),
    /// Synthesize one galactic language
    #[command(after_help = EXIT_CODES)]
    Permute(PermuteArgs),
    /// Synthesize every language listed in a spec file
    #[command(after_help = EXIT_CODES)]
    Batch(BatchArgs),
    /// Sentence and token counts, touched fraction T and freeness R
    #[command(after_help = EXIT_CODES)]
    Stats(StatsArgs),
    /// Train or load a trigram language model and report perplexity
    #[command(after_help = EXIT_CODES)]
    Perplexity(PerplexityArgs),
    /// Rank candidate source languages by likelihood of target tag sequences
    #[command(after_help = EXIT_CODES)]
    Select(SelectArgs),
    /// Check round-tripping, projectivity, alignment and manifest of a directory
    #[command(after_help = EXIT_CODES)]
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Treebank directory holding `<lang>-ud-train.conllu`
    #[arg(long)]
    treebank: PathBuf,
    /// Directory receiving `<lang>-N.model` and `<lang>-V.model`
    #[arg(long)]
    out: PathBuf,
    /// Language id (default: prefix of the training file name)
    #[arg(long)]
    lang: Option<String>,
    /// Optimizer iteration cap
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
    /// Gradient infinity-norm at which training stops
    #[arg(long, default_value_t = 1e-5)]
    tolerance: f64,
}

#[derive(Args, Debug)]
struct SynthesisArgs {
    /// Directory with one treebank directory per language id
    #[arg(long)]
    substrates: PathBuf,
    /// Directory of trained `<lang>-<N|V>.model` files
    #[arg(long)]
    models: PathBuf,
    /// Output root; each language gets its own subdirectory
    #[arg(long)]
    out: PathBuf,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Weight of the substrate model in the interpolation
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    lambda: f64,
}

#[derive(Args, Debug)]
struct PermuteArgs {
    /// Language spec, e.g. `en~fr@N~hi@V`
    #[arg(long)]
    spec: String,
    #[command(flatten)]
    synthesis: SynthesisArgs,
}

#[derive(Args, Debug)]
struct BatchArgs {
    /// File with one language spec per line (`#` comments and blank lines ignored)
    #[arg(long)]
    specs: PathBuf,
    #[command(flatten)]
    synthesis: SynthesisArgs,
}

#[derive(Args, Debug)]
struct StatsArgs {
    /// Treebank directory (repeatable; one row each)
    #[arg(long, required = true)]
    treebank: Vec<PathBuf>,
    /// Model directory; enables the R column
    #[arg(long)]
    models: Option<PathBuf>,
    /// Split to measure
    #[arg(long, default_value = "train")]
    split: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    /// POS tag sequences
    Tag,
    /// Word form sequences
    Word,
}

#[derive(Args, Debug)]
struct PerplexityArgs {
    /// CoNLL-U file (or treebank directory, train split) to train on
    #[arg(long, conflicts_with = "lm", required_unless_present = "lm")]
    train: Option<PathBuf>,
    /// Previously saved language model
    #[arg(long)]
    lm: Option<PathBuf>,
    /// CoNLL-U file (or treebank directory, dev split) to evaluate
    #[arg(long)]
    eval: Option<PathBuf>,
    /// Symbols modelled
    #[arg(long, value_enum, default_value_t = Mode::Tag)]
    mode: Mode,
    /// Word mode: training words seen fewer times become OOV (0 disables)
    #[arg(long, default_value_t = DEFAULT_OOV_THRESHOLD)]
    oov_threshold: u64,
    /// Write the trained language model here
    #[arg(long)]
    save: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SelectArgs {
    /// Candidate as `id=path`; path is a saved tag LM, a CoNLL-U file or a
    /// treebank directory (train split). Repeatable.
    #[arg(long = "candidate", required = true, value_name = "ID=PATH")]
    candidates: Vec<String>,
    /// Target CoNLL-U file or treebank directory
    #[arg(long)]
    target: PathBuf,
    /// Split read when the target is a directory
    #[arg(long, default_value = "train")]
    target_split: String,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Directory of CoNLL-U files (a synthesized language or a treebank)
    #[arg(long)]
    dir: PathBuf,
    /// Substrate treebank directory the language was synthesized from; enables
    /// token-multiset and alignment checks
    #[arg(long)]
    substrate: Option<PathBuf>,
}

impl Cli {
    fn label_mode(&self, default: LabelMode) -> LabelMode {
        match self.labels {
            Some(Labels::Strict) => LabelMode::Strict,
            Some(Labels::Lenient) => LabelMode::Lenient,
            None => default,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit::code(&err))
        }
    }
}
