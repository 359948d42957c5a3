mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use w1kp::evaluation::TiePolicy;
use w1kp::{Error, MetricKind, Result};

use config::FileConfig;

/// Environment variable overriding the worker-thread count.
pub const THREADS_ENV: &str = "W1KP_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "w1kp",
    version,
    about = "Perceptual variability scores for image sets"
)]
struct Cli {
    /// TOML file supplying defaults for flags not given on the command line.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit an empirical distance CDF from random image pairs.
    FitCdf(FitCdfArgs),
    /// Score the variability of one image set.
    Score(ScoreArgs),
    /// Fit similarity-level cutoffs and cross-validate them.
    Calibrate(CalibrateArgs),
    /// Evaluate a metric against two-alternative forced-choice judgments.
    #[command(name = "eval-2afc")]
    Eval2afc(Eval2afcArgs),
    /// Score as a function of the number of images per prompt.
    Reusability(ReusabilityArgs),
    /// Classical multidimensional scaling of an image set.
    Mds(MdsArgs),
    /// Split prompts into main text and keyword tail.
    SplitPrompt(SplitPromptArgs),
    /// Spearman rank correlation between two CSV columns.
    Correlate(CorrelateArgs),
}

#[derive(Debug, Args)]
struct FitCdfArgs {
    /// Embedding file (W1KPEMB1 binary or CSV).
    #[arg(long)]
    embeddings: PathBuf,
    /// JSON manifest of id pairs to use instead of random sampling.
    #[arg(long)]
    pairs: Option<PathBuf>,
    #[arg(long)]
    metric: Option<MetricKind>,
    /// Number of distinct random pairs [default: 10000].
    #[arg(long)]
    pair_count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Provenance string stored in the artifact [default: the embeddings' own].
    #[arg(long)]
    provenance: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KernelArg {
    Mean,
    Kmax,
}

#[derive(Debug, Args)]
struct EstimatorArgs {
    /// Largest subset count enumerated exactly before sampling [default: 200000].
    #[arg(long)]
    exact_budget: Option<u64>,
    /// Monte-Carlo draws when enumeration is too large [default: 10000].
    #[arg(long)]
    mc_samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    cdf: PathBuf,
    /// Must match the CDF's metric when given.
    #[arg(long)]
    metric: Option<MetricKind>,
    #[arg(long, value_enum, default_value = "mean")]
    kernel: KernelArg,
    /// Subset size for the kmax kernel.
    #[arg(long)]
    k: Option<usize>,
    #[command(flatten)]
    estimator: EstimatorArgs,
    /// Cutoffs artifact; adds the similarity level to the output.
    #[arg(long)]
    cutoffs: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// CSV with `score,label` columns.
    #[arg(long, conflicts_with_all = ["judgments", "embeddings", "cdf"])]
    scores: Option<PathBuf>,
    /// Graded pair judgments (JSON lines); needs --embeddings and --cdf.
    #[arg(long, requires_all = ["embeddings", "cdf"])]
    judgments: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    cdf: Option<PathBuf>,
    #[arg(long)]
    metric: Option<MetricKind>,
    /// Cross-validation folds; 0 skips cross-validation [default: 5].
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Round each cutoff to a multiple of this step.
    #[arg(long)]
    round_to: Option<f64>,
    /// Where to write the fitted cutoffs artifact.
    #[arg(long)]
    out: PathBuf,
    /// Where to write the report [default: stdout].
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Eval2afcArgs {
    /// Triplet judgments (JSON lines).
    #[arg(long)]
    triplets: PathBuf,
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    cdf: PathBuf,
    #[arg(long)]
    metric: Option<MetricKind>,
    /// `half` or `strict` [default: half].
    #[arg(long)]
    tie_policy: Option<TiePolicy>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReusabilityArgs {
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    cdf: PathBuf,
    #[arg(long)]
    metric: Option<MetricKind>,
    /// Largest subset size on the curve [default: number of images].
    #[arg(long)]
    k_max: Option<usize>,
    #[command(flatten)]
    estimator: EstimatorArgs,
    /// Report the smallest k reaching this score on stderr.
    #[arg(long, conflicts_with = "cutoffs")]
    beta_high: Option<f64>,
    /// Take the reuse threshold from a cutoffs artifact.
    #[arg(long)]
    cutoffs: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MdsArgs {
    #[arg(long)]
    embeddings: PathBuf,
    /// Raw metric, or the CDF's metric check when --cdf is given [default: euclidean].
    #[arg(long)]
    metric: Option<MetricKind>,
    /// Use normalized instead of raw distances.
    #[arg(long)]
    cdf: Option<PathBuf>,
    /// Output dimensions [default: 2].
    #[arg(long)]
    dims: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SplitPromptArgs {
    /// A single prompt.
    #[arg(conflicts_with = "file", required_unless_present = "file")]
    text: Option<String>,
    /// One prompt per line; output is JSON lines.
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CorrelateArgs {
    /// CSV file with a header row.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    configure_threads()?;
    let config = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::FitCdf(a) => commands::fit_cdf(a, &config),
        Command::Score(a) => commands::score(a, &config),
        Command::Calibrate(a) => commands::calibrate(a, &config),
        Command::Eval2afc(a) => commands::eval_2afc(a, &config),
        Command::Reusability(a) => commands::reusability(a, &config),
        Command::Mds(a) => commands::mds(a, &config),
        Command::SplitPrompt(a) => commands::split_prompt(a),
        Command::Correlate(a) => commands::correlate(a),
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| {
            Error::validation(format!(
                "{THREADS_ENV} must be a positive integer, got {value:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::validation(format!("cannot configure thread pool: {e}")))
}
