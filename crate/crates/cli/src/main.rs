use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

use most_core::moments::{DEFAULT_REPLICATES, DEFAULT_SEED};

/// Outlier-aware differential expression: score datasets, run simulation
/// studies, estimate permutation FDR and build order-statistic moment tables.
#[derive(Parser, Debug)]
#[command(name = "most", version, about)]
struct Cli {
    /// Worker threads (0 = all cores). Outputs do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// More diagnostics on stderr (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score every gene of an expression matrix.
    Score(ScoreArgs),
    /// Simulate partially activated studies and compare statistics by ROC.
    Simulate(SimulateArgs),
    /// Permutation FDR versus number of genes called.
    Fdr(FdrArgs),
    /// Build (or load) the order-statistic moment table for a group size.
    Moments(MomentsArgs),
}

#[derive(Args, Debug, Clone)]
struct MomentOpts {
    /// Directory for cached moment tables; tables are built in memory when
    /// omitted.
    #[arg(long)]
    moments_cache: Option<PathBuf>,

    /// Monte-Carlo replicates for the moment table.
    #[arg(long, default_value_t = DEFAULT_REPLICATES)]
    replicates: u64,

    /// Seed of the moment table.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    moment_seed: u64,
}

#[derive(Args, Debug, Clone)]
struct InputOpts {
    /// Tab-separated expression matrix (genes in rows).
    #[arg(long)]
    input: PathBuf,

    /// Sidecar label file: `sample<TAB>0|1` per line (1 = cancer).
    #[arg(long, required_unless_present = "inline_labels")]
    labels: Option<PathBuf>,

    /// Read labels from the second row of the matrix instead.
    #[arg(long, conflicts_with = "labels")]
    inline_labels: bool,

    /// Scale each sample to the median of the sample medians.
    #[arg(long)]
    normalize: bool,

    /// Replace values by log2(max(value, floor)) after normalization.
    #[arg(long)]
    log2: bool,

    #[arg(long, default_value_t = 1.0)]
    floor: f64,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    #[command(flatten)]
    input: InputOpts,

    /// Comma-separated statistics out of T, COPA, OS, ORT, MOST.
    #[arg(long, default_value = "MOST,ORT,OS,COPA,T")]
    stats: String,

    /// Percentile of the cancer group used by COPA.
    #[arg(long, default_value_t = 90.0)]
    copa_r: f64,

    #[arg(long)]
    out: PathBuf,

    #[command(flatten)]
    moments: MomentOpts,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    m: usize,
    /// Activated cancer samples per DE gene.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Shift added to activated samples.
    #[arg(long, default_value_t = 2.0)]
    mu: f64,
    #[arg(long, default_value_t = 1000)]
    n_de: usize,
    #[arg(long, default_value_t = 1000)]
    n_null: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,

    #[arg(long, default_value = "MOST,ORT,OS,COPA,T")]
    stats: String,

    #[arg(long, default_value_t = 90.0)]
    copa_r: f64,

    /// File of `key=value ...` lines, one simulation cell per line; each
    /// line overrides the flag values above.
    #[arg(long)]
    grid: Option<PathBuf>,

    #[arg(long)]
    out_dir: PathBuf,

    /// Also write an SVG of the overlaid ROC curves per cell.
    #[arg(long)]
    svg: bool,

    #[command(flatten)]
    moments: MomentOpts,
}

#[derive(Args, Debug)]
struct FdrArgs {
    #[command(flatten)]
    input: InputOpts,

    #[arg(long, default_value = "MOST")]
    stat: String,

    #[arg(long, default_value_t = most_core::fdr::DEFAULT_PERMUTATIONS)]
    permutations: usize,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Proportion of true nulls applied to the false-call estimate.
    #[arg(long, default_value_t = 1.0)]
    pi0: f64,

    /// Summary of per-permutation false calls: mean or median.
    #[arg(long, default_value = "mean")]
    false_count: String,

    #[arg(long, default_value_t = 90.0)]
    copa_r: f64,

    /// FDR table CSV.
    #[arg(long)]
    out: PathBuf,

    /// `called,fdr` projection; defaults to `<out stem>.called.csv`.
    #[arg(long)]
    projection_out: Option<PathBuf>,

    /// Optional SVG plot of FDR against genes called.
    #[arg(long)]
    svg: Option<PathBuf>,

    #[command(flatten)]
    moments: MomentOpts,
}

#[derive(Args, Debug)]
struct MomentsArgs {
    /// Cancer group size.
    #[arg(long)]
    m: usize,

    #[arg(long, default_value_t = DEFAULT_REPLICATES)]
    replicates: u64,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,

    #[arg(long, default_value = "moments-cache")]
    cache_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| commands::run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.code)
        }
    }
}
