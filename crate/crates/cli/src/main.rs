//! Command-line front end: dataset generation, model training, imputation,
//! and the missing-data benchmark sweep.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error. Every command
//! accepts `--config <file>` with key=value lines (keys identical to the
//! long flag names; flags win) and writes a manifest in the same format, so
//! `--config <manifest>` reproduces a run.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "dga-impute",
    version,
    about = "Recover missing dissolved-gas values with an autoencoder plus GA/PSO search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled dataset (CSV + rule table + manifest)
    Gen(GenArgs),
    /// Train a model
    #[command(subcommand)]
    Train(TrainCommand),
    /// Fill missing cells of a CSV using a trained autoencoder
    Impute(ImputeArgs),
    /// Sweep k missing variables and report accuracy and runtime
    Bench(BenchArgs),
}

#[derive(Subcommand)]
enum TrainCommand {
    /// Train the reconstruction autoencoder
    Ae(TrainArgs),
    /// Train the acceptable/unusable classifier
    Clf(TrainArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Output directory (data.csv, rules.txt, manifest.txt)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of records
    #[arg(long)]
    n: Option<usize>,
    /// Master seed for record generation
    #[arg(long)]
    seed: Option<u64>,
    /// Number of shared latent factors, 1..=10
    #[arg(long)]
    latent_rank: Option<usize>,
    /// Seed of the fixed loading matrix
    #[arg(long)]
    loading_seed: Option<u64>,
    /// Log-space noise fraction, 0 <= noise < 1
    #[arg(long)]
    noise: Option<f64>,
    /// Comma-separated per-variable scales (ppm), 10 values
    #[arg(long)]
    scales: Option<String>,
    /// Rule table file (NAME=THRESHOLD lines); default: built-in rule
    #[arg(long)]
    rule: Option<PathBuf>,
    /// Mask this many variables per record (0 = complete data)
    #[arg(long)]
    missing_k: Option<usize>,
    /// Missingness mechanism: mcar or mar
    #[arg(long)]
    mechanism: Option<String>,
    /// Seed for the missingness masks
    #[arg(long)]
    mask_seed: Option<u64>,
    /// key=value config file; flags win on conflict
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Training data CSV
    #[arg(long)]
    data: Option<PathBuf>,
    /// Model output file
    #[arg(long)]
    out: Option<PathBuf>,
    /// Hidden layer width
    #[arg(long)]
    hidden: Option<usize>,
    /// Epoch budget
    #[arg(long)]
    epochs: Option<usize>,
    /// Trainer: scg or gd
    #[arg(long)]
    method: Option<String>,
    /// Learning rate (gd only)
    #[arg(long)]
    lr: Option<f64>,
    /// Momentum (gd only)
    #[arg(long)]
    momentum: Option<f64>,
    /// Early-stop target average error
    #[arg(long)]
    target_error: Option<f64>,
    /// Weight initialization seed
    #[arg(long)]
    seed: Option<u64>,
    /// key=value config file; flags win on conflict
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ImputeArgs {
    /// Trained autoencoder model file
    #[arg(long)]
    model: Option<PathBuf>,
    /// Input CSV (empty cells = missing)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Completed CSV output path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Search strategy: ga, pso, mean, or zero
    #[arg(long)]
    optimizer: Option<String>,
    /// Objective: full (all components) or known (known components only)
    #[arg(long)]
    mode: Option<String>,
    /// Known-error tolerance ending the recalculation loop
    #[arg(long)]
    tolerance: Option<f64>,
    /// Maximum optimizer runs per record
    #[arg(long)]
    restarts: Option<usize>,
    /// Master seed (per-record seeds are derived from it)
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results are identical for any value
    #[arg(long)]
    jobs: Option<usize>,
    /// Sidecar report CSV path (default: <out>.report.csv)
    #[arg(long)]
    report: Option<PathBuf>,
    /// Classify completed records with --clf and add them to the report
    #[arg(long)]
    classify: bool,
    /// Trained classifier model file (with --classify)
    #[arg(long)]
    clf: Option<PathBuf>,
    /// GA population size
    #[arg(long)]
    ga_pop: Option<usize>,
    /// GA generations
    #[arg(long)]
    ga_gens: Option<usize>,
    /// PSO swarm size
    #[arg(long)]
    pso_swarm: Option<usize>,
    /// PSO iterations
    #[arg(long)]
    pso_iters: Option<usize>,
    /// key=value config file; flags win on conflict
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated list of k values
    #[arg(long)]
    k: Option<String>,
    /// Trials per k
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated optimizers from {ga, pso, mean, zero}
    #[arg(long)]
    optimizers: Option<String>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results are identical for any value
    #[arg(long)]
    jobs: Option<usize>,
    /// Training records to generate
    #[arg(long)]
    n_train: Option<usize>,
    /// Held-out test records to generate
    #[arg(long)]
    n_test: Option<usize>,
    /// Train on this CSV instead of generated data
    #[arg(long)]
    train_data: Option<PathBuf>,
    /// Test on this labeled complete CSV instead of generated data
    #[arg(long)]
    test_data: Option<PathBuf>,
    /// Generator noise fraction
    #[arg(long)]
    noise: Option<f64>,
    /// Generator latent rank
    #[arg(long)]
    latent_rank: Option<usize>,
    /// Autoencoder hidden width
    #[arg(long)]
    ae_hidden: Option<usize>,
    /// Autoencoder epoch budget
    #[arg(long)]
    ae_epochs: Option<usize>,
    /// Classifier hidden width
    #[arg(long)]
    clf_hidden: Option<usize>,
    /// Classifier epoch budget
    #[arg(long)]
    clf_epochs: Option<usize>,
    /// Objective: full or known
    #[arg(long)]
    mode: Option<String>,
    /// Known-error tolerance
    #[arg(long)]
    tolerance: Option<f64>,
    /// Maximum optimizer runs per record
    #[arg(long)]
    restarts: Option<usize>,
    /// GA population size
    #[arg(long)]
    ga_pop: Option<usize>,
    /// GA generations
    #[arg(long)]
    ga_gens: Option<usize>,
    /// PSO swarm size
    #[arg(long)]
    pso_swarm: Option<usize>,
    /// PSO iterations
    #[arg(long)]
    pso_iters: Option<usize>,
    /// key=value config file; flags win on conflict
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => commands::gen(args),
        Command::Train(TrainCommand::Ae(args)) => commands::train(args, commands::TrainKind::Ae),
        Command::Train(TrainCommand::Clf(args)) => commands::train(args, commands::TrainKind::Clf),
        Command::Impute(args) => commands::impute(args),
        Command::Bench(args) => commands::bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
