//! `boolres` — run reservoir experiments from a config file.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use boolres_cli::{run_experiment, CliError, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "boolres",
    version,
    about = "Simulate and analyze a single-gate Boolean reservoir"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration file (TOML); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory override.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker-thread override; 0 keeps the machine default.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate each input word once and dump the waveforms.
    Simulate(CommonArgs),
    /// Estimate the consistency window from repeated trials.
    Consistency(CommonArgs),
    /// Measure window, rank measures, and D for one cell.
    Dimensionality(CommonArgs),
    /// Measure effective dimensionality over the (N1, N2) grid.
    Sweep(CommonArgs),
    /// Train the per-start-time classifier set and persist it.
    Train(CommonArgs),
    /// Train, evaluate on fresh runs, and emit the error curve.
    Classify(CommonArgs),
}

impl Command {
    fn split(&self) -> (Experiment, &CommonArgs) {
        match self {
            Command::Simulate(args) => (Experiment::Transients, args),
            Command::Consistency(args) => (Experiment::Consistency, args),
            Command::Dimensionality(args) => (Experiment::Dimensionality, args),
            Command::Sweep(args) => (Experiment::Sweep, args),
            Command::Train(args) => (Experiment::Train, args),
            Command::Classify(args) => (Experiment::Classify, args),
        }
    }
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    let (experiment, args) = cli.command.split();

    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.out = Some(out.clone());
    }
    if let Some(workers) = args.workers {
        config.workers = workers;
    }
    if config.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build_global()
            .map_err(|e| CliError::Resource(format!("cannot size worker pool: {e}")))?;
    }

    let out_dir = config
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(experiment.name()));
    let artifacts = run_experiment(&config, experiment, &out_dir)?;
    println!("{}", artifacts.summary);
    for file in &artifacts.files {
        println!("  wrote {}", file.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("boolres: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
