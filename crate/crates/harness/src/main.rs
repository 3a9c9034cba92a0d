//! `snls`: command-line front end of the experiment harness.
//!
//! Each subcommand runs one experiment kind from a TOML configuration
//! file into a fresh output directory. Exit codes: `0` success, `2`
//! configuration/validation failure (every offending key is reported),
//! `3` numerical abort (blow-up or exhausted adaptive search).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use snls_harness::config::{parse_config, ExperimentKind};
use snls_harness::run::{run, HarnessError};

const EXIT_INVALID: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "snls",
    version,
    about = "Experiment harness for the quintic stochastic NLS laboratory",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the equation and record the mass/energy ledger.
    Simulate(RunArgs),
    /// Monte Carlo moments of the stochastic convolution.
    NoiseStats(RunArgs),
    /// Randomized audits of the multilinear estimates.
    VerifyEstimates(RunArgs),
    /// Norm battery of a free solution from sampled data.
    Norms(RunArgs),
    /// Adaptive interval partition from a sampled noise path.
    Windows(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the TOML experiment configuration.
    #[arg(long, short = 'c')]
    config: PathBuf,
    /// Override the master seed from the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Override (or supply) the output directory.
    #[arg(long, short = 'o')]
    output_dir: Option<PathBuf>,
}

fn report_problems(problems: &[String]) {
    for p in problems {
        eprintln!("error: {p}");
    }
}

fn execute(kind: ExperimentKind, args: &RunArgs) -> ExitCode {
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read config {}: {e}", args.config.display());
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let mut config = match parse_config(&text) {
        Ok(c) => c,
        Err(problems) => {
            report_problems(&problems);
            return ExitCode::from(EXIT_INVALID);
        }
    };
    if config.kind != kind {
        eprintln!(
            "error: subcommand `{kind}` does not match config kind `{}`",
            config.kind
        );
        return ExitCode::from(EXIT_INVALID);
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let output_dir = match args
        .output_dir
        .clone()
        .or_else(|| config.output_dir.clone())
    {
        Some(dir) => dir,
        None => {
            eprintln!(
                "error: no output directory: set `output-dir` in the config or pass --output-dir"
            );
            return ExitCode::from(EXIT_INVALID);
        }
    };
    match run(&config, &output_dir) {
        Ok(manifest) => {
            println!(
                "run complete: kind {} seed {} -> {} ({} outputs, config {})",
                manifest.kind,
                manifest.seed,
                output_dir.display(),
                manifest.outputs.len(),
                &manifest.config_sha256[..12]
            );
            ExitCode::SUCCESS
        }
        Err(HarnessError::Invalid(problems)) => {
            report_problems(&problems);
            ExitCode::from(EXIT_INVALID)
        }
        Err(HarnessError::Numerical(msg)) => {
            eprintln!("numerical abort: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Simulate(a) => (ExperimentKind::Simulate, a),
        Command::NoiseStats(a) => (ExperimentKind::NoiseStats, a),
        Command::VerifyEstimates(a) => (ExperimentKind::VerifyEstimates, a),
        Command::Norms(a) => (ExperimentKind::Norms, a),
        Command::Windows(a) => (ExperimentKind::Windows, a),
    };
    execute(kind, args)
}
