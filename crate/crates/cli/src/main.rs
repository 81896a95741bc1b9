use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use diskdyn_cli::commands::{self, Command};
use diskdyn_cli::config::ExperimentConfig;
use diskdyn_cli::CliError;

/// Action, winding and Calabi experiments on area-preserving disk maps.
#[derive(Debug, Parser)]
#[command(name = "diskdyn", version)]
struct Args {
    command: Command,
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Directory for `<command>-<seed>.csv/json`.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads (default: hardware parallelism).
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(args: &Args) -> Result<bool, CliError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Failed(e.to_string()))?;
    }
    commands::run(args.command, &cfg, &args.out)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("diskdyn {}: checks failed", args.command.name());
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("diskdyn {}: {e}", args.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
