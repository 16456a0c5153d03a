//! `cadence` — design-stage Monte Carlo engine for Bayesian adaptive
//! two-arm trials that borrow from a historical study.
//!
//! Progress goes to stderr; the last line on stdout is a JSON status
//! object.  Exit codes: 0 success, 1 config error, 2 runtime failure,
//! 3 calibration failure.

mod config_file;
mod csv_out;
mod error;
mod parallel;
mod replay;
mod study;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::config_file::FileConfig;
use crate::error::CliError;
use crate::parallel::RayonExecutor;
use crate::replay::{replay, write_metadata, RunMetadata};
use crate::study::{run_calibrate_cmd, run_study_cmd, Progress};

#[derive(Parser)]
#[command(
    name = "cadence",
    version,
    about = "Design-stage Monte Carlo engine for Bayesian adaptive two-arm trials \
             with commensurate-prior borrowing from a historical study"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: calibration, operating characteristics, payoff optimization
    Study(RunArgs),
    /// Threshold calibration only
    Calibrate(RunArgs),
    /// Re-run a report from its metadata and byte-compare all tables
    Replay(ReplayArgs),
    /// Print the annotated reference configuration (TOML)
    DefaultConfig,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config path (omit for the built-in reference configuration)
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory for tables and metadata
    #[arg(short, long, default_value = "cadence-report")]
    output: PathBuf,
    /// Master seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: CADENCE_WORKERS, else all cores)
    #[arg(long)]
    workers: Option<usize>,
    /// Restrict payoff evaluation to one mode
    #[arg(long, value_parser = ["frequentist", "bayesian", "net_gain"])]
    mode: Option<String>,
    /// Reduced-scale preset: 1000 replications, 2000-iteration chains
    #[arg(long)]
    desk: bool,
    /// More progress detail on stderr (repeatable)
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Suppress progress output
    #[arg(short, long, conflicts_with = "verbose")]
    quiet: bool,
}

#[derive(Args)]
struct ReplayArgs {
    /// Report directory containing metadata.json
    report: PathBuf,
    /// Worker threads for the re-run (default: CADENCE_WORKERS, else all cores)
    #[arg(long)]
    workers: Option<usize>,
    /// More progress detail on stderr (repeatable)
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Suppress progress output
    #[arg(short, long, conflicts_with = "verbose")]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error ({}): {e}", e.kind());
            println!(
                "{}",
                serde_json::json!({ "status": "error", "kind": e.kind(), "message": e.to_string() })
            );
            ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(2))
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::DefaultConfig => {
            print!("{}", config_file::REFERENCE_TOML);
            Ok(ExitCode::SUCCESS)
        }
        Command::Study(args) => run_pipeline("study", args),
        Command::Calibrate(args) => run_pipeline("calibrate", args),
        Command::Replay(args) => {
            let progress = Progress::new(args.quiet, args.verbose);
            let workers = RayonExecutor::resolve_workers(args.workers)?;
            let verdict = replay(&args.report, workers, &progress)?;
            println!(
                "{}",
                serde_json::json!({
                    "status": "ok",
                    "command": "replay",
                    "verdict": verdict.verdict,
                    "version_match": verdict.version_match,
                    "recorded_version": verdict.recorded_version,
                    "current_version": verdict.current_version,
                    "compared": verdict.compared,
                })
            );
            if verdict.identical() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("replay diverged from the recorded report");
                Ok(ExitCode::from(2))
            }
        }
    }
}

fn run_pipeline(command: &str, args: RunArgs) -> Result<ExitCode, CliError> {
    let progress = Progress::new(args.quiet, args.verbose);

    let mut file_config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            FileConfig::from_toml(&text)?
        }
        None => FileConfig::reference(),
    };
    if args.desk {
        file_config.apply_desk_preset();
    }
    if let Some(seed) = args.seed {
        file_config.apply_seed(seed);
    }
    if let Some(mode) = &args.mode {
        file_config.apply_mode(mode);
    }
    let settings = file_config.resolve()?;

    let workers = RayonExecutor::resolve_workers(args.workers)?;
    let exec = RayonExecutor::new(workers)?;
    progress.stage(&format!(
        "{command}: seed {}, {} replications, {}-iteration chains, {} workers",
        settings.config.seed, settings.config.n_rep, settings.config.mcmc_iters, workers
    ));

    let started = Instant::now();
    let tables = match command {
        "study" => run_study_cmd(&exec, &settings, &args.output, &progress)?,
        _ => run_calibrate_cmd(&exec, &settings, &args.output, &progress)?,
    };
    let wall = started.elapsed().as_secs_f64();

    let meta = RunMetadata {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        seed: settings.config.seed,
        workers,
        desk_preset: args.desk,
        wall_time_seconds: wall,
        tables: tables.clone(),
        config_toml: file_config.to_toml(),
    };
    write_metadata(&args.output, &meta)?;
    progress.stage(&format!("done in {wall:.1}s: {} tables in {}", tables.len(), args.output.display()));

    println!(
        "{}",
        serde_json::json!({
            "status": "ok",
            "command": command,
            "output": args.output.display().to_string(),
            "tables": tables,
            "wall_time_seconds": wall,
            "seed": settings.config.seed,
            "workers": workers,
        })
    );
    Ok(ExitCode::SUCCESS)
}
