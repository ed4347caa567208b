mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use chiralwg::Error;
use clap::{Parser, Subcommand};

/// Steady-state excitation localization in chirally coupled atom arrays.
#[derive(Parser)]
#[command(name = "chiralwg", version)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Sweep worker threads (0 = all cores). Falls back to CHIRALWG_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Reserved; every computation is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single steady-state solve: populations CSV and metrics sidecar.
    Steady,
    /// Two-axis parameter sweep: long-format grid CSV.
    Sweep,
    /// Time integration from the ground state: trajectory CSV.
    Dynamics,
    /// Closed-form tables for the central-defect scheme.
    Analytic,
    /// Runs the acceptance checks and writes validation.json.
    Validate {
        /// Only checks whose id contains this string.
        #[arg(long)]
        filter: Option<String>,
    },
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_SINGULAR: u8 = 3;
const EXIT_IO: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::SingularSystem { .. } => EXIT_SINGULAR,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}

fn threads(flag: Option<usize>) -> Result<usize, Error> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match std::env::var("CHIRALWG_THREADS") {
        Ok(v) => v.trim().parse().map_err(|_| Error::Validation {
            field: "CHIRALWG_THREADS".into(),
            reason: format!("not a thread count: {v:?}"),
        }),
        Err(_) => Ok(0),
    }
}

fn load_config(path: Option<&PathBuf>) -> Result<config::RunConfig, Error> {
    let path = path.ok_or_else(|| Error::Validation {
        field: "--config".into(),
        reason: "this subcommand needs a configuration file".into(),
    })?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    config::parse_config(&text)
}

fn run(cli: &Cli) -> Result<bool, Error> {
    if let Command::Validate { filter } = &cli.command {
        return commands::cmd_validate(&cli.out, filter.as_deref());
    }
    let cfg = load_config(cli.config.as_ref())?;
    match cli.command {
        Command::Steady => commands::cmd_steady(&cfg, &cli.out)?,
        Command::Sweep => commands::cmd_sweep(&cfg, &cli.out, threads(cli.threads)?)?,
        Command::Dynamics => commands::cmd_dynamics(&cfg, &cli.out)?,
        Command::Analytic => commands::cmd_analytic(&cfg, &cli.out)?,
        Command::Validate { .. } => unreachable!(),
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.seed.is_some() {
        log::debug!("--seed is accepted but unused");
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
