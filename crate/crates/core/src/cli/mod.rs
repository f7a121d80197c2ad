//! `modqm` experiment runner. Each subcommand reads a flat key/value config
//! (INI-like text or a flat JSON object), applies `--set` overrides, writes
//! CSV/JSON into the output directory and exits with
//! 0 (all tolerances pass), 1 (a tolerance failed) or 2 (invalid input).

mod commands;
mod config;

pub use config::Params;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::error::{Error, Result};
use crate::io::to_json_string;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "modqm", version, about = "Modular-momentum and weak-measurement experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Config file (key = value lines, or a flat JSON object).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: $MODQM_OUT, else the current directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores; 1 gives bit-stable references).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Override a config key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Two-packet interference: densities at 0 and T, fringe spacing and phase.
    Interfere,
    /// Modular-momentum harmonics, folded distribution, nonlocal dynamics.
    Modular,
    /// Monte Carlo weak measurements of the two-time density.
    WeakEnsemble,
    /// Deterministic-operator sets and the σ-trio algebra.
    Detops,
    /// One-shot weak value from serialized states (`pre`, `post` CSV paths).
    WeakValue,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Interfere => "interfere",
            Command::Modular => "modular",
            Command::WeakEnsemble => "weak-ensemble",
            Command::Detops => "detops",
            Command::WeakValue => "weak-value",
        }
    }
}

fn resolve_params(cli: &Cli) -> Result<Params> {
    let mut params = match &cli.config {
        Some(path) => Params::from_file(path)?,
        None => Params::default(),
    };
    for s in &cli.set {
        params.set(s)?;
    }
    if let Some(seed) = cli.seed {
        params.insert("seed", seed);
    }
    Ok(params)
}

fn execute(cli: &Cli) -> Result<commands::Outcome> {
    let params = resolve_params(cli)?;
    let out = cli
        .out
        .clone()
        .or_else(|| std::env::var_os("MODQM_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Interfere => commands::interfere(params, &out),
        Command::Modular => commands::modular(params, &out),
        Command::WeakEnsemble => commands::weak_ensemble(params, &out),
        Command::Detops => commands::detops(params, &out),
        Command::WeakValue => commands::weak_value_cmd(params, &out),
    })
}

/// Runs a parsed command line and returns the process exit code.
pub fn run_cli(cli: &Cli) -> i32 {
    let name = cli.command.name();
    match execute(cli) {
        Ok(outcome) => {
            let files: Vec<String> = outcome.files.iter().map(|f| f.display().to_string()).collect();
            let summary = json!({"command": name, "passed": outcome.passed, "files": files});
            if let Ok(s) = to_json_string(&summary) {
                print!("{s}");
            }
            if outcome.passed {
                EXIT_PASS
            } else {
                EXIT_TOLERANCE
            }
        }
        Err(e) => {
            let record = json!({"command": name, "error": e.kind(), "message": e.to_string()});
            eprint!("{}", to_json_string(&record).unwrap_or_else(|_| format!("{e}\n")));
            EXIT_INVALID
        }
    }
}

/// Parses `args` (including the program name) and runs.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run_cli(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_PASS
            }
        }
    }
}
