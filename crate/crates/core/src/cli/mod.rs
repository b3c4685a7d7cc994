//! Config-driven experiment runner.
//!
//! `gibbslab <command> --config <path> [--out-dir <path>] [--workers N] [--seed S]`
//! writes one CSV per table plus `manifest-<command>.json` into the output
//! directory. Exit status: 0 success, 1 failed check, 2 config error,
//! 3 numeric or I/O failure.

pub mod commands;
pub mod config;
pub mod output;
pub mod selftest;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, ValueEnum};

use crate::error::{Error, Result};
use config::ExperimentConfig;
use output::RunManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Exponent,
    Pressure,
    Family,
    Finiteness,
    Schedule,
    Mixing,
    Patterson,
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Exponent => "exponent",
            Command::Pressure => "pressure",
            Command::Family => "family",
            Command::Finiteness => "finiteness",
            Command::Schedule => "schedule",
            Command::Mixing => "mixing",
            Command::Patterson => "patterson",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "gibbslab", version, about = "Orbit sums, transfer operators and Gibbs measures on hyperbolic surfaces")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `output.out_dir` from the config.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, env = "GIBBSLAB_WORKERS")]
    pub workers: Option<usize>,
    /// Overrides `numerics.seed` from the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// What a run produced.
#[derive(Debug)]
pub struct Report {
    pub exit_code: i32,
    pub manifest: Option<RunManifest>,
    pub failures: Vec<String>,
    pub error: Option<Error>,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}

/// Runs one command in-process. Worker count falls back to the number of
/// available cores.
pub fn run(args: &Args) -> Report {
    let fail = |e: Error| Report { exit_code: exit_code(&e), manifest: None, failures: vec![], error: Some(e) };
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => return fail(Error::Config(format!("cannot read {}: {e}", args.config.display()))),
    };
    let mut cfg = match ExperimentConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    if let Some(s) = args.seed {
        cfg.numerics.seed = s;
    }
    let workers = args.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return fail(Error::Config("workers must be positive".into()));
    }
    let out_dir = args.out_dir.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.out_dir));
    match execute(args.command, &cfg, &text, workers, &out_dir) {
        Ok((manifest, failures)) => Report {
            exit_code: if failures.is_empty() { EXIT_OK } else { EXIT_CHECK },
            manifest: Some(manifest),
            failures,
            error: None,
        },
        Err(e) => fail(e),
    }
}

fn execute(
    command: Command,
    cfg: &ExperimentConfig,
    text: &str,
    workers: usize,
    out_dir: &std::path::Path,
) -> Result<(RunManifest, Vec<String>)> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let start = Instant::now();
    let outcome = pool.install(|| dispatch(command, cfg))?;
    let wall_seconds = start.elapsed().as_secs_f64();
    std::fs::create_dir_all(out_dir)?;
    let mut outputs = Vec::new();
    for t in &outcome.tables {
        let path = t.write(out_dir)?;
        outputs.push(path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default());
    }
    let manifest = RunManifest {
        command: command.name().into(),
        config_sha256: output::sha256_hex(text),
        artifact_version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.numerics.seed,
        workers,
        wall_seconds,
        outputs,
    };
    manifest.write(out_dir)?;
    Ok((manifest, outcome.failures))
}

fn dispatch(command: Command, cfg: &ExperimentConfig) -> Result<commands::Outcome> {
    match command {
        Command::Exponent => commands::exponent(cfg),
        Command::Pressure => commands::pressure(cfg),
        Command::Family => commands::family(cfg),
        Command::Finiteness => commands::finiteness(cfg),
        Command::Schedule => commands::schedule(cfg),
        Command::Mixing => commands::mixing(cfg),
        Command::Patterson => commands::patterson(cfg),
        Command::Selftest => {
            let (table, failures) = selftest::run(cfg);
            Ok(commands::Outcome { tables: vec![table], failures })
        }
    }
}
