//! Batch front end: configuration, commands, manifests and the verification suite.

mod commands;
mod config;
pub mod suite;

pub use commands::Sink;
pub use config::{default_points, parse_config, parse_config_str, DensitySpec, GridSpec, RunConfig, DEFAULT_OUT, DEFAULT_SEED};

use crate::error::{Error, Result};
use clap::ValueEnum;
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Norm,
    Potential,
    Derivative,
    Maximal,
    Weights,
    Kernels,
    Invert,
    Hardy,
    ReportAll,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Norm => "norm",
            Command::Potential => "potential",
            Command::Derivative => "derivative",
            Command::Maximal => "maximal",
            Command::Weights => "weights",
            Command::Kernels => "kernels",
            Command::Invert => "invert",
            Command::Hardy => "hardy",
            Command::ReportAll => "report-all",
        }
    }
}

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    NumericFailure = 1,
    Usage = 2,
    Config = 3,
    Runtime = 4,
}

/// Exit status for an error raised while running.
pub fn exit_for(e: &Error) -> Exit {
    match e {
        Error::Parse(_) | Error::Validation(_) => Exit::Config,
        _ => Exit::Runtime,
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'static str,
    config: &'a RunConfig,
    seed: u64,
    complete: bool,
    artifacts: &'a [String],
    error: Option<String>,
}

/// Command-line overrides applied on top of the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

/// Outcome of [`run`]: the exit status, the output directory (when one was
/// resolved) and the error message, if any.
#[derive(Debug)]
pub struct RunOutcome {
    pub exit: Exit,
    pub out: Option<PathBuf>,
    pub error: Option<String>,
}

/// Parses `config_path`, runs `command` and writes its artifacts together with
/// `MANIFEST.json`. Errors are returned in the outcome, never raised.
pub fn run(command: Command, config_path: &Path, overrides: &Overrides) -> RunOutcome {
    let cfg = match parse_config(config_path).and_then(|c| c.with_overrides(overrides.seed, overrides.out.clone())) {
        Ok(c) => c,
        Err(e) => return RunOutcome { exit: exit_for(&e), out: overrides.out.clone(), error: Some(e.to_string()) },
    };
    run_config(command, &cfg, overrides.workers)
}

/// As [`run`] for an already resolved configuration.
pub fn run_config(command: Command, cfg: &RunConfig, workers: Option<usize>) -> RunOutcome {
    let out = cfg.out.clone();
    let mut sink = match Sink::new(&out) {
        Ok(s) => s,
        Err(e) => return RunOutcome { exit: Exit::Runtime, out: Some(out), error: Some(e.to_string()) },
    };
    let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let result = suite::with_workers(workers, || dispatch(command, cfg, &mut sink)).and_then(|r| r);
    let (exit, error) = match &result {
        Ok(true) => (Exit::Ok, None),
        Ok(false) => (Exit::NumericFailure, None),
        Err(e) => (exit_for(e), Some(e.to_string())),
    };
    let mut artifacts = sink.written.clone();
    artifacts.push("MANIFEST.json".into());
    let manifest = Manifest {
        command: command.name(),
        config: cfg,
        seed: cfg.seed,
        complete: result.is_ok(),
        artifacts: &artifacts,
        error: error.clone(),
    };
    if let Err(e) = sink.json("MANIFEST.json", &manifest) {
        return RunOutcome { exit: Exit::Runtime, out: Some(out), error: Some(e.to_string()) };
    }
    RunOutcome { exit, out: Some(out), error }
}

fn dispatch(command: Command, cfg: &RunConfig, sink: &mut Sink) -> Result<bool> {
    match command {
        Command::Norm => commands::norm(cfg, sink),
        Command::Potential => commands::potential(cfg, sink),
        Command::Derivative => commands::derivative(cfg, sink),
        Command::Maximal => commands::maximal_cmd(cfg, sink),
        Command::Weights => commands::weights(cfg, sink),
        Command::Kernels => commands::kernels(cfg, sink),
        Command::Invert => commands::invert(cfg, sink),
        Command::Hardy => commands::hardy(cfg, sink),
        Command::ReportAll => commands::report_all(cfg, sink),
    }
}
