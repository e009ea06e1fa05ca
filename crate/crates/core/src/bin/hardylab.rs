use clap::Parser;
use hardylab::cli::{run, Command, Overrides};
use std::path::PathBuf;
use std::process::ExitCode;

/// Verification campaigns for variable-exponent Hardy-type inequalities.
#[derive(Debug, Parser)]
#[command(name = "hardylab", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed; overrides the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let overrides = Overrides { out: args.out, seed: args.seed, workers: args.workers.map(|w| w as usize) };
    let outcome = run(args.command, &args.config, &overrides);
    if let Some(msg) = &outcome.error {
        eprintln!("hardylab {}: {msg}", args.command.name());
    }
    if let Some(out) = &outcome.out {
        if outcome.error.is_none() {
            eprintln!("artifacts written to {}", out.display());
        }
    }
    ExitCode::from(outcome.exit as u8)
}
