//! Command-line front end: reads a JSON configuration, runs one computation and
//! writes a JSON report.
//!
//! Exit codes: 0 success, 1 I/O error, 2 invalid configuration, 3 hypothesis
//! violated, 4 numerical failure, 5 verification mismatch.

mod commands;
mod dto;
mod error;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use commands::{Command, Outcome, Overrides};
use error::CliError;

const VERIFY_TOL: f64 = 1e-12;

#[derive(Parser)]
#[command(name = "pcinterp", version, about = "Optimal and minimax interpolation of periodically correlated sequences")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Mean-square optimal estimate of a linear functional of missing values.
    Interpolate(RunArgs),
    /// Least favorable density and minimax estimate for the class D0.
    MinimaxD0(RunArgs),
    /// Least favorable density and minimax estimate for the class DG.
    MinimaxDg(RunArgs),
    /// Monte Carlo check of the interpolation error.
    Simulate(RunArgs),
    /// Recompute a report and compare the recorded error values.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Report destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Quadrature grid size (power of two). Falls back to the config, then $PCINTERP_GRID, then 4096.
    #[arg(long)]
    grid: Option<usize>,
    /// RNG seed for `simulate`, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the filter taps as CSV (lag,component,re,im).
    #[arg(long)]
    emit_filter: Option<PathBuf>,
    /// Write per-trial squared errors of `simulate` as CSV.
    #[arg(long)]
    errors_csv: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Report produced by one of the other commands.
    #[arg(long)]
    config: PathBuf,
    /// Verification report destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::io(path.display().to_string(), e))
}

fn write(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p.display().to_string(), e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn envelope(command: &str, raw: &[u8], config: Value, settings: Value, result: Value) -> Value {
    json!({
        "tool": "pcinterp",
        "version": env!("CARGO_PKG_VERSION"),
        "schema_version": report::SCHEMA_VERSION,
        "command": command,
        "generated_at": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        "config_sha256": hex(&Sha256::digest(raw)),
        "settings": settings,
        "config": config,
        "result": result,
    })
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn run_command(command: Command, args: &RunArgs) -> Result<(), CliError> {
    let raw = read(&args.config)?;
    let config: Value = serde_json::from_slice(&raw)?;
    let Outcome { result, settings, filter, errors } =
        commands::run(command, &config, Overrides { grid: args.grid, seed: args.seed })?;
    let doc = envelope(command.name(), &raw, config, settings.to_json(), result);
    if let Some(path) = &args.emit_filter {
        write(Some(path), &report::filter_csv(&filter))?;
    }
    if let Some(path) = &args.errors_csv {
        let errors = errors.ok_or_else(|| CliError::Schema("--errors-csv applies to `simulate` only".into()))?;
        write(Some(path), &report::errors_csv(&errors))?;
    }
    write(args.out.as_deref(), &render(&doc))
}

fn recorded(result: &Value, key: &str) -> Result<f64, CliError> {
    report::parse_num(&result[key]).ok_or_else(|| CliError::Schema(format!("report has no numeric result.{key}")))
}

fn run_verify(args: &VerifyArgs) -> Result<(), CliError> {
    let raw = read(&args.config)?;
    let doc: Value = serde_json::from_slice(&raw)?;
    let name = doc["command"].as_str().ok_or_else(|| CliError::Schema("report has no command".into()))?;
    let command = Command::from_name(name).ok_or_else(|| CliError::Schema(format!("unknown command {name}")))?;
    let settings = &doc["settings"];
    let overrides = Overrides {
        grid: settings["grid"].as_u64().map(|g| g as usize),
        seed: settings["seed"].as_u64(),
    };
    let fresh = commands::run(command, &doc["config"], overrides)?;

    let mut keys = vec!["delta"];
    if command == Command::Simulate {
        keys.push("mean");
    }
    let mut checks = Vec::new();
    let mut failed = Vec::new();
    for key in keys {
        let old = recorded(&doc["result"], key)?;
        let new = recorded(&fresh.result, key)?;
        let diff = (old - new).abs();
        let pass = diff <= VERIFY_TOL * old.abs().max(1.0);
        if !pass {
            failed.push(format!("{key}: recorded {old:e}, recomputed {new:e}"));
        }
        checks.push(json!({
            "quantity": key,
            "recorded": report::num(old),
            "recomputed": report::num(new),
            "abs_diff": report::num(diff),
            "pass": pass,
        }));
    }
    let out = envelope(
        "verify",
        &raw,
        json!({ "command": name }),
        fresh.settings.to_json(),
        json!({ "tolerance": report::num(VERIFY_TOL), "checks": checks, "pass": failed.is_empty() }),
    );
    write(args.out.as_deref(), &render(&out))?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Mismatch(failed.join("; ")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Sub::Interpolate(a) => run_command(Command::Interpolate, a),
        Sub::MinimaxD0(a) => run_command(Command::MinimaxD0, a),
        Sub::MinimaxDg(a) => run_command(Command::MinimaxDg, a),
        Sub::Simulate(a) => run_command(Command::Simulate, a),
        Sub::Verify(a) => run_verify(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pcinterp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
