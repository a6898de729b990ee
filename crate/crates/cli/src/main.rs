//! `coorbit transform|norm|diagnose --config <path> --out <dir> [--benchmark <name>]`
//!
//! Exit codes: 0 on success, 2 for configuration errors (unreadable or
//! malformed config, unknown keys or names, invalid grids), 3 when a
//! numerical precondition fails. Errors are printed to stderr as
//! `{"error": {"code", "kind", "message", "key"}}`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use coorbit::config::{run_diagnose, run_norm, run_transform, RunConfig};
use coorbit::{benchmarks, ErrorClass};

#[derive(Parser)]
#[command(name = "coorbit", version, about = "Coefficient transforms, mixed norms and tightness diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one coefficient CSV per family member.
    Transform(Common),
    /// Write the norm table `norms.json`.
    Norm(Common),
    /// Write `report.json` and `profile.csv`.
    Diagnose(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, required_unless_present = "benchmark")]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Use a built-in benchmark instead of (or in place of) the config.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(benchmarks::NAMES))]
    benchmark: Option<String>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{message}")]
    Parse { key: String, message: String },
    #[error(transparent)]
    Core(#[from] coorbit::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.class() == ErrorClass::Numeric => 3,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Read { .. } => "config_read",
            CliError::Parse { .. } => "config_parse",
            CliError::Core(e) => e.kind(),
        }
    }

    fn key(&self) -> Option<String> {
        match self {
            CliError::Read { .. } => Some("config".into()),
            CliError::Parse { key, .. } => Some(key.clone()),
            CliError::Core(e) => e.key().map(str::to_owned),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        json!({
            "error": {
                "code": self.code(),
                "kind": self.kind(),
                "message": self.to_string(),
                "key": self.key(),
            }
        })
    }
}

fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let mut cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        CliError::Parse {
            message: format!("{key}: {}", e.inner()),
            key,
        }
    })?;
    cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    Ok(cfg)
}

fn config(args: &Common) -> Result<RunConfig, CliError> {
    match (&args.benchmark, &args.config) {
        (Some(name), _) => Ok(benchmarks::by_name(name)?),
        (None, Some(path)) => load(path),
        (None, None) => unreachable!("clap requires --config or --benchmark"),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Transform(args) => {
            run_transform(&config(&args)?, &args.out)?;
        }
        Command::Norm(args) => {
            run_norm(&config(&args)?, &args.out)?;
        }
        Command::Diagnose(args) => {
            run_diagnose(&config(&args)?, &args.out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.code())
        }
    }
}
