use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

use disloc_cli::validate::parse_grids;
use disloc_cli::{exit, resolve_config, run, validate, RunError, Scenario};

#[derive(Parser)]
#[command(name = "disloc", version, about = "Phase-field screw dislocation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write time series and profiles.
    Run {
        /// constant, periodic or custom
        #[arg(long, default_value = "custom")]
        scenario: Scenario,
        /// Configuration document (TOML); defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory; overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check grid convergence of the elliptic solver and its boundary map.
    Validate {
        /// Comma-separated grid sizes, coarse to fine, e.g. 64x32,128x64,256x128
        #[arg(long, default_value = "64x32,128x64,256x128")]
        grids: String,
        #[arg(long, default_value_t = 2.0)]
        half_width: f64,
        #[arg(long, default_value_t = 2.0)]
        height: f64,
    },
}

/// An error paired with the exit code it maps to.
struct Failure(i32, anyhow::Error);

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure(exit::CONFIG, e.into())
}

fn run_command(scenario: Scenario, config: Option<PathBuf>, out: Option<PathBuf>) -> Result<i32, Failure> {
    let text = match &config {
        Some(path) => fs::read_to_string(path)
            .with_context(|| format!("cannot read configuration {}", path.display()))
            .map_err(config_err)?,
        None => String::new(),
    };
    let cfg = resolve_config(scenario, &text).map_err(config_err)?;
    let dir = out
        .or_else(|| cfg.output.dir.clone())
        .ok_or_else(|| config_err(anyhow!("no output directory: pass --out or set output.dir")))?;
    match run(&cfg, &dir) {
        Ok(output) => {
            let s = output.summary;
            println!(
                "{scenario}: {} snapshots written to {} ({} steps, {:.1}s setup, {:.1}s integration)",
                s.snapshots,
                s.dir.display(),
                s.stats.accepted,
                s.setup_time.as_secs_f64(),
                s.solve_time.as_secs_f64()
            );
            Ok(exit::SUCCESS)
        }
        Err(e @ RunError::Io { .. }) => Err(Failure(exit::CONFIG, e.into())),
        Err(e) => Err(Failure(exit::NUMERICAL, e.into())),
    }
}

fn validate_command(grids: &str, half_width: f64, height: f64) -> Result<i32, Failure> {
    let sizes = parse_grids(grids).map_err(|e| config_err(anyhow!(e)))?;
    if sizes.len() < 2 {
        return Err(config_err(anyhow!("--grids needs at least two sizes to form a ratio")));
    }
    let report = validate(half_width, height, &sizes).map_err(|e| match e {
        disloc_core::Error::Config(_) | disloc_core::Error::Argument(_) => config_err(e),
        other => Failure(exit::NUMERICAL, other.into()),
    })?;
    println!("{report}");
    Ok(if report.passed() { exit::SUCCESS } else { exit::ACCEPTANCE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, config, out } => run_command(scenario, config, out),
        Command::Validate {
            grids,
            half_width,
            height,
        } => validate_command(&grids, half_width, height),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(Failure(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code as u8)
        }
    }
}
