//! Config-driven experiment runner: builds model spaces and sets, runs
//! regularity certifiers and alternating-projection experiments, and writes
//! CSV traces, JSON reports, and a markdown summary.

mod config;
mod error;
mod plan;
mod presets;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use error::CliError;

/// Default output directory when neither --out nor the config names one.
const OUT_ENV: &str = "CATPROJ_OUT";

#[derive(Parser)]
#[command(
    name = "catproj",
    about = "Alternating projections and regularity certification in constant-curvature spaces",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute the requests of a TOML experiment config.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config and CATPROJ_OUT).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Execute a built-in preset experiment.
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Base seed for all sampled checks of the preset.
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// List the built-in presets.
    ListPresets,
}

fn default_out() -> PathBuf {
    std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Run { config, out } => {
            let text = std::fs::read_to_string(&config).map_err(|e| {
                CliError::Validation(format!("cannot read {}: {e}", config.display()))
            })?;
            let parsed = config::parse(&text)?;
            let plan = config::into_plan(&parsed)?;
            let out_dir = out
                .or_else(|| parsed.output.dir.as_ref().map(PathBuf::from))
                .unwrap_or_else(default_out);
            finish(plan::run_experiment(&plan, &out_dir)?)
        }
        Cmd::Preset { name, out, seed } => {
            let plan = presets::build(&name, seed)?;
            let out_dir = out.unwrap_or_else(default_out);
            finish(plan::run_experiment(&plan, &out_dir)?)
        }
        Cmd::ListPresets => {
            for (name, blurb) in presets::list() {
                println!("{name}: {blurb}");
            }
            Ok(())
        }
    }
}

fn finish(outcome: plan::Outcome) -> Result<(), CliError> {
    print!("{}", outcome.summary);
    if outcome.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(format!(
            "{} request(s) failed:\n  {}",
            outcome.failures.len(),
            outcome.failures.join("\n  ")
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
