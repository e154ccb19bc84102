use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use combpulse::{compute, load, presets, CliError, Overrides, Scenario};
use rayon::prelude::*;

#[derive(Parser)]
#[command(
    name = "combpulse",
    version,
    about = "Pulse trains from filtered phase-modulated light"
)]
struct Cli {
    /// Replace the scenario's samples per modulation period.
    #[arg(long, global = true, value_name = "N")]
    samples_per_period: Option<usize>,
    /// Replace the scenario's number of modulation periods.
    #[arg(long, global = true, value_name = "N")]
    periods: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run {
        config: PathBuf,
        /// Directory for the trace and report (default: current directory).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Run a named preset, or all of them.
    Preset {
        #[arg(required_unless_present = "all_presets", conflicts_with = "all_presets")]
        name: Option<String>,
        #[arg(long)]
        all_presets: bool,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// List presets with a one-line summary each.
    List,
    /// Print a preset's scenario file.
    Config { name: String },
}

const THREADS_VAR: &str = "COMBPULSE_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::invalid(THREADS_VAR, format!("must be a positive integer, got `{value}`")))?;
    // fails only if a pool already exists, which cannot happen this early
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Writes a line to stdout; a closed pipe (e.g. `| head`) is not an error.
fn say(line: impl std::fmt::Display) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn preset(name: &str) -> Result<Scenario, CliError> {
    presets::find(name).ok_or_else(|| CliError::UnknownPreset(name.to_string()))
}

fn run_one(mut scenario: Scenario, overrides: Overrides, out: &std::path::Path) -> Result<String, CliError> {
    overrides.apply(&mut scenario);
    let outcome = compute(&scenario)?;
    let written = outcome.write(out)?;
    let files: Vec<String> = written.iter().map(|p| p.display().to_string()).collect();
    Ok(format!("{}\n  wrote {}", outcome.summary_line(), files.join(", ")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let overrides = Overrides {
        samples_per_period: cli.samples_per_period,
        periods: cli.periods,
    };
    let here = PathBuf::from(".");
    match cli.command {
        Command::Run { config, out } => {
            let scenario = load(&config)?;
            say(run_one(scenario, overrides, out.as_deref().unwrap_or(&here))?);
        }
        Command::Preset {
            name: Some(name), out, ..
        } => {
            say(run_one(preset(&name)?, overrides, out.as_deref().unwrap_or(&here))?);
        }
        Command::Preset { name: None, out, .. } => {
            let out = out.unwrap_or(here);
            let results: Vec<(String, Result<String, CliError>)> = presets::all()
                .into_par_iter()
                .map(|s| (s.name.clone(), run_one(s, overrides, &out)))
                .collect();
            let mut first_error = None;
            for (name, result) in results {
                match result {
                    Ok(line) => say(line),
                    Err(e) => {
                        eprintln!("error: {name}: {e}");
                        first_error.get_or_insert(e);
                    }
                }
            }
            if let Some(e) = first_error {
                return Err(e);
            }
        }
        Command::List => {
            let all = presets::all();
            let width = all.iter().map(|s| s.name.len()).max().unwrap_or(0);
            for s in all {
                say(format_args!("{:width$}  {}", s.name, s.summary));
            }
        }
        Command::Config { name } => say(preset(&name)?.to_json()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
