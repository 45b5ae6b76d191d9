mod commands;
mod config;
mod error;
mod output;
mod presets;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{CommandFactory, Parser, Subcommand};

use config::RunConfig;
use error::CliError;

const DEFAULT_OUT: &str = "out";

#[derive(Debug, Parser)]
#[command(name = "aowqed", version, about = "Waveguide QED under travelling acoustic modulation")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute a config file or a named preset.
    Run {
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Output root; files go to `<out>/<subcommand>/`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for parameter sweeps (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Check the config and print a report without running it.
        #[arg(long)]
        validate: bool,
    },
    /// List the preset names.
    Presets,
    /// Print the explicit config a preset expands to.
    ShowPreset { name: String },
}

fn usage() {
    let _ = Cli::command().print_help();
    println!();
}

fn load(config: Option<PathBuf>, preset: Option<String>) -> Result<RunConfig, CliError> {
    match (config, preset) {
        (Some(path), _) => RunConfig::from_file(&path),
        (None, Some(name)) => presets::expand(&name),
        (None, None) => Err(CliError::NoSubcommand),
    }
}

fn run(
    config: Option<PathBuf>,
    preset: Option<String>,
    out: Option<PathBuf>,
    threads: Option<usize>,
    validate_only: bool,
) -> Result<ExitCode, CliError> {
    let config = load(config, preset)?;
    let report = validate::validate(&config);
    if validate_only {
        println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
        return Ok(if report.errors.is_empty() {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        });
    }
    if let Some(first) = report.errors.first() {
        let (path, message) = first.split_once(": ").unwrap_or(("params", first));
        return Err(CliError::Schema {
            path: path.to_string(),
            message: message.to_string(),
        });
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(n) = threads {
        // fails only if a pool already exists, in which case it is kept
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let start = Instant::now();
    let mut outcome = commands::execute(&config.job)?;
    let mut warnings = report.warnings;
    warnings.append(&mut outcome.warnings);
    outcome.warnings = warnings;
    let root = out
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let written = output::write_outputs(&root, &config, &outcome, start.elapsed())?;
    for path in written {
        println!("{}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        None => Err(CliError::NoSubcommand),
        Some(Command::Presets) => {
            for name in presets::PRESETS {
                println!("{name}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Some(Command::ShowPreset { name }) => presets::expand(&name).map(|c| {
            println!("{}", serde_json::to_string_pretty(&c.to_json()).expect("configs serialize"));
            ExitCode::SUCCESS
        }),
        Some(Command::Run {
            config,
            preset,
            out,
            threads,
            validate,
        }) => run(config, preset, out, threads, validate),
    };
    match result {
        Ok(code) => code,
        Err(CliError::NoSubcommand) => {
            eprintln!("error: {}", CliError::NoSubcommand);
            usage();
            ExitCode::from(CliError::NoSubcommand.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
