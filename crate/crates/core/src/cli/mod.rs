//! Command-line surface: scenario configuration, presets and output files.

pub mod config;
pub mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{preset, ConfigError, Format, Mode, ScenarioConfig, Truncation, PRESETS};
pub use run::{oracle_report, run_scenario, RunError, RunOutput};

#[derive(Debug, Parser)]
#[command(name = "jc-lattice", version, about = "Jaynes-Cummings parity-chain lattice simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate one chain and write observables.
    Simulate(CommonArgs),
    /// Lowest chain eigenvalues against the Wannier-Stark ladder.
    Spectrum(CommonArgs),
    /// Full-lattice pair dynamics against the rotating-wave solution.
    Rwa(CommonArgs),
    /// Waveguide spacings for the configured chain.
    Design(CommonArgs),
    /// Simulate a grid of (g/omega, omega0/omega) points concurrently.
    Sweep(CommonArgs),
    /// Numerics against the closed forms for omega0 = 0.
    Report(CommonArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// Flat key = value config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one key; repeatable, later wins.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
    pub preset: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated subset of csv, json, svg.
    #[arg(long)]
    pub format: Option<String>,
}

impl Command {
    fn parts(&self) -> (Mode, &CommonArgs) {
        match self {
            Command::Simulate(a) => (Mode::Simulate, a),
            Command::Spectrum(a) => (Mode::Spectrum, a),
            Command::Rwa(a) => (Mode::Rwa, a),
            Command::Design(a) => (Mode::Design, a),
            Command::Sweep(a) => (Mode::Sweep, a),
            Command::Report(a) => (Mode::Report, a),
        }
    }
}

/// Preset, then config file, then `--set` overrides, then `--out`/`--format`.
/// The subcommand fixes the mode.
pub fn resolve_config(command: &Command) -> Result<ScenarioConfig, ConfigError> {
    let (mode, args) = command.parts();
    let mut cfg = match &args.preset {
        Some(name) => preset(name).ok_or_else(|| ConfigError::new("--preset", format!("unknown preset `{name}`")))?,
        None => ScenarioConfig::default(),
    };
    if let Some(path) = &args.config {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError::new(path.display().to_string(), e.to_string()))?;
        cfg.apply_text(&text, &path.display().to_string())?;
    }
    for s in &args.set {
        cfg.apply_override(s)?;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    if let Some(f) = &args.format {
        cfg.formats = config::parse_formats(f).map_err(|m| ConfigError::new("--format", m))?;
    }
    cfg.mode = mode;
    cfg.validate()?;
    Ok(cfg)
}

/// Runs the CLI and returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let cfg = match resolve_config(&cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match run_scenario(&cfg) {
        Ok(out) => {
            for f in &out.files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
