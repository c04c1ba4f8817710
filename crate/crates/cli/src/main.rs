use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;
mod renewal;

use config::{preset_config, read_config, Experiment, Overrides};
use error::CliError;

#[derive(Parser)]
#[command(name = "fractal-spectra", version, about = "Laplacian spectra and Weyl asymptotics on p.c.f. fractals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Common {
    /// Bundled fractal or domain-system preset (see `presets`).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated levels, overriding the configuration.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    /// Comma-separated boundary conditions (D, N).
    #[arg(long, value_delimiter = ',')]
    bc: Option<Vec<String>>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Incidence-matrix analysis of a domain system.
    Analyze(Common),
    /// Eigenvalues and counting functions per domain, boundary condition and level.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Reuse spectrum CSVs from the output directory instead of solving.
        #[arg(long)]
        no_compute: bool,
    },
    /// Leading and second-term profiles, bracketing and remainder regime.
    Asymptotics {
        #[command(flatten)]
        common: Common,
        /// Take counting functions from spectrum CSVs in the output directory.
        #[arg(long)]
        no_compute: bool,
    },
    /// Solve a vector renewal equation and report its asymptotics.
    Renewal {
        /// Bundled demo system.
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        /// Renewal system (JSON).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 60.0)]
        horizon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List bundled presets.
    Presets,
}

fn experiment(c: Common) -> Result<Experiment, CliError> {
    let cfg = match (&c.preset, &c.config) {
        (Some(p), _) => preset_config(p)?,
        (None, Some(path)) => read_config(path)?,
        (None, None) => return Err(CliError::config("one of --preset or --config is required")),
    };
    cfg.resolve(Overrides { levels: c.levels, bc: c.bc, out: c.out })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(c) => commands::analyze(&experiment(c)?),
        Command::Spectrum { common, no_compute } => commands::spectrum(&experiment(common)?, no_compute),
        Command::Asymptotics { common, no_compute } => commands::asymptotics(&experiment(common)?, no_compute),
        Command::Renewal { preset, config, horizon, out } => renewal::run(preset.as_deref(), config.as_deref(), horizon, out),
        Command::Presets => {
            commands::presets();
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
