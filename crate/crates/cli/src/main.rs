mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::RunConfig;
use output::OutDir;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] bubbles::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use bubbles::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(E::Input(_) | E::Resolution { .. } | E::Unsupported(_)) => 2,
            CliError::Io(_) | CliError::Core(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "bubbles",
    version,
    about = "Multi-bubble blow-up experiments in five dimensions"
)]
struct Cli {
    /// JSON run configuration; defaults are used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: the configuration's `out`, else `.`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the configuration seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel quadrature and sampling.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Uses this ν instead of spectral data.
    #[arg(long, global = true)]
    nu_override: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Blow-up constants for the configured points.
    Configure,
    /// Identity checks on the ground state and the interaction law.
    Verify,
    /// Integrates the reduced system from prepared data at T to T0.
    Simulate,
    /// Tunes the unstable channels by bisection.
    Shoot,
    /// Negative eigenpair, kernel residuals and coercivity of the linearized operator.
    Spectrum,
    /// Solves for the correctors Q and S.
    Correctors,
    /// Decay of the two-center integrals along the regime.
    Interactions,
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure threads: {e}")))?;
    }
    let out = OutDir::create(
        cli.out
            .or_else(|| cfg.out.clone())
            .unwrap_or_else(|| PathBuf::from(".")),
    )?;
    let checks = match cli.command {
        Command::Configure => commands::configure(&cfg, &out)?,
        Command::Verify => commands::verify(&cfg, &out)?,
        Command::Simulate => {
            let nu = commands::resolve_nu(cli.nu_override, &cfg, &out)?;
            commands::simulate_cmd(&cfg, &out, nu)?
        }
        Command::Shoot => {
            let nu = commands::resolve_nu(cli.nu_override, &cfg, &out)?;
            commands::shoot(&cfg, &out, nu)?
        }
        Command::Spectrum => commands::spectrum(&cfg, &out)?,
        Command::Correctors => commands::correctors(&cfg, &out)?,
        Command::Interactions => commands::interactions(&cfg, &out)?,
    };
    for c in &checks {
        println!("{}", c.summary_line());
    }
    Ok(checks.iter().all(|c| c.pass))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
