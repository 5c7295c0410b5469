//! `mva`: calibration, XVA tables, SIMM tables, CCP basis curves and the
//! Monte-Carlo check, driven by a TOML config file.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(mva_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<mva_core::Error> for CliError {
    fn from(e: mva_core::Error) -> Self {
        use mva_core::Error as E;
        match e {
            E::InvalidParameter(_)
            | E::InvalidTenor(_)
            | E::UnknownStrategy { .. }
            | E::IncompatiblePortfolio(_)
            | E::InvalidRatio { .. }
            | E::Unsupported(_) => Self::Config(e.to_string()),
            other => Self::Numerical(other),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Io(_) => 2,
            Self::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mva", version, about = "XVA and margin valuation adjustment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Io {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a short-rate model to 3m LIBOR, the par swap rate and the ATM cap.
    Calibrate(Io),
    /// Valuation adjustments per counterparty or per holding.
    Xva(Io),
    /// SIMM-margined equity option MVA under funding scenarios.
    Simm(Io),
    /// Inter-CCP swap basis as a function of the margin multiplier.
    Basis(Io),
    /// Finite-difference against regression Monte Carlo.
    McCheck(Io),
}

type Runner = fn(&config::RunConfig) -> Result<commands::Output, CliError>;

fn run(cli: Cli) -> Result<(), CliError> {
    let (io, run): (&Io, Runner) = match &cli.command {
        Command::Calibrate(io) => (io, commands::calibrate),
        Command::Xva(io) => (io, commands::xva),
        Command::Simm(io) => (io, commands::simm),
        Command::Basis(io) => (io, commands::basis),
        Command::McCheck(io) => (io, commands::mc_check),
    };
    let text = std::fs::read_to_string(&io.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", io.config.display())))?;
    let cfg = config::RunConfig::parse(&text)?;
    let output = run(&cfg)?;
    if !output.report.is_empty() {
        print!("{}", output.report);
    }
    match &io.out {
        Some(path) => std::fs::write(path, &output.body)?,
        None => print!("{}", output.body),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mva: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
