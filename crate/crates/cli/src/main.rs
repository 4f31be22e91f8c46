//! `bhtlab`: command-line front end of the laboratory.
//!
//! Every run writes its artifacts and a `<subcommand>.manifest.json` into the
//! output directory (`--out`, else `$BHTLAB_OUT`, else `./bhtlab-out`).
//! Exit status: 0 when every check passes, 1 when a check fails, 2 on usage
//! errors and unknown curves.

mod commands;
mod output;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use bhtlab::curve::GRAMMAR;
use bhtlab::LabError;
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::output::Format;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn is_curve(&self) -> bool {
        matches!(self, CliError::Lab(LabError::CurveSyntax { .. } | LabError::NotNonFlat(_)))
    }
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Curve descriptor, e.g. "poly: t^2" or "pow: 1.5".
    #[arg(long, default_value = "poly: t^2")]
    pub curve: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, env = "BHTLAB_OUT", default_value = "bhtlab-out")]
    pub out: PathBuf,
    /// Defaults to json for curve-check and cz, csv otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Grid half-width L; the grid is [-L, L).
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Grid length N (a power of two >= 16).
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Parser)]
#[command(name = "bhtlab", version, about = "Bilinear Hilbert transform along curves: a numerical laboratory", after_help = GRAMMAR)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Axiom diagnostics of a curve.
    CurveCheck(commands::CurveCheckArgs),
    /// Critical points and phase values of the multiplier.
    Phase(commands::PhaseArgs),
    /// Trilinear forms of one scale m, spatial against spectral, with band energies.
    Decompose(commands::DecomposeArgs),
    /// Norm growth of shifted square functions.
    Sqfn(commands::SqfnArgs),
    /// Calderón–Zygmund decomposition of a step function.
    Cz(commands::CzArgs),
    /// Ensemble sup ratios along an edge of the Hölder triangle.
    Scan(commands::ScanArgs),
    /// Direct principal-value evaluation of the bilinear transform.
    Bht(commands::BhtArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::CurveCheck(a) => commands::curve_check(a),
        Command::Phase(a) => commands::phase(a),
        Command::Decompose(a) => commands::decompose(a),
        Command::Sqfn(a) => commands::sqfn(a),
        Command::Cz(a) => commands::cz(a),
        Command::Scan(a) => commands::scan(a),
        Command::Bht(a) => commands::bht(a),
    };
    match result {
        Ok(run) => {
            println!("{}", run.manifest.display());
            for line in &run.summary {
                eprintln!("{line}");
            }
            if run.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("check failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_curve() {
                eprintln!("\n{GRAMMAR}");
            }
            ExitCode::from(2)
        }
    }
}
