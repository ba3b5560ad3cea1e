//! `tpuzzle`: generate puzzle instances, run optimizers and diagnostics, and
//! write CSV tables and SVG plots.

mod commands;
mod plot;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::UsageError;
use plot::SchemaMismatch;

#[derive(Parser)]
#[command(name = "tpuzzle", version, about = "Hidden T-gate recompilation puzzles: instances, optimizers, diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Master seed; overrides the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Output file (generate) or directory (everything else).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a puzzle instance as JSON.
    Generate(commands::GenerateArgs),
    /// Noiseless hill climbing and the random-search baseline.
    Solve(commands::SolveArgs),
    /// Noisy hill climbing success rate over a sigma grid.
    NoisySolve(commands::NoisyArgs),
    /// Landscape classification heatmap and concentration statistics.
    Landscape(commands::LandscapeArgs),
    /// Purity excess, stabilizer norm and single-block scans.
    Diagnose(commands::DiagnoseArgs),
    /// Compare the QSVT circuit block with the dense Cayley transform.
    QsvtVerify(commands::QsvtArgs),
    /// Hill climbing on rotation-circuit instances on a qubit grid.
    Largescale(commands::LargescaleArgs),
    /// Render CSV tables as SVG charts.
    Plot(commands::PlotArgs),
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use tpuzzle_core::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Io(_) => 1,
                E::SizeCap { .. } | E::TooManyStrings { .. } => 4,
                E::NotConverged { .. } | E::FitStagnated { .. } | E::BasisConstruction(_) => 3,
                E::WidthMismatch { .. } | E::QubitOutOfRange { .. } | E::InvalidParameter(_) | E::Parse(_) | E::Json(_) => 2,
            };
        }
        if cause.is::<UsageError>() || cause.is::<SchemaMismatch>() || cause.is::<serde_json::Error>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<csv::Error>() {
            return if matches!(e.kind(), csv::ErrorKind::Io(_)) { 1 } else { 2 };
        }
        if cause.is::<std::io::Error>() {
            return 1;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Solve(a) => commands::solve(a),
        Command::NoisySolve(a) => commands::noisy_solve(a),
        Command::Landscape(a) => commands::landscape(a),
        Command::Diagnose(a) => commands::diagnose(a),
        Command::QsvtVerify(a) => commands::qsvt_verify(a),
        Command::Largescale(a) => commands::largescale(a),
        Command::Plot(a) => commands::plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
