//! `vfb` — simulate the 1-D viscous shallow-water vacuum free boundary
//! problem and verify its structural identities at desk scale.
//!
//! Subcommands: `simulate` (config-driven run with diagnostics and checks),
//! `reconstruct` (Eulerian snapshots), `galerkin` (spectral oracle
//! cross-validation), `bench-inequalities` (weighted inequality suite),
//! `mms` (manufactured-solution convergence orders).
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
//! 3 solver abort or I/O failure.

mod config;
mod oracles;
mod output;
mod simulate;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "vfb", version, about = "vacuum free boundary simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation from a TOML config; write diagnostics, snapshots,
    /// a check summary and optional plots.
    Simulate {
        /// Path to the run configuration.
        config: PathBuf,
    },
    /// Run to the requested times and emit Eulerian snapshot CSVs only.
    Reconstruct {
        config: PathBuf,
        /// Snapshot times, comma separated.
        #[arg(long, value_delimiter = ',')]
        times: Vec<f64>,
        /// Output grid resolution (overrides the config).
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Cross-validate the finite-volume stepper against the spectral
    /// solution of the frozen-coefficient linearized problem.
    Galerkin {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 32)]
        modes: usize,
        #[arg(long, default_value_t = 401)]
        fv_n: usize,
        #[arg(long, default_value_t = 0.25)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Exercise the weighted interpolation, Hardy, embedding and Sobolev
    /// inequalities over the default test families.
    BenchInequalities {
        #[arg(long, default_value_t = 801)]
        n: usize,
        /// Write the report CSV here as well as to stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Manufactured-solution convergence study; prints observed orders and
    /// runs the wrong-forcing negative control.
    Mms {
        #[arg(long, default_value_t = 0.2)]
        t_end: f64,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Simulate { config } => simulate::simulate(&config),
        Command::Reconstruct { config, times, resolution } => {
            if times.is_empty() {
                eprintln!("reconstruct needs at least one --times value");
                2
            } else {
                simulate::reconstruct(&config, &times, resolution)
            }
        }
        Command::Galerkin { alpha, modes, fv_n, t_end, tol } => {
            oracles::galerkin_cmd(alpha, modes, fv_n, t_end, tol)
        }
        Command::BenchInequalities { n, report } => oracles::bench_cmd(n, report.as_deref()),
        Command::Mms { t_end } => oracles::mms_cmd(t_end),
    };
    std::process::exit(code);
}
