//! `sicforge` command-line front end.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 input error,
//! 3 non-convergence.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "sicforge", version, about = "SIC-POVM search, certification and star-product kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Verify a projector set file.
    Verify {
        path: PathBuf,
        /// Tolerance; defaults to the file's meta.tolerance, else 1e-10.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Search for a SIC in dimension d.
    Search {
        #[arg(short = 'd', long = "dim")]
        dim: usize,
        #[arg(long, value_enum, default_value_t = Method::Optimize)]
        method: Method,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        /// Iteration budget per restart.
        #[arg(long, default_value_t = 3000)]
        budget: usize,
        /// Objective and verification tolerance.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Build K, K^dual and T for a SIC and check every identity they obey.
    Kernels {
        path: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Map the symbol of a state from one scheme to another.
    Transform {
        /// Density-matrix JSON.
        state: PathBuf,
        #[arg(long, value_enum)]
        from: SchemeKind,
        #[arg(long, value_enum)]
        to: SchemeKind,
        /// Projector set for the SIC scheme; the canonical set is used for qubits.
        #[arg(long)]
        sic: Option<PathBuf>,
        /// Also map back and report the round-trip error.
        #[arg(long)]
        roundtrip: bool,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Closed-form qubit checks: canonical set, tensors, intertwiners, MUBs, Lie algebra.
    QubitDemo {
        #[arg(long, default_value_t = 1e-11)]
        tol: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Optimize,
    Sequential,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeKind {
    Sic,
    Spin,
    Fnr,
    Block,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify { path, tol, out } => commands::verify(&path, tol, &out),
        Command::Search { dim, method, seed, restarts, budget, tol, out } => {
            commands::search(dim, method, seed, restarts, budget, tol, &out)
        }
        Command::Kernels { path, tol, out } => commands::kernels(&path, tol, &out),
        Command::Transform { state, from, to, sic, roundtrip, tol, out } => {
            commands::transform(&state, from, to, sic.as_deref(), roundtrip, tol, &out)
        }
        Command::QubitDemo { tol, out } => commands::qubit_demo(tol, &out),
    };
    match result {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::Status::InputError as u8)
        }
    }
}
