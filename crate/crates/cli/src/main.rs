//! `gw`: principal angles and reconstruction of angle-preserving maps.
//!
//! Exit codes: 0 success, 1 negative finding, 2 usage or input error,
//! 3 numerical failure. `GW_TOL` overrides the default equality tolerance.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gw_core::{Field, GwError};

#[derive(Parser)]
#[command(name = "gw", version, about = "Principal angles and angle-preserving maps on projections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum FieldArg {
    Real,
    Complex,
}

impl From<FieldArg> for Field {
    fn from(f: FieldArg) -> Field {
        match f {
            FieldArg::Real => Field::Real,
            FieldArg::Complex => Field::Complex,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum What {
    Unitary,
    Subspace,
    Projection,
}

#[derive(Subcommand)]
enum Command {
    /// Principal angles between two equal-rank projections.
    Angles {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        /// Inputs are orthonormal bases rather than projections.
        #[arg(long)]
        bases: bool,
        #[arg(long)]
        json: bool,
    },
    /// Tests whether a map preserves angles on random pairs.
    Check {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest acceptable discrepancy.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = FieldArg::Complex)]
        field: FieldArg,
        /// Where witness files are written on a negative finding.
        #[arg(long, default_value = ".")]
        witness_dir: PathBuf,
    },
    /// Recovers the unitary or antiunitary inducing a map.
    Reconstruct {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        rank: usize,
        /// Reconstruct through P ↦ I − φ(I − P).
        #[arg(long)]
        via_dual: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Writes the recovered unitary as Matrix JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FieldArg::Complex)]
        field: FieldArg,
        /// Writes the rank-one combination used for Φ(e₁e₁*) as JSON.
        #[arg(long)]
        emit_certificate: Option<PathBuf>,
    },
    /// Walks through the complement map at d = 2n.
    DemoExceptional {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = FieldArg::Complex)]
        field: FieldArg,
    },
    /// Writes a random unitary, subspace basis or projection.
    Gen {
        #[arg(long, value_enum)]
        what: What,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = FieldArg::Complex)]
        field: FieldArg,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(GwError),
}

impl From<GwError> for CliError {
    fn from(e: GwError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

/// Outcome of a command that ran to completion.
pub enum Outcome {
    Affirmative,
    Negative,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Angles { p, q, bases, json } => commands::angles(&p, &q, bases, json),
        Command::Check {
            map,
            dim,
            rank,
            samples,
            seed,
            tol,
            field,
            witness_dir,
        } => commands::check(&commands::CheckArgs {
            map,
            dim,
            rank,
            samples,
            seed,
            threshold: tol,
            field: field.into(),
            witness_dir,
        }),
        Command::Reconstruct {
            map,
            dim,
            rank,
            via_dual,
            seed,
            out,
            field,
            emit_certificate,
        } => commands::reconstruct(&commands::ReconstructArgs {
            map,
            dim,
            rank,
            via_dual,
            seed,
            out,
            field: field.into(),
            emit_certificate,
        }),
        Command::DemoExceptional {
            n,
            samples,
            seed,
            field,
        } => commands::demo_exceptional(n, samples, seed, field.into()),
        Command::Gen {
            what,
            dim,
            rank,
            seed,
            out,
            field,
        } => commands::gen(what, dim, rank, seed, &out, field.into()),
    };
    match result {
        Ok(Outcome::Affirmative) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
