//! `dmk`: solve and check discrete L_p dual Minkowski problems from JSON files.

mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dmk_core::Error;

#[derive(Parser)]
#[command(
    name = "dmk",
    version,
    about = "Discrete L_p dual Minkowski problem solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a measure is not concentrated on a closed hemisphere.
    Validate {
        /// Measure or problem document.
        path: PathBuf,
    },
    /// Dual curvature measure atoms of a polytope.
    Eval {
        /// Polytope document.
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Solve a problem and write the solution document.
    Solve {
        /// Problem document.
        path: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Drawing of the solution: SVG for n = 2, OFF mesh for n = 3.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        max_iters: Option<usize>,
        /// Solve `V_q^{-1} C_{p,q} = mu` (required when p = q).
        #[arg(long)]
        normalized: bool,
    },
    /// Monte-Carlo estimate of the atoms of `C_q`.
    Oracle {
        /// Polytope document.
        path: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
    },
    /// Solve a density problem at each of its resolutions.
    Approx {
        /// Problem document with a density measure.
        path: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        max_iters: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// Star body: a JSON file, or `ball:R`, `ellipsoid:a,b,..`, `cube:n:s`.
    #[arg(long = "Q")]
    star: Option<String>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Relative accuracy of each facet integral.
    #[arg(long)]
    rtol: Option<f64>,
}

/// Failure carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotConverged { .. } => 3,
            Error::PEqualsQ => 4,
            Error::MeasureOnHemisphere { .. } | Error::DegenerateDensity => 5,
            Error::FacetCollapse { .. } => 6,
            _ => 1,
        };
        let mut message = e.to_string();
        if code == 4 {
            message.push_str(" (pass --normalized)");
        }
        Self { code, message }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Self {
            code: 1,
            message: format!("{e:#}"),
        }
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("DMK_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| anyhow::anyhow!("DMK_THREADS must be a positive integer, got '{v}'"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Validate { path } => commands::validate(&path),
        Command::Eval { path, common } => commands::eval(&path, &common),
        Command::Solve {
            path,
            common,
            svg,
            max_iters,
            normalized,
        } => commands::solve(&path, &common, svg.as_deref(), max_iters, normalized),
        Command::Oracle {
            path,
            common,
            samples,
        } => commands::oracle(&path, &common, samples),
        Command::Approx {
            path,
            common,
            max_iters,
        } => commands::approx(&path, &common, max_iters),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
