//! Thin command-line front end: argument parsing, file IO, exit codes. All
//! computation lives in the library's `cli` module.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use schwarz::operator::SweepOrdering;
use schwarz::verify::VerifyScale;

#[derive(Parser)]
#[command(
    name = "schwarz",
    version,
    about = "Multiplicative Schwarz solvers for block-arrow systems"
)]
struct Cli {
    /// Seed for randomized checks; the SCHWARZ_SEED environment variable is
    /// honored when this flag is absent.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence factors and closed-form bounds over a parameter grid, as CSV.
    Table {
        /// `default` or a path to a JSON array of [N, M] pairs.
        #[arg(long, default_value = "default")]
        grid: String,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Error history of the stationary iteration against the a-priori envelope.
    Converge {
        /// Number of x-intervals.
        #[arg(long = "N")]
        nx: usize,
        /// Number of y-intervals.
        #[arg(long = "M")]
        my: usize,
        /// Diffusion parameter.
        #[arg(long)]
        eps: f64,
        /// t12 or t21; both run when omitted.
        #[arg(long, value_parser = parse_ordering)]
        ordering: Option<SweepOrdering>,
        #[arg(long = "max-iter", default_value_t = 200)]
        max_iter: usize,
    },
    /// Internal consistency suites; exits nonzero if any group fails.
    Verify {
        /// quick or full.
        #[arg(long, default_value = "quick", value_parser = parse_scale)]
        scale: VerifyScale,
    },
    /// Exact factors and bounds for one Poisson model instance, as JSON.
    Poisson {
        /// Wing length; the matrix has 2m+1 block rows.
        #[arg(long)]
        m: usize,
    },
    /// Residual history of Schwarz-preconditioned GMRES, as CSV.
    Gmres {
        /// Number of x-intervals.
        #[arg(long = "N")]
        nx: usize,
        /// Number of y-intervals.
        #[arg(long = "M")]
        my: usize,
        /// Diffusion parameter.
        #[arg(long)]
        eps: f64,
        /// Relative residual target.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Solve a system given as JSON files, reporting the run as JSON.
    Custom {
        /// System description file.
        #[arg(long)]
        system: PathBuf,
        /// Right-hand side file: a JSON array.
        #[arg(long)]
        rhs: PathBuf,
    },
}

fn parse_ordering(s: &str) -> Result<SweepOrdering, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_scale(s: &str) -> Result<VerifyScale, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let seed = schwarz::resolve_seed(cli.seed);
    match cli.command {
        Command::Table { grid, out } => {
            let pairs = if grid == "default" {
                schwarz::default_grid()
            } else {
                let text = std::fs::read_to_string(&grid)
                    .with_context(|| format!("reading grid file {grid}"))?;
                schwarz::grid_from_json(&text)?
            };
            let csv = schwarz::cmd_table(&pairs)?;
            match out {
                Some(path) => std::fs::write(&path, &csv)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Converge { nx, my, eps, ordering, max_iter } => {
            print!("{}", schwarz::cmd_converge(nx, my, eps, ordering, max_iter)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { scale } => {
            let (report, all_passed) = schwarz::cmd_verify(scale, seed)?;
            println!("{report}");
            Ok(if all_passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Poisson { m } => {
            println!("{}", schwarz::cmd_poisson(m)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Gmres { nx, my, eps, tol } => {
            print!("{}", schwarz::cmd_gmres(nx, my, eps, tol)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Custom { system, rhs } => {
            let system_text = std::fs::read_to_string(&system)
                .with_context(|| format!("reading {}", system.display()))?;
            let rhs_text = std::fs::read_to_string(&rhs)
                .with_context(|| format!("reading {}", rhs.display()))?;
            println!("{}", schwarz::cmd_custom(&system_text, &rhs_text)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}
