//! `heb`: eigenvalue lower bounds for the p-Laplacian on balls, reference
//! eigenvalues by shooting, and numerical checks of the underlying
//! inequalities.
//!
//! Exit status: 0 all checks pass, 1 a verification failed, 2 invalid input,
//! 3 numerical or I/O failure.

mod commands;
mod output;
mod range;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;
use range::{Grid, SArg};

#[derive(Parser)]
#[command(name = "heb", version, about = "Hardy-type eigenvalue bounds for the p-Laplacian")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output format
    #[arg(long, global = true, env = "HEB_FORMAT", value_enum)]
    format: Option<Format>,

    /// Write the report here instead of standard output
    #[arg(long, global = true, env = "HEB_OUT")]
    out: Option<PathBuf>,

    /// Quadrature tolerance (verify) or ODE tolerance (eigen-ref, sweep --with-ref)
    #[arg(long, global = true, env = "HEB_TOL")]
    tol: Option<f64>,

    /// Worker threads for sweep
    #[arg(long, global = true, env = "HEB_JOBS")]
    jobs: Option<usize>,

    /// Seed for random trial functions
    #[arg(long, global = true, env = "HEB_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Sup-inf lower bound on a ball
    #[command(allow_negative_numbers = true)]
    Bound {
        #[arg(long, env = "HEB_P")]
        p: f64,
        #[arg(long, env = "HEB_N")]
        n: usize,
        #[arg(long = "R", env = "HEB_R")]
        radius: f64,
        /// Quadratic coefficient b < 0 (default: threshold - 0.1)
        #[arg(long, env = "HEB_B")]
        b: Option<f64>,
        /// `default` or an explicit S
        #[arg(long, env = "HEB_S", default_value = "default")]
        s: SArg,
    },
    /// Run the supersolution, Poisson and Hardy check suites
    Verify(verify::VerifyArgs),
    /// Bounds (and optionally reference eigenvalues) over a parameter grid
    Sweep {
        #[arg(long, env = "HEB_P", allow_hyphen_values = true)]
        p: Grid,
        #[arg(long, env = "HEB_N")]
        n: usize,
        #[arg(long = "R", env = "HEB_R", allow_hyphen_values = true, default_value = "1")]
        radius: Grid,
        #[arg(long, env = "HEB_B", allow_hyphen_values = true)]
        b: Option<Grid>,
        #[arg(long, env = "HEB_S", default_value = "default")]
        s: SArg,
        /// Also compute the shooting reference for every row
        #[arg(long)]
        with_ref: bool,
    },
    /// Reference first eigenvalue by shooting
    EigenRef {
        #[arg(long, env = "HEB_P")]
        p: f64,
        #[arg(long, env = "HEB_N")]
        n: usize,
        #[arg(long = "R", env = "HEB_R", default_value_t = 1.0)]
        radius: f64,
    },
    /// Bound for any domain of the given volume (Faber-Krahn)
    #[command(allow_negative_numbers = true)]
    Fk {
        #[arg(long, env = "HEB_VOLUME")]
        volume: f64,
        #[arg(long, env = "HEB_P")]
        p: f64,
        #[arg(long, env = "HEB_N")]
        n: usize,
        #[arg(long, env = "HEB_B")]
        b: Option<f64>,
        #[arg(long, env = "HEB_S", default_value = "default")]
        s: SArg,
    },
}

#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Numeric(String),
}

impl From<heb_core::Error> for Failure {
    fn from(e: heb_core::Error) -> Self {
        if e.is_invalid_input() {
            Failure::Invalid(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let common = cli.common;
    if let Some(t) = common.tol {
        if !(t > 0.0 && t < 1.0) {
            return Err(Failure::Invalid(format!("requires 0 < tol < 1 (got {t})")));
        }
    }
    if common.jobs == Some(0) {
        return Err(Failure::Invalid("requires jobs >= 1".into()));
    }
    match cli.command {
        Command::Bound { p, n, radius, b, s } => commands::bound(&common, p, n, radius, b, s.0),
        Command::Verify(args) => verify::run(&common, &args),
        Command::Sweep {
            p,
            n,
            radius,
            b,
            s,
            with_ref,
        } => commands::sweep(&common, &p, n, &radius, b.as_ref(), s.0, with_ref),
        Command::EigenRef { p, n, radius } => commands::eigen_ref(&common, p, n, radius),
        Command::Fk { volume, p, n, b, s } => commands::fk(&common, volume, p, n, b, s.0),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
