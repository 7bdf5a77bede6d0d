//! Command-line driver: `qkdv <solve|verify|qtable|qq|bethe|params>`.
//!
//! Exit codes: 0 pass, 1 computation-level failure, 2 usage or domain error.

mod commands;
mod config;

#[cfg(test)]
mod tests;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

pub use config::{parse_complex, ConfigFile};

use crate::error::Error;
use crate::trivmon::SystemForm;

#[derive(Debug, Parser)]
#[command(
    name = "qkdv",
    version,
    about = "Opers, trivial monodromy and Q-functions for quantum Boussinesq"
)]
pub struct Cli {
    /// key=value file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: QKDV_THREADS, else all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Which form of the trivial-monodromy system to solve and verify.
    #[arg(long, global = true, value_enum)]
    pub system: Option<SystemArg>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SystemArg {
    Derived,
    Printed,
}

impl From<SystemArg> for SystemForm {
    fn from(s: SystemArg) -> Self {
        match s {
            SystemArg::Derived => SystemForm::Derived,
            SystemArg::Printed => SystemForm::Printed,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find level-N solutions of the trivial-monodromy system.
    Solve(SolveArgs),
    /// Re-check the certificates of a solution file.
    Verify(VerifyArgs),
    /// Tabulate Q_i and Q*_i on a λ grid (CSV).
    Qtable(QtableArgs),
    /// Check the QQ̃-system on a rotation-complete grid (JSON).
    Qq(QqArgs),
    /// Find zeros of Q on a ray and check the Bethe Ansatz equations (JSON).
    Bethe(BetheArgs),
    /// Convert between parameter systems.
    Params(ParamsArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OperArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    /// Complex values are written 1, 0.5-2i or 0.5,-2.
    #[arg(long, allow_hyphen_values = true)]
    pub r1bar: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub r2bar: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[command(flatten)]
    pub oper: OperArgs,
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub seed_box: Option<f64>,
    #[arg(long)]
    pub damping: Option<f64>,
    #[arg(long)]
    pub newton_tol: Option<f64>,
    #[arg(long)]
    pub dedup_tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub rng_seed: Option<u64>,
    /// Number of random λ samples used for the certificates.
    #[arg(long)]
    pub lambda_samples: Option<usize>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub lambda_samples: Option<usize>,
    #[arg(long)]
    pub rng_seed: Option<u64>,
    /// Largest accepted monodromy deviation.
    #[arg(long)]
    pub monodromy_tol: Option<f64>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

/// A circle of base points, optionally completed by the rotations
/// e^{±iπk̂}λ and the origin.
#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub n_base: Option<usize>,
    #[arg(long)]
    pub radius: Option<f64>,
    /// Angle of the first base point, in radians.
    #[arg(long, allow_hyphen_values = true)]
    pub offset: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct StateArgs {
    /// Solution JSON as written by `solve`.
    pub file: PathBuf,
    /// Which solution in the file (0-based).
    #[arg(long)]
    pub index: Option<usize>,
    #[arg(long)]
    pub z_max: Option<f64>,
    #[arg(long)]
    pub z_match: Option<f64>,
    #[arg(long)]
    pub m_trunc: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct QtableArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Add e^{±iπk̂}λ for every base point.
    #[arg(long)]
    pub triples: bool,
    /// Add λ = 0.
    #[arg(long)]
    pub origin: bool,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct QqArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Reuse a table from `qtable` instead of computing one.
    #[arg(long)]
    pub qtable: Option<PathBuf>,
    /// id, sigma, tau, tau2, sigma_tau, tau_sigma or all.
    #[arg(long)]
    pub sector: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Also report the BHK form (needs λ = 0 in the grid).
    #[arg(long)]
    pub bhk: bool,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RayKind {
    #[value(name = "real-E")]
    RealE,
}

#[derive(Debug, Clone, Args)]
pub struct BetheArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, value_enum)]
    pub ray: Option<RayKind>,
    /// Energy window E_min E_max on the real-E ray.
    #[arg(long, num_args = 2, allow_hyphen_values = true)]
    pub window: Option<Vec<f64>>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub sector: Option<String>,
    /// Zeros of Q_{s(1)} (q) or of Q*_{s(3)} (qstar).
    #[arg(long)]
    pub which: Option<String>,
    #[arg(long)]
    pub root_tol: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// CSV of |Q_i|, |Q*_i| along the ray.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParamsFrom {
    Oper,
    Cft,
    R,
    Legacy,
}

#[derive(Debug, Clone, Args)]
pub struct ParamsArgs {
    #[arg(long, value_enum)]
    pub from: Option<ParamsFrom>,
    #[command(flatten)]
    pub oper: OperArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta3: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub r1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub r2: Option<String>,
    #[arg(long = "M")]
    pub m: Option<f64>,
    #[arg(long = "E", allow_hyphen_values = true)]
    pub e: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub ell1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub ell2: Option<String>,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Parse(_) | Error::Io(_) | Error::Index(_) => CliError::Usage(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

pub type CliResult = std::result::Result<(), CliError>;

fn init_threads(n: Option<usize>) -> CliResult {
    let n = match n {
        Some(n) => Some(n),
        None => match std::env::var("QKDV_THREADS") {
            Ok(s) => Some(
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("QKDV_THREADS = {s:?}")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        // a second initialization (tests) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs a parsed command line.
pub fn execute(cli: Cli) -> CliResult {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::read(p)?,
        None => ConfigFile::default(),
    };
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => cfg.get::<usize>("threads")?,
    };
    init_threads(threads)?;
    let form = match cli.system {
        Some(s) => s.into(),
        None => match cfg.raw("system") {
            Some(s) => SystemForm::parse(s)?,
            None => SystemForm::Derived,
        },
    };
    match cli.command {
        Command::Solve(a) => commands::solve(&a, &cfg, form),
        Command::Verify(a) => commands::verify(&a, &cfg, form),
        Command::Qtable(a) => commands::qtable(&a, &cfg),
        Command::Qq(a) => commands::qq(&a, &cfg),
        Command::Bethe(a) => commands::bethe(&a, &cfg),
        Command::Params(a) => commands::params(&a, &cfg),
    }
}

/// Entry point of the binary.
pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Failed(m) => eprintln!("failed: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}
