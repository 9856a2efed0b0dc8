//! `cba`: simulator, calculator and Monte Carlo harness for clustered
//! ballistic annihilation.

mod check;
mod commands;
mod grid;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use clustered_ba::{ClusterLaw, SpacingLaw};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or unreadable input; exit code 2.
    #[error("{0}")]
    Usage(String),
    /// The run itself failed; exit code 1.
    #[error("{0}")]
    Failure(String),
}

fn parse_law(s: &str) -> Result<ClusterLaw, String> {
    s.parse().map_err(|e: clustered_ba::law::LawError| e.to_string())
}

fn parse_spacing(s: &str) -> Result<SpacingLaw, String> {
    s.parse().map_err(|e: clustered_ba::config::ConfigError| e.to_string())
}

#[derive(Parser)]
#[command(name = "cba", version, about = "Clustered ballistic annihilation: exact resolution, closed forms and Monte Carlo checks")]
struct Cli {
    /// Worker threads for Monte Carlo trials.
    #[arg(long, env = "CBA_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate p_c, q(p) and theta(p) for a law.
    Solve(SolveArgs),
    /// Monte Carlo estimate of one quantity.
    Estimate(EstimateArgs),
    /// Resolve a fixture file exactly.
    Resolve(ResolveArgs),
    /// Estimated and analytic q and theta across a p grid.
    Sweep(SweepArgs),
    /// Run the self-check suites.
    Check(CheckArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_parser = parse_law)]
    law: ClusterLaw,
    /// A value, a comma list, or start:end:step.
    #[arg(long)]
    p: String,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Quantity {
    Q,
    Theta,
    Sr,
    Wcurve,
    Symmetry,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long, value_parser = parse_law)]
    law: ClusterLaw,
    #[arg(long)]
    p: f64,
    /// Sites per half-line.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum)]
    quantity: Quantity,
    /// exp, exp:<rate>, uniform or uniform:<lo>,<hi>.
    #[arg(long, value_parser = parse_spacing, default_value = "exp")]
    spacing: SpacingLaw,
    /// Comma-separated window sizes below n, for q, theta and wcurve.
    #[arg(long, value_delimiter = ',')]
    ladder: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    k_max: u32,
    #[arg(long, default_value_t = 1)]
    j: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Random superadditivity cuts checked per trial.
    #[arg(long, default_value_t = 1)]
    superadditivity_cuts: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ResolveArgs {
    fixture: PathBuf,
    /// Collision log CSV; stdout when omitted.
    #[arg(long)]
    collisions: Option<PathBuf>,
    #[arg(long)]
    survivors: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Use the quadratic reference resolver.
    #[arg(long)]
    naive: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_parser = parse_law, required = true)]
    law: Vec<ClusterLaw>,
    #[arg(long, value_parser = parse_spacing, default_value = "exp")]
    spacing: Vec<SpacingLaw>,
    #[arg(long)]
    p: String,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Only the closed-form columns p,q,theta,pc.
    #[arg(long)]
    analytic_only: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Random configurations for the resolver suites.
    #[arg(long, default_value_t = 2000)]
    configs: usize,
}

fn run(cli: Cli) -> Result<bool, CliError> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Failure(format!("cannot start {t} threads: {e}")))?;
    }
    match cli.command {
        Command::Solve(a) => commands::solve(a).map(|_| true),
        Command::Estimate(a) => commands::estimate(a).map(|_| true),
        Command::Resolve(a) => commands::resolve(a).map(|_| true),
        Command::Sweep(a) => commands::sweep(a).map(|_| true),
        Command::Check(a) => Ok(check::run(a.seed, a.configs)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Usage(_) => 2,
                CliError::Failure(_) => 1,
            })
        }
    }
}
