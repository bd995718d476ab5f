use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// `println!` that ignores a closed stdout, so piping into `head` exits quietly.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

mod commands;
mod config;
mod output;

use config::RunConfig;

/// Worker-thread count for parallel grid evaluation.
const WORKERS_ENV: &str = "ESJJ_WORKERS";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<esjj::Error> for CliError {
    fn from(e: esjj::Error) -> Self {
        use esjj::Error as E;
        let msg = e.to_string();
        match e {
            E::NoConvergence { .. } | E::WindowRestartFailure(_) | E::Instability(_) | E::Underflow { .. } => {
                CliError::Numerical(msg)
            }
            E::Io(_) | E::Format(_) => CliError::Io(msg),
            _ => CliError::Config(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "esjj",
    version,
    about = "Green-function and finite-difference solvers for the damped strip problem"
)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `[output] dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Mode count `N`, tail tolerance `tol=X`, or `2x` the configured count.
    #[arg(long, global = true)]
    truncation: Option<String>,
    /// linear, picard or fd.
    #[arg(long, global = true)]
    solver: Option<String>,
    /// selfadjoint or paperliteral.
    #[arg(long, global = true)]
    weight: Option<String>,
    /// csv, bin or json.
    #[arg(long, global = true)]
    format: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the Green function and its time derivatives.
    GreenEval,
    /// Solve the configured problem and write the field and a report.
    Solve,
    /// Compare the configured solver against the finite-difference oracle.
    Validate,
    /// Fit the late-time decay rate of sup_x |u| and list the decay constants.
    DecayStudy,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(dir) = &cli.out {
        cfg.output.dir = dir.clone();
    }
    match cli.truncation.as_deref() {
        Some("2x") => cfg.solver.doubled = true,
        Some(t) => cfg.solver.truncation = Some(t.to_string()),
        None => {}
    }
    if let Some(s) = &cli.solver {
        cfg.solver.kind = s.clone();
    }
    if let Some(w) = &cli.weight {
        cfg.solver.weight = Some(w.clone());
    }
    if let Some(f) = &cli.format {
        cfg.output.format = f.clone();
    }
    Ok(cfg)
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(v) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n >= 1)
        .ok_or_else(|| CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    configure_workers()?;
    let cfg = load(cli)?;
    match cli.command {
        Command::GreenEval => commands::green_eval(&cfg),
        Command::Solve => commands::solve(&cfg),
        Command::Validate => commands::validate(&cfg),
        Command::DecayStudy => commands::decay_study(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("esjj: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
