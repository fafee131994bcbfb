//! `tlsub`: runs the verification suites of `tlsub-core` and writes JSON reports.
//!
//! Exit status: 0 when every check passes, 1 on usage errors, 2 when a check
//! fails or a computation errors out, 3 when a resource limit is hit.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::{ContextKind, ContextValue, ErrorKind};
use clap::{Args, Parser, Subcommand};
use thiserror::Error;
use tlsub_core::{CMatrix, C64};

pub mod input;
pub mod report;
mod suite;

pub use suite::run_suite;

/// Environment variable overriding the cap on `m^{2N}`.
pub const MAX_SCALARS_ENV: &str = "TLSUB_MAX_SCALARS";

pub const EXIT_PASS: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_FAILURE: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{flag}: {message}")]
pub struct UsageError {
    pub flag: String,
    pub message: String,
}

impl UsageError {
    pub fn new(flag: &str, message: impl Into<String>) -> Self {
        UsageError {
            flag: flag.into(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Check,
    NormalForm,
    Jw,
    Verify,
    Boundary,
    Ktheory,
    Dims,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Check => "check",
            CommandKind::NormalForm => "normal-form",
            CommandKind::Jw => "jw",
            CommandKind::Verify => "verify",
            CommandKind::Boundary => "boundary",
            CommandKind::Ktheory => "ktheory",
            CommandKind::Dims => "dims",
        }
    }
}

#[derive(Clone, Debug)]
pub enum Input {
    Coeffs(Vec<C64>),
    Matrix { path: PathBuf, matrix: CMatrix },
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: CommandKind,
    pub input: Option<Input>,
    /// Top Fock level `N`; `None` picks a default from `m`.
    pub levels: Option<usize>,
    pub truncate: usize,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub max_scalars: u128,
    pub timings: bool,
}

/// Result of argument parsing: a run, or text to print (help, version).
#[derive(Debug)]
pub enum Parsed {
    Run(Box<RunConfig>),
    Info(String),
}

#[derive(Parser)]
#[command(name = "tlsub", version, about = "Temperley-Lieb subproduct system engine")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the Temperley-Lieb condition and derive lambda, q, t and tau
    Check(SystemOpts),
    /// Reduce to anti-diagonal normal form and report the invariants
    NormalForm(SystemOpts),
    /// Build the Jones-Wenzl tower and certify its ranks
    Jw(TowerOpts),
    /// Verify the creation-operator relations on the truncated Fock space
    Verify(TowerOpts),
    /// Check the Theta/psi boundary identity and flatness decay
    Boundary(TowerOpts),
    /// Fusion multiplicities, the pi_* pairing matrix and K-groups
    Ktheory(KOpts),
    /// Dimensions of H_0, ..., H_n from the recurrence
    Dims(DimsOpts),
}

#[derive(Args)]
struct InputOpts {
    /// Coefficients a_1,...,a_m of sum a_i X_i X_(m-i+1), e.g. "1,-1" or "0.5+1i,2"
    #[arg(long, allow_hyphen_values = true, value_name = "C1,..,CM")]
    coeffs: Option<String>,
    /// JSON file holding an m x m array of [re, im] pairs
    #[arg(long, value_name = "PATH", conflicts_with = "coeffs")]
    matrix: Option<PathBuf>,
}

#[derive(Args)]
struct OutputOpts {
    /// Threshold applied to floating-point residuals
    #[arg(long, default_value_t = 1e-9, allow_hyphen_values = true)]
    tol: f64,
    /// Write the JSON report here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Include wall-clock timings (makes the report run-dependent)
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct SystemOpts {
    #[command(flatten)]
    input: InputOpts,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct TowerOpts {
    #[command(flatten)]
    input: InputOpts,
    /// Top level N (default 6 for m=2, 5 for m=3, 4 otherwise)
    #[arg(long, value_name = "N")]
    levels: Option<usize>,
    /// Write the decay table as CSV
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct KOpts {
    /// Truncation T of the pairing matrix
    #[arg(long, default_value_t = 10, value_name = "T")]
    truncate: usize,
    /// Dimension m for the K-groups (default: 2 through 5)
    #[arg(long)]
    m: Option<usize>,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct DimsOpts {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    output: OutputOpts,
}

fn clap_usage(err: clap::Error) -> UsageError {
    let flag = match err.get(ContextKind::InvalidArg) {
        Some(ContextValue::String(s)) => s.split_whitespace().next().unwrap_or("arguments").to_string(),
        _ => "arguments".to_string(),
    };
    let message = err.render().to_string();
    let message = message.trim_start_matches("error: ").trim_end().to_string();
    UsageError { flag, message }
}

fn read_input(opts: InputOpts) -> Result<Input, UsageError> {
    match (opts.coeffs, opts.matrix) {
        (Some(list), None) => input::parse_coefficients(&list).map(Input::Coeffs),
        (None, Some(path)) => {
            let matrix = input::read_matrix(&path)?;
            Ok(Input::Matrix { path, matrix })
        }
        _ => Err(UsageError::new("--coeffs", "exactly one of --coeffs or --matrix is required")),
    }
}

fn max_scalars_from_env() -> Result<u128, UsageError> {
    match std::env::var(MAX_SCALARS_ENV) {
        Err(_) => Ok(tlsub_core::jw::DEFAULT_MAX_SCALARS),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| UsageError::new(MAX_SCALARS_ENV, format!("expected a nonnegative integer, got {v:?}"))),
    }
}

/// Parses and validates the command line (including the first argument, the program name).
pub fn parse_input<I, T>(args: I) -> Result<Parsed, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return Ok(Parsed::Info(e.render().to_string()));
        }
        Err(e) => return Err(clap_usage(e)),
    };
    let mut cfg = RunConfig {
        command: CommandKind::Check,
        input: None,
        levels: None,
        truncate: 10,
        tol: 1e-9,
        out: None,
        csv: None,
        m: None,
        n: None,
        max_scalars: max_scalars_from_env()?,
        timings: false,
    };
    let output = match cli.command {
        Cmd::Check(o) => {
            cfg.input = Some(read_input(o.input)?);
            o.output
        }
        Cmd::NormalForm(o) => {
            cfg.command = CommandKind::NormalForm;
            cfg.input = Some(read_input(o.input)?);
            o.output
        }
        Cmd::Jw(o) => {
            cfg.command = CommandKind::Jw;
            tower_opts(&mut cfg, o)?
        }
        Cmd::Verify(o) => {
            cfg.command = CommandKind::Verify;
            tower_opts(&mut cfg, o)?
        }
        Cmd::Boundary(o) => {
            cfg.command = CommandKind::Boundary;
            tower_opts(&mut cfg, o)?
        }
        Cmd::Ktheory(o) => {
            cfg.command = CommandKind::Ktheory;
            if o.truncate == 0 {
                return Err(UsageError::new("--truncate", "must be at least 1"));
            }
            if o.m.is_some_and(|m| m < 2) {
                return Err(UsageError::new("--m", "must be at least 2"));
            }
            cfg.truncate = o.truncate;
            cfg.m = o.m;
            o.output
        }
        Cmd::Dims(o) => {
            cfg.command = CommandKind::Dims;
            if o.m < 2 {
                return Err(UsageError::new("--m", "must be at least 2"));
            }
            cfg.m = Some(o.m);
            cfg.n = Some(o.n);
            o.output
        }
    };
    if !(output.tol.is_finite() && output.tol > 0.0) {
        return Err(UsageError::new("--tol", "must be a positive number"));
    }
    cfg.tol = output.tol;
    cfg.out = output.out;
    cfg.timings = output.timings;
    Ok(Parsed::Run(Box::new(cfg)))
}

fn tower_opts(cfg: &mut RunConfig, o: TowerOpts) -> Result<OutputOpts, UsageError> {
    let min = if cfg.command == CommandKind::Jw { 1 } else { 2 };
    if o.levels.is_some_and(|n| n < min) {
        return Err(UsageError::new("--levels", format!("must be at least {min}")));
    }
    cfg.input = Some(read_input(o.input)?);
    cfg.levels = o.levels;
    cfg.csv = o.csv;
    Ok(o.output)
}

/// Default top level for dimension `m`.
pub fn default_levels(m: usize) -> usize {
    match m {
        2 => 6,
        3 => 5,
        _ => 4,
    }
}

/// Runs the command line and returns the exit status.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match parse_input(args) {
        Ok(Parsed::Run(cfg)) => cfg,
        Ok(Parsed::Info(text)) => {
            print!("{text}");
            return EXIT_PASS;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let (report, status) = run_suite(&cfg);
    let json = report.to_json();
    match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &json) {
                eprintln!("error: --out: cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
            let failed = report.checks.iter().filter(|c| !c.pass).count();
            println!(
                "{}: {} checks, {} failed, report written to {}",
                report.command,
                report.checks.len(),
                failed,
                path.display()
            );
        }
        None => print!("{json}"),
    }
    if let (Some(path), Some(table)) = (&cfg.csv, report.tables.first()) {
        if let Err(e) = std::fs::write(path, table.to_csv()) {
            eprintln!("error: --csv: cannot write {}: {e}", path.display());
            return EXIT_USAGE;
        }
    }
    status
}
