//! Command-line front end: argument parsing, thread setup, dispatch and
//! exit codes.
//!
//! Exit codes: 0 success, 1 a binding check failed, 2 configuration or
//! usage error, 3 integration failure.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

pub use commands::{cmd_converge, cmd_jastrow_check, cmd_report, cmd_sphere_check};
pub use config::{Format, RunConfig};
pub use output::{Outcome, Row};

use crate::error::{CuspError, Result};

pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INTEGRATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cusplab", version, about = "Nuclear cusp identities and bounds for atomic densities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (default: the config's output.path, else stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (fallback: CUSPLAB_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cusp identities, derivative routes and bounds for the configured model.
    Report,
    /// Second-moment residuals of the spherical rules.
    SphereCheck {
        /// Rule degrees (default: all shipped rules).
        #[arg(long = "degree", value_delimiter = ',')]
        degrees: Vec<u32>,
        /// Random vectors and matrices per rule.
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Jastrow contraction identities and regularity diagnostics.
    JastrowCheck,
    /// Convergence of the density at a point under refinement.
    Converge,
}

/// Maps an error to its exit code.
pub fn exit_code(e: &CuspError) -> i32 {
    match e {
        CuspError::IntegrationFailure { .. }
        | CuspError::NonFinite { .. }
        | CuspError::SingularPoint(_)
        | CuspError::Consistency(_) => EXIT_INTEGRATION,
        CuspError::Config(_)
        | CuspError::Domain(_)
        | CuspError::UnsupportedModel(_)
        | CuspError::DimensionMismatch { .. }
        | CuspError::Io(_) => EXIT_CONFIG,
    }
}

fn configure_threads(requested: Option<usize>) -> Result<()> {
    let n = match requested {
        Some(n) => Some(n),
        None => match std::env::var("CUSPLAB_THREADS") {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| CuspError::Config(format!("CUSPLAB_THREADS must be a positive integer, got {v:?}")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(CuspError::Config("thread count must be positive".into()));
        }
        // A pool built earlier in the process (e.g. by a test) stays in place.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CuspError::Config("this subcommand needs --config PATH".into()))?;
    let config = RunConfig::load(path)?.with_seed(cli.seed);
    Ok(config)
}

fn emit<T: Serialize>(cli: &Cli, config: Option<&RunConfig>, outcome: &Outcome<T>) -> Result<i32> {
    let format = cli
        .format
        .or(config.map(|c| c.output.format))
        .unwrap_or_default();
    let path = cli.out.clone().or_else(|| config.and_then(|c| c.output.path.clone()));
    let text = outcome.render(format)?;
    match path {
        Some(p) => std::fs::write(&p, text)?,
        None => print!("{text}"),
    }
    Ok(outcome.exit_code)
}

fn dispatch(cli: &Cli) -> Result<i32> {
    configure_threads(cli.threads)?;
    match &cli.command {
        Command::Report => {
            let c = load_config(cli)?;
            emit(cli, Some(&c), &cmd_report(&c)?)
        }
        Command::SphereCheck { degrees, trials } => {
            let c = cli.config.as_ref().map(|_| load_config(cli)).transpose()?;
            let seed = cli.seed.or(c.as_ref().map(RunConfig::seed)).unwrap_or(0);
            emit(cli, c.as_ref(), &cmd_sphere_check(degrees, *trials, seed)?)
        }
        Command::JastrowCheck => {
            let c = load_config(cli)?;
            emit(cli, Some(&c), &cmd_jastrow_check(&c)?)
        }
        Command::Converge => {
            let c = load_config(cli)?;
            emit(cli, Some(&c), &cmd_converge(&c)?)
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Parses `args` (including the program name) and runs; usage errors exit 2.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_CONFIG
            } else {
                0
            }
        }
    }
}
