//! Command-line front end for Choquet-integral multinomial probit models:
//! configuration, CSV ingest and export, and the `init`, `simulate`,
//! `estimate`, `analyze` and `montecarlo` commands.

pub mod commands;
pub mod config;
pub mod csv_io;
pub mod error;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{Outcome, Overrides};
use crate::config::RunConfig;
use crate::error::{exit, CliResult};

#[derive(Debug, Parser)]
#[command(name = "choquet-probit", version, about = "Choquet-integral multinomial probit estimation")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "CHOQUET_PROBIT_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a template configuration file.
    Init {
        #[arg(long, default_value = "choquet-probit.toml")]
        config: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Generate one dataset from the [dgp] section.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Estimate the [model] on a long-format CSV.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        draws: Option<usize>,
    },
    /// Capacity indices and marginal effects of a saved estimate.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        result: Option<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        draws: Option<usize>,
    },
    /// Simulate, estimate and score replications of the [dgp] section.
    Montecarlo {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        draws: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Use the full-scale sample size and replication count.
        #[arg(long)]
        full_scale: bool,
    },
}

fn load(path: &std::path::Path, ov: Overrides) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::load(path)?;
    ov.apply(&mut cfg);
    cfg.optimizer.validate()?;
    Ok(cfg)
}

/// Runs a parsed command and returns its outcome.
pub fn execute(command: Command) -> CliResult<Outcome> {
    match command {
        Command::Init { config, force } => {
            commands::init(&config, force)?;
            Ok(Outcome::Done)
        }
        Command::Simulate { config, out, seed } => {
            let cfg = load(&config, Overrides { seed, ..Overrides::default() })?;
            commands::simulate(&cfg, &out)
        }
        Command::Estimate { config, data, out, draws } => {
            let cfg = load(&config, Overrides { draws, ..Overrides::default() })?;
            commands::estimate(&cfg, data.as_deref(), &out)
        }
        Command::Analyze {
            config,
            result,
            data,
            out,
            draws,
        } => {
            let cfg = load(&config, Overrides { draws, ..Overrides::default() })?;
            commands::analyze(&cfg, result.as_deref(), data.as_deref(), &out)
        }
        Command::Montecarlo {
            config,
            out,
            draws,
            seed,
            full_scale,
        } => {
            let cfg = load(&config, Overrides { draws, seed, full_scale })?;
            commands::montecarlo(&cfg, &out)
        }
    }
}

/// Parses `args`, runs the command and maps the result to an exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::CONFIG } else { exit::OK };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return exit::CONFIG;
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match execute(cli.command) {
        Ok(Outcome::Done) => exit::OK,
        Ok(Outcome::NotConverged) => {
            eprintln!("warning: optimizer did not converge; outputs were written");
            exit::NOT_CONVERGED
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

