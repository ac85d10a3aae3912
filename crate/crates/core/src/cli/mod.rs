//! Command-line front end: argument parsing, config resolution and exit codes.

pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use config::{ConfigError, ExperimentConfig, Subcommand};

/// Exit status of a run that finished and all its checks held.
pub const EXIT_OK: i32 = 0;
/// A numerical check failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Bad arguments, bad config or a run that could not be carried out.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CommandArg {
    Verify,
    Ser,
    Psd,
    FilterDump,
}

impl From<CommandArg> for Subcommand {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Verify => Subcommand::Verify,
            CommandArg::Ser => Subcommand::Ser,
            CommandArg::Psd => Subcommand::Psd,
            CommandArg::FilterDump => Subcommand::FilterDump,
        }
    }
}

/// Conjugate-root OQAM / GFDM experiment runner.
#[derive(Debug, Parser)]
#[command(name = "croqam", version, about)]
pub struct Args {
    /// Experiment to run; may be omitted when the config names one.
    #[arg(value_enum)]
    pub command: Option<CommandArg>,
    /// TOML experiment config; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `run.out_dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Base RNG seed (overrides `run.seed`).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte-Carlo trials per SER point (overrides `ser.trials`).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Worker threads (overrides `run.workers`).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Run(#[from] croqam::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> Self {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }
}

/// Merges the config file, the command-line overrides and the subcommand.
pub fn resolve(args: &Args) -> Result<(Subcommand, ExperimentConfig), CliError> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let from_args = args.command.map(Subcommand::from);
    let command = match (from_args, cfg.run.subcommand) {
        (Some(a), Some(c)) if a != c => {
            return Err(CliError::Usage(format!(
                "config is for '{}' but '{}' was requested",
                c.as_str(),
                a.as_str()
            )))
        }
        (Some(a), _) => a,
        (None, Some(c)) => c,
        (None, None) => {
            return Err(CliError::Usage(
                "no subcommand given and the config names none".into(),
            ))
        }
    };
    cfg.run.subcommand = Some(command);
    if let Some(o) = &args.out {
        cfg.run.out_dir = o.clone();
    }
    if let Some(s) = args.seed {
        cfg.run.seed = s;
    }
    if let Some(t) = args.trials {
        cfg.ser.trials = t;
    }
    if let Some(w) = args.workers {
        cfg.run.workers = Some(w);
    }
    if cfg.run.workers == Some(0) {
        return Err(CliError::Usage("worker count must be positive".into()));
    }
    Ok((command, cfg))
}

fn write_manifest(cfg: &ExperimentConfig, dir: &Path) -> Result<(), CliError> {
    let path = dir.join("manifest.toml");
    std::fs::write(&path, cfg.to_toml())
        .map_err(CliError::io(format!("writing {}", path.display())))
}

/// Runs the resolved command. `Ok(true)` when every check held.
pub fn execute(command: Subcommand, cfg: &ExperimentConfig) -> Result<bool, CliError> {
    let dir = &cfg.run.out_dir;
    std::fs::create_dir_all(dir).map_err(CliError::io(format!("creating {}", dir.display())))?;
    write_manifest(cfg, dir)?;
    log::info!("{} -> {}", command.as_str(), dir.display());
    let workers = cfg.run.workers;
    croqam::ser::with_workers(workers, || match command {
        Subcommand::Verify => commands::verify(cfg),
        Subcommand::Ser => commands::ser(cfg).map(|()| true),
        Subcommand::Psd => commands::psd(cfg).map(|()| true),
        Subcommand::FilterDump => commands::filter_dump(cfg).map(|()| true),
    })?
}

pub fn run(args: Args) -> i32 {
    let outcome = resolve(&args).and_then(|(command, cfg)| execute(command, &cfg));
    match outcome {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
