//! Batch driver for the depscreen pipeline.
//!
//! A run is described by one TOML file (see [`config::RunConfig`]). The
//! `ingest`, `extract` and `search` commands each redo their upstream stages
//! and write into the configured output directory; `report` reads a finished
//! run back; `synth` writes a synthetic fixture corpus with a matching config.

pub mod config;
pub mod pipeline;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use config::RunConfig;
pub use pipeline::{cmd_extract, cmd_ingest, cmd_report, cmd_search, cmd_synth, Manifest, SynthOptions};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("no run manifest at {}", .0.display())]
    MissingManifest(PathBuf),
    #[error(transparent)]
    Runtime(#[from] anyhow::Error),
}

impl CliError {
    /// 1 for validation problems, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::MissingManifest(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "depscreen", version, about = "Interview transcript features and exhaustive classifier search")]
pub struct Cli {
    /// Run configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for the search.
    #[arg(long, global = true)]
    pub parallelism: Option<usize>,
    /// Seed overriding every seed in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse, clean and validate the corpus; write the session inventory.
    Ingest,
    /// Ingest, then write the feature matrix.
    Extract,
    /// Extract, split, and run every search block.
    Search,
    /// Print the top configurations of a finished run.
    Report {
        /// Run directory; defaults to `--out` or the config's output_dir.
        run_dir: Option<PathBuf>,
        /// Rows per table.
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Generate a synthetic corpus, labels and run config.
    Synth {
        #[arg(long, default_value_t = 189)]
        sessions: usize,
        #[arg(long, default_value_t = 0.3)]
        positive_fraction: f64,
        /// Separation between the classes; 0 plants no signal.
        #[arg(long, default_value_t = 2.0)]
        signal: f64,
        /// Sessions generated without interviewer turns.
        #[arg(long, default_value_t = 0)]
        botless: usize,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Validation("--config is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    cfg.apply_overrides(cli.out.as_deref(), cli.parallelism, cli.seed);
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one command and returns the text to print.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Ingest => Ok(cmd_ingest(&load_config(cli)?)?.summary()),
        Command::Extract => {
            let cfg = load_config(cli)?;
            let (ingested, m) = cmd_extract(&cfg)?;
            Ok(format!(
                "{}\n{} rows x {} features written to {}",
                ingested.summary(),
                m.n_rows(),
                m.n_cols(),
                cfg.output_dir.join("features.csv").display()
            ))
        }
        Command::Search => {
            let cfg = load_config(cli)?;
            let m = cmd_search(&cfg)?;
            let mut lines = vec![format!(
                "split {} train / {} test; baselines {} (always 0), {} (always 1)",
                m.split.n_train, m.split.n_test, m.baseline.accuracy_zero, m.baseline.accuracy_one
            )];
            for s in &m.searches {
                let best = s.best_accuracy.map_or("none".to_string(), |a| a.to_string());
                lines.push(format!("{}: {} configs, {} failed, best accuracy {best}", s.name, s.evaluated, s.failed));
            }
            Ok(lines.join("\n"))
        }
        Command::Report { run_dir, top } => {
            let dir = match (run_dir, &cli.out, &cli.config) {
                (Some(d), _, _) => d.clone(),
                (None, Some(out), _) => out.clone(),
                (None, None, Some(_)) => load_config(cli)?.output_dir,
                _ => return Err(CliError::Validation("report needs a run directory, --out or --config".into())),
            };
            cmd_report(&dir, *top)
        }
        Command::Synth { sessions, positive_fraction, signal, botless } => {
            let out = cli.out.as_ref().ok_or_else(|| CliError::Validation("synth needs --out".into()))?;
            let opts = SynthOptions {
                sessions: *sessions,
                positive_fraction: *positive_fraction,
                signal: *signal,
                botless: *botless,
                seed: cli.seed.unwrap_or(0),
            };
            cmd_synth(out, &opts)
        }
    }
}
