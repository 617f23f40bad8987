//! Command-line front end: `stats`, `concern`, `topics`, `train-eval` and
//! `ensemble`. Each command writes JSON/CSV/SVG files plus a
//! `manifest.json` into the output directory.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::RunConfig;

pub type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("configuration: {0}")]
    Config(String),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: BoxError,
    },
}

impl CliError {
    pub fn stage(&self) -> Option<&str> {
        match self {
            CliError::Stage { stage, .. } => Some(stage),
            CliError::Config(_) => Some("config"),
            _ => None,
        }
    }

    /// The single line printed on stderr when a command fails.
    pub fn to_json_line(&self) -> String {
        let value = serde_json::json!({
            "error": self.to_string(),
            "stage": self.stage(),
        });
        value.to_string()
    }
}

/// Attaches a pipeline stage name to an error.
pub trait StageExt<T> {
    fn stage(self, stage: &str) -> Result<T, CliError>;
}

impl<T, E> StageExt<T> for Result<T, E>
where
    E: std::error::Error + Send + Sync + 'static,
{
    fn stage(self, stage: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::Stage {
            stage: stage.to_string(),
            source: Box::new(e),
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "infodemic", version, about = "Fake/real news corpus analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Flat TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Labeled corpus file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Corpus format: csv or jsonl.
    #[arg(long)]
    pub format: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Corpus statistics, tag frequency tables and bar charts.
    Stats(CommonArgs),
    /// Sentiment distributions, Concern Index and significance test.
    Concern(CommonArgs),
    /// Hybrid topic clustering per class and cross-class similarity.
    Topics(CommonArgs),
    /// Cross-validated encoder and SVM, agreement ensemble, final models.
    TrainEval {
        #[command(flatten)]
        common: CommonArgs,
        /// Also cross-validate the encoder under every elimination mode.
        #[arg(long)]
        sweep: bool,
    },
    /// Agreement ensemble from two `id,label` prediction files.
    Ensemble {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        preds_a: Option<PathBuf>,
        #[arg(long)]
        preds_b: Option<PathBuf>,
        /// `id,label` gold file; defaults to the labels of --input.
        #[arg(long)]
        gold: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Stats(_) => "stats",
            Command::Concern(_) => "concern",
            Command::Topics(_) => "topics",
            Command::TrainEval { .. } => "train-eval",
            Command::Ensemble { .. } => "ensemble",
        }
    }

    fn common(&self) -> &CommonArgs {
        match self {
            Command::Stats(c) | Command::Concern(c) | Command::Topics(c) => c,
            Command::TrainEval { common, .. } | Command::Ensemble { common, .. } => common,
        }
    }
}

/// Config file (or defaults) with command-line values laid over it.
pub fn resolve_config(command: &Command) -> Result<RunConfig, CliError> {
    let common = command.common();
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &common.input {
        cfg.input = Some(v.clone());
    }
    if let Some(v) = &common.format {
        cfg.format = Some(v.clone());
    }
    if let Some(v) = &common.out {
        cfg.out = v.clone();
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    match command {
        Command::TrainEval { sweep: true, .. } => cfg.sweep = true,
        Command::Ensemble {
            preds_a,
            preds_b,
            gold,
            ..
        } => {
            if preds_a.is_some() {
                cfg.predictions_a = preds_a.clone();
            }
            if preds_b.is_some() {
                cfg.predictions_b = preds_b.clone();
            }
            if gold.is_some() {
                cfg.gold = gold.clone();
            }
        }
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one command and returns the files it wrote (manifest excluded).
pub fn run(cli: Cli) -> Result<Vec<String>, CliError> {
    let cfg = resolve_config(&cli.command)?;
    let name = cli.command.name();
    let mut out = output::OutputDir::create(&cfg.out)?;
    match cli.command {
        Command::Stats(_) => commands::stats(&cfg, &mut out)?,
        Command::Concern(_) => commands::concern(&cfg, &mut out)?,
        Command::Topics(_) => commands::topics(&cfg, &mut out)?,
        Command::TrainEval { .. } => commands::train_eval(&cfg, &mut out)?,
        Command::Ensemble { .. } => commands::ensemble(&cfg, &mut out)?,
    }
    out.finish(name, &cfg)
}
