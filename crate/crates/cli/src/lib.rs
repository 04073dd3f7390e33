//! Configuration, experiment orchestration and report emission for `whlab`.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` rejects NaN on purpose

pub mod builtins;
pub mod config;
pub mod experiments;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use config::{load_config, ExperimentConfig, SchemaError};
use report::{all_pass, write_report, Outcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error at {0}")]
    Usage(#[from] SchemaError),
    #[error("cannot write report to {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Io { .. } => 3,
        }
    }
}

pub struct RunSummary {
    pub out_dir: PathBuf,
    pub outcome: Outcome,
    pub pass: bool,
}

/// Loads `config_path`, applies the seed override and runs the experiment.
pub fn prepare(config_path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, CliError> {
    let mut config = load_config(config_path)?;
    if let Some(op) = &config.operator {
        // Surfaces unreadable kernel files and off-grid parameters at validation time.
        op.build(config.grid.step, config.space_spec(), config_path.parent().unwrap_or(Path::new(".")))?;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    Ok(config)
}

/// `whlab run`: writes the report into `out` (or the configured directory)
/// and returns the verdict summary.
pub fn run(config_path: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<RunSummary, CliError> {
    let config = prepare(config_path, seed)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let out_dir = match (out, &config.output) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(o)) => o.dir.clone(),
        (None, None) => PathBuf::from("whlab-out"),
    };
    let start = Instant::now();
    let outcome = experiments::run_experiment(&config, base)?;
    let run_info = json!({
        "timestamp": chrono::Utc::now().to_rfc3339(),
        "config_path": config_path.display().to_string(),
        "out_dir": out_dir.display().to_string(),
        "elapsed_seconds": start.elapsed().as_secs_f64(),
        "config_hash": report::config_hash(&config),
    });
    write_report(&out_dir, &config, &outcome, &run_info).map_err(|source| CliError::Io { path: out_dir.clone(), source })?;
    let pass = all_pass(&outcome);
    Ok(RunSummary { out_dir, outcome, pass })
}
