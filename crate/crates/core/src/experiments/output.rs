//! CSV + metadata sidecar writing, and replay from a sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::ExperimentConfig;
use super::random::RNG_NAME;
use super::runners::Report;
use crate::error::{Error, Result};
use crate::evolution::SUBSTEP_ORDER;

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub rng: String,
    pub substep_order: String,
    pub version: String,
    pub timestamp: String,
    pub csv_header: String,
    pub summary: Value,
}

impl Metadata {
    pub fn new(cfg: &ExperimentConfig, report: &Report, timestamp: &str) -> Self {
        Self {
            experiment: cfg.experiment.to_string(),
            config: cfg.clone(),
            seed: cfg.seed,
            rng: RNG_NAME.to_string(),
            substep_order: SUBSTEP_ORDER.to_string(),
            version: CODE_VERSION.to_string(),
            timestamp: timestamp.to_string(),
            csv_header: report.header.clone(),
            summary: report.summary.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WrittenFiles {
    pub csv: PathBuf,
    pub meta: PathBuf,
}

fn stem(cfg: &ExperimentConfig, timestamp: &str) -> PathBuf {
    cfg.output_dir.join(format!("{}_{}", cfg.experiment, timestamp))
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes `<out>/<experiment>_<timestamp>.csv` and `.meta.json`.
pub fn write_report(cfg: &ExperimentConfig, report: &Report, timestamp: &str) -> Result<WrittenFiles> {
    fs::create_dir_all(&cfg.output_dir)?;
    let stem = stem(cfg, timestamp);
    let csv = with_suffix(&stem, ".csv");
    let meta = with_suffix(&stem, ".meta.json");
    fs::write(&csv, report.csv())?;
    let m = Metadata::new(cfg, report, timestamp);
    fs::write(&meta, serde_json::to_string_pretty(&m)?)?;
    Ok(WrittenFiles { csv, meta })
}

/// `<out>/<experiment>_<timestamp>.error.json` for a numerical abort.
pub fn write_diagnostic(cfg: &ExperimentConfig, err: &Error, timestamp: &str) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.output_dir)?;
    let path = with_suffix(&stem(cfg, timestamp), ".error.json");
    let diag = serde_json::json!({
        "experiment": cfg.experiment.to_string(),
        "error": err.to_string(),
        "details": error_details(err),
        "config": cfg,
        "version": CODE_VERSION,
        "timestamp": timestamp,
    });
    fs::write(&path, serde_json::to_string_pretty(&diag)?)?;
    Ok(path)
}

fn error_details(err: &Error) -> Value {
    match err {
        Error::Propagation { step, t_lens, reason } => {
            serde_json::json!({"kind": "propagation", "step": step, "t_lens": t_lens, "reason": reason})
        }
        Error::NonConvergence { iterations, residual, reason } => {
            serde_json::json!({"kind": "non_convergence", "iterations": iterations, "residual": residual, "reason": reason})
        }
        Error::SingularJacobian(msg) => serde_json::json!({"kind": "singular_jacobian", "reason": msg}),
        other => serde_json::json!({"kind": "other", "reason": other.to_string()}),
    }
}

/// True for failures of the numerics rather than of the inputs.
pub fn is_numerical(err: &Error) -> bool {
    matches!(
        err,
        Error::Propagation { .. } | Error::NonConvergence { .. } | Error::SingularJacobian(_) | Error::Domain(_)
    )
}

pub fn read_metadata(path: &Path) -> Result<Metadata> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read metadata {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("bad metadata {}: {e}", path.display())))
}
