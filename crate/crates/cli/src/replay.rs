//! Run metadata and replay verification.
//!
//! Every report directory carries a `metadata.json` with the resolved
//! configuration and everything else needed to reproduce the run
//! bit-exactly.  `replay` re-executes the recorded command into a scratch
//! directory and byte-compares every table against the original.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config_file::FileConfig;
use crate::error::CliError;
use crate::parallel::RayonExecutor;
use crate::study::{run_calibrate_cmd, run_study_cmd, Progress};

pub const METADATA_FILE: &str = "metadata.json";

/// Reproducibility record for one report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetadata {
    /// Version of the tool that produced the report.
    pub tool_version: String,
    /// "study" or "calibrate".
    pub command: String,
    pub seed: u64,
    /// Worker count of the original run (informational; results do not
    /// depend on it).
    pub workers: usize,
    /// Whether the reduced-scale preset was applied (already folded into
    /// the embedded config).
    pub desk_preset: bool,
    pub wall_time_seconds: f64,
    /// Tables to compare on replay, in write order.
    pub tables: Vec<String>,
    /// The fully resolved configuration (normalized TOML).
    pub config_toml: String,
}

pub fn write_metadata(dir: &Path, meta: &RunMetadata) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(meta)
        .map_err(|e| CliError::Runtime(format!("metadata serialization: {e}")))?;
    fs::write(dir.join(METADATA_FILE), json + "\n")?;
    Ok(())
}

pub fn read_metadata(dir: &Path) -> Result<RunMetadata, CliError> {
    let path = dir.join(METADATA_FILE);
    let text = fs::read_to_string(&path).map_err(|e| {
        CliError::Runtime(format!("cannot read {}: {e}", path.display()))
    })?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Runtime(format!("malformed {}: {e}", path.display())))
}

/// Per-file and overall comparison outcome.
#[derive(Debug, Clone, Serialize)]
pub struct ReplayVerdict {
    /// "identical" or "diverged".
    pub verdict: String,
    /// False when the replaying binary's version differs from the
    /// recording one's (reported, never silently ignored).
    pub version_match: bool,
    pub recorded_version: String,
    pub current_version: String,
    /// (table, matched) in comparison order.
    pub compared: Vec<(String, bool)>,
}

impl ReplayVerdict {
    pub fn identical(&self) -> bool {
        self.verdict == "identical"
    }
}

/// Re-runs the recorded command with `workers` threads and byte-compares
/// all tables.  The scratch directory lives under the system temp dir and
/// is removed afterwards.
pub fn replay(report_dir: &Path, workers: usize, progress: &Progress) -> Result<ReplayVerdict, CliError> {
    let meta = read_metadata(report_dir)?;
    let current_version = env!("CARGO_PKG_VERSION").to_string();
    let version_match = meta.tool_version == current_version;
    if !version_match {
        progress.stage(&format!(
            "version mismatch: report from {}, replaying with {}",
            meta.tool_version, current_version
        ));
    }

    let config = FileConfig::from_toml(&meta.config_toml)?;
    let settings = config.resolve()?;
    let exec = RayonExecutor::new(workers)?;

    let scratch = scratch_dir(report_dir)?;
    progress.stage(&format!(
        "replaying `{}` (seed {}, {} workers) into {}",
        meta.command,
        settings.config.seed,
        workers,
        scratch.display()
    ));
    let run_result = match meta.command.as_str() {
        "study" => run_study_cmd(&exec, &settings, &scratch, progress),
        "calibrate" => run_calibrate_cmd(&exec, &settings, &scratch, progress),
        other => Err(CliError::Runtime(format!("metadata records unknown command {other:?}"))),
    };
    let produced = match run_result {
        Ok(tables) => tables,
        Err(e) => {
            let _ = fs::remove_dir_all(&scratch);
            return Err(e);
        }
    };

    let mut compared = Vec::with_capacity(meta.tables.len());
    let mut all_match = produced == meta.tables;
    for table in &meta.tables {
        let original = fs::read(report_dir.join(table)).map_err(|e| {
            CliError::Runtime(format!("cannot read recorded table {table}: {e}"))
        });
        let fresh = fs::read(scratch.join(table));
        let matched = match (original, fresh) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        };
        all_match &= matched;
        progress.detail(&format!("{table}: {}", if matched { "identical" } else { "DIVERGED" }));
        compared.push((table.clone(), matched));
    }
    let _ = fs::remove_dir_all(&scratch);

    Ok(ReplayVerdict {
        verdict: if all_match { "identical" } else { "diverged" }.to_string(),
        version_match,
        recorded_version: meta.tool_version,
        current_version,
        compared,
    })
}

/// Unique scratch directory for this replay invocation.
fn scratch_dir(report_dir: &Path) -> Result<PathBuf, CliError> {
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos())
        .unwrap_or(0);
    let name = format!(
        "cadence-replay-{}-{}-{stamp}",
        std::process::id(),
        report_dir.file_name().and_then(|n| n.to_str()).unwrap_or("report")
    );
    let dir = std::env::temp_dir().join(name);
    fs::create_dir_all(&dir)?;
    Ok(dir)
}
