//! CSV/JSON writers and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use zkstrip::functionals::EnergyReport;

use crate::config::ResolvedConfig;

/// Writes a file atomically (temp file in the same directory, then
/// rename).
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

/// Serializes the energy-report series in the documented column order.
pub fn series_csv(reports: &[EnergyReport]) -> String {
    let mut out = String::from(EnergyReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.to_csv_row());
        out.push('\n');
    }
    out
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Run manifest: resolved config echo, software version, wall-clock
/// bounds, produced files and the exit status.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub version: String,
    pub command: String,
    pub config: ResolvedConfig,
    pub seed: u64,
    pub threads: usize,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outputs: Vec<String>,
    pub exit_status: i32,
}

impl Manifest {
    pub fn new(command: &str, config: ResolvedConfig, seed: u64, threads: usize) -> Self {
        Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            seed,
            threads,
            started_unix: unix_now(),
            finished_unix: 0.0,
            outputs: Vec::new(),
            exit_status: 0,
        }
    }

    /// Finalizes and writes the manifest atomically.
    pub fn finish(mut self, dir: &Path, exit_status: i32) -> Result<PathBuf> {
        self.finished_unix = unix_now();
        self.exit_status = exit_status;
        let path = dir.join("manifest.json");
        write_atomic(&path, &serde_json::to_string_pretty(&self)?)?;
        Ok(path)
    }
}
