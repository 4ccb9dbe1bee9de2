//! Run outputs: the iteration log, the summary and JSON helpers.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use resent_core::systems::{ReferenceValues, SystemParams};
use resent_core::IterationRecord;

use crate::config::ConfigFile;
use crate::error::{CliError, Result};

pub const ITERATIONS_CSV: &str = "iterations.csv";
pub const BEST_METRIC_JSON: &str = "best_metric.json";
pub const SUMMARY_JSON: &str = "summary.json";
pub const CONVERGENCE_SVG: &str = "convergence.svg";

/// Column names of `iterations.csv` for an `n`-dimensional system.
pub fn csv_header(n: usize) -> Vec<String> {
    let mut h: Vec<String> = ["k", "theta", "value", "best_value", "k_star", "subgrad_norm", "gap_ok"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend((1..=n).map(|i| format!("x_star_{i}")));
    h.push("wall_time_ms".into());
    h
}

/// One CSV row. Floats use the shortest representation that round-trips.
pub fn csv_row(r: &IterationRecord) -> Vec<String> {
    let mut row = vec![
        r.k.to_string(),
        r.theta.to_string(),
        r.value.to_string(),
        r.best_value.to_string(),
        r.k_star.to_string(),
        r.subgrad_norm.to_string(),
        r.gap_ok.to_string(),
    ];
    row.extend(r.x_star.iter().map(|v| v.to_string()));
    row.push(format!("{:.3}", r.wall_time_ms));
    row
}

/// Streams iteration records to `iterations.csv`, flushing after each row
/// so that aborted runs keep their log.
pub struct IterationLog {
    path: PathBuf,
    writer: csv::Writer<File>,
}

impl IterationLog {
    pub fn create(dir: &Path, n: usize) -> Result<Self> {
        let path = dir.join(ITERATIONS_CSV);
        let file = File::create(&path).map_err(|e| CliError::output(&path, e))?;
        let mut writer = csv::Writer::from_writer(file);
        writer.write_record(csv_header(n)).map_err(|e| csv_error(&path, e))?;
        writer.flush().map_err(|e| CliError::output(&path, e))?;
        Ok(Self { path, writer })
    }

    pub fn append(&mut self, r: &IterationRecord) -> Result<()> {
        self.writer.write_record(csv_row(r)).map_err(|e| csv_error(&self.path, e))?;
        self.writer.flush().map_err(|e| CliError::output(&self.path, e))
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::output(path, std::io::Error::other(e))
}

/// The `(k, value, best_value)` columns of an iteration log.
pub fn read_values(path: &Path) -> Result<Vec<(usize, f64, f64)>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let bad = |what: &str| CliError::Config(format!("{}: malformed {what}", path.display()));
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let k = row.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| bad("k"))?;
        let value = row.get(2).and_then(|s| s.parse().ok()).ok_or_else(|| bad("value"))?;
        let best = row.get(3).and_then(|s| s.parse().ok()).ok_or_else(|| bad("best_value"))?;
        out.push((k, value, best));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    MaxIters,
    ZeroSubgradient,
    Aborted,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub system: String,
    pub params: SystemParams,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub best_value: Option<f64>,
    pub best_iteration: Option<usize>,
    pub initial_value: Option<f64>,
    pub final_value: Option<f64>,
    pub iterations: usize,
    /// Iterations whose spectral gap at `k*` was below tolerance.
    pub gap_warnings: usize,
    pub reference: ReferenceValues,
    pub wall_time_s: f64,
    pub config: ConfigFile,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::output(path, std::io::Error::other(e)))?;
    text.push('\n');
    let mut f = File::create(path).map_err(|e| CliError::output(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| CliError::output(path, e))
}
