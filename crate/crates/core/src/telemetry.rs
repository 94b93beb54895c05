//! Append-only newline-delimited JSON telemetry store.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precondition::PreconditionStrategy;

pub const TELEMETRY_SCHEMA_VERSION: u32 = 1;

/// Milliseconds of slack allowed between `total_ms` and the sum of its
/// parts, covering timer rounding.
const ROUNDING_SLACK_MS: f64 = 1.0;

/// One pipeline run, as stored in the telemetry file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRecord {
    /// Schema version.
    pub v: u32,
    pub matrix_dim: usize,
    /// Fraction of stored entries over n*n.
    pub sparsity: f64,
    pub block_size: usize,
    pub strategy: PreconditionStrategy,
    pub classical_ms: f64,
    pub quantum_sim_ms: f64,
    pub total_ms: f64,
    pub residual: f64,
    /// Unix epoch milliseconds.
    pub timestamp: u64,
    pub seed: u64,
}

impl TelemetryRecord {
    /// Derive a record from a finished solve report.
    pub fn from_report(report: &crate::report::SolveReport) -> Self {
        let t = &report.timings;
        let quantum_sim_ms = if report.mode == crate::report::SolveMode::HhlSim {
            t.solve_ms
        } else {
            0.0
        };
        TelemetryRecord {
            v: TELEMETRY_SCHEMA_VERSION,
            matrix_dim: report.input.n,
            sparsity: report.input.sparsity,
            block_size: report.block_size,
            strategy: report.strategy,
            classical_ms: t.prepare_ms + t.precondition_ms + t.aggregate_ms
                + (t.solve_ms - quantum_sim_ms),
            quantum_sim_ms,
            total_ms: t.total_ms,
            residual: report.residual,
            timestamp: epoch_millis(),
            seed: report.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.v != TELEMETRY_SCHEMA_VERSION {
            return Err(Error::InvalidRecord(format!(
                "schema version {} (expected {TELEMETRY_SCHEMA_VERSION})",
                self.v
            )));
        }
        for (name, value) in [
            ("classical_ms", self.classical_ms),
            ("quantum_sim_ms", self.quantum_sim_ms),
            ("total_ms", self.total_ms),
        ] {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::InvalidRecord(format!("{name} = {value}")));
            }
        }
        if self.total_ms + ROUNDING_SLACK_MS < self.classical_ms + self.quantum_sim_ms {
            return Err(Error::InvalidRecord(format!(
                "total_ms {} below classical_ms + quantum_sim_ms = {}",
                self.total_ms,
                self.classical_ms + self.quantum_sim_ms
            )));
        }
        if !(self.residual >= 0.0) {
            return Err(Error::InvalidRecord(format!("residual = {}", self.residual)));
        }
        if self.matrix_dim == 0 || self.block_size == 0 {
            return Err(Error::InvalidRecord("zero dimension or block size".into()));
        }
        Ok(())
    }
}

/// Append-only NDJSON file of telemetry records. A single writer at a time;
/// concurrent readers are fine.
#[derive(Clone, Debug)]
pub struct TelemetryStore {
    path: PathBuf,
}

impl TelemetryStore {
    pub fn open(path: impl AsRef<Path>) -> Self {
        Self {
            path: path.as_ref().to_path_buf(),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Validate and durably append one record.
    pub fn append(&self, record: &TelemetryRecord) -> Result<()> {
        record.validate()?;
        let mut file = OpenOptions::new().create(true).append(true).open(&self.path)?;
        let mut line = serde_json::to_string(record)?;
        line.push('\n');
        file.write_all(line.as_bytes())?;
        file.flush()?;
        Ok(())
    }

    /// Load every record in file order.
    pub fn load(&self) -> Result<Vec<TelemetryRecord>> {
        if !self.path.exists() {
            return Ok(Vec::new());
        }
        let reader = BufReader::new(std::fs::File::open(&self.path)?);
        let mut records = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: TelemetryRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: idx + 1,
                message: format!("bad telemetry record: {e}"),
            })?;
            records.push(record);
        }
        Ok(records)
    }
}

/// Current time as Unix epoch milliseconds.
pub fn epoch_millis() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}
