//! Solve reports: the JSON document a pipeline run produces.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precondition::PreconditionStrategy;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Which solver handles the preconditioned blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveMode {
    #[serde(rename = "hhl-sim")]
    HhlSim,
    #[serde(rename = "cg")]
    Cg,
    #[serde(rename = "direct")]
    Direct,
}

impl std::fmt::Display for SolveMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolveMode::HhlSim => write!(f, "hhl-sim"),
            SolveMode::Cg => write!(f, "cg"),
            SolveMode::Direct => write!(f, "direct"),
        }
    }
}

impl std::str::FromStr for SolveMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hhl-sim" => Ok(SolveMode::HhlSim),
            "cg" => Ok(SolveMode::Cg),
            "direct" => Ok(SolveMode::Direct),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode {other:?} (expected \"hhl-sim\", \"cg\" or \"direct\")"
            ))),
        }
    }
}

/// Shape summary of the solved system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub n: usize,
    pub nnz: usize,
    pub sparsity: f64,
}

/// Per-block diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub index: usize,
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_before: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_after: Option<f64>,
    /// Ancilla post-selection probability (hhl-sim only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_exactness: Option<bool>,
    /// CG iteration count (cg only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    pub solver_mode: SolveMode,
    pub wall_ms: f64,
}

/// Wall-clock milliseconds per pipeline phase.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub prepare_ms: f64,
    pub precondition_ms: f64,
    pub solve_ms: f64,
    pub aggregate_ms: f64,
    pub total_ms: f64,
}

/// Full record of one pipeline run. The global residual is recomputed from
/// the final solution against the original system, never the preconditioned
/// one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub v: u32,
    pub software_version: String,
    pub input: InputSummary,
    pub mode: SolveMode,
    /// Block size actually used.
    pub block_size: usize,
    /// True when the optimizer chose the block size.
    pub auto_block_size: bool,
    pub strategy: PreconditionStrategy,
    pub block_count: usize,
    pub blocks: Vec<BlockReport>,
    pub timings: PhaseTimings,
    /// `||A x - b|| / ||b||` against the original system.
    pub residual: f64,
    pub residual_tolerance: f64,
    pub pass: bool,
    pub seed: u64,
    /// Echo of the configuration that produced this report.
    pub config: serde_json::Value,
}

impl SolveReport {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path.as_ref(), json)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let data = std::fs::read_to_string(path.as_ref())?;
        Ok(serde_json::from_str(&data)?)
    }
}
