//! Workflow orchestration: wires generation/loading, partitioning,
//! preconditioning, per-block solving, aggregation, residual validation,
//! reporting and telemetry into one run.

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generate::{generate_block_diagonal_spd, generate_rhs, generate_spd, BlockDiagSpec, GeneratorSpec};
use crate::hhl::{choose_config_with, hhl_solve_seeded, HhlOverrides};
use crate::mm::{load_matrix_market, load_vector};
use crate::optimizer::Policy;
use crate::partition::{aggregate, partition};
use crate::precondition::{precondition_all, unscale_solution, PreconditionStrategy, PreconditionedBlock};
use crate::report::{BlockReport, InputSummary, PhaseTimings, SolveMode, SolveReport, REPORT_SCHEMA_VERSION};
use crate::scalar::Scalar;
use crate::solvers::{conjugate_gradient, direct_solve_with_cap};
use crate::sparse::{residual, SparseMatrix};
use crate::telemetry::{epoch_millis, TelemetryRecord, TelemetryStore, TELEMETRY_SCHEMA_VERSION};
use crate::vector::DenseVector;

/// Where the system comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSource {
    /// Generate a matrix and right-hand side from a seeded spec.
    Generate(GeneratorSpec),
    /// Generate an exactly block-diagonal system from generated SPD blocks.
    GenerateBlockDiagonal(BlockDiagSpec),
    /// Load a Matrix Market matrix and a vector file.
    Files { matrix: PathBuf, rhs: PathBuf },
}

/// Fixed block size or optimizer-chosen. Serializes as an integer or the
/// string "auto".
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BlockSizeChoice {
    Fixed(usize),
    Auto,
}

impl Serialize for BlockSizeChoice {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BlockSizeChoice::Fixed(v) => serializer.serialize_u64(*v as u64),
            BlockSizeChoice::Auto => serializer.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for BlockSizeChoice {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct Visitor;
        impl serde::de::Visitor<'_> for Visitor {
            type Value = BlockSizeChoice;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                write!(f, "a positive integer or \"auto\"")
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<Self::Value, E> {
                Ok(BlockSizeChoice::Fixed(v as usize))
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<Self::Value, E> {
                if v < 1 {
                    return Err(E::custom("block size must be >= 1"));
                }
                Ok(BlockSizeChoice::Fixed(v as usize))
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<Self::Value, E> {
                if v == "auto" {
                    Ok(BlockSizeChoice::Auto)
                } else {
                    v.parse::<usize>()
                        .map(BlockSizeChoice::Fixed)
                        .map_err(|_| E::custom(format!("expected integer or \"auto\", got {v:?}")))
                }
            }
        }
        deserializer.deserialize_any(Visitor)
    }
}

impl std::str::FromStr for BlockSizeChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(BlockSizeChoice::Auto);
        }
        s.parse::<usize>()
            .map(BlockSizeChoice::Fixed)
            .map_err(|_| Error::InvalidArgument(format!("block size must be an integer or \"auto\", got {s:?}")))
    }
}

/// Everything one pipeline run needs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub input: InputSource,
    pub mode: SolveMode,
    pub block_size: BlockSizeChoice,
    pub strategy: PreconditionStrategy,
    /// Clock-register width for hhl-sim mode.
    pub clock_qubits: usize,
    /// 0 = exact amplitude readout.
    pub shots: u64,
    /// Explicit evolution-time override for hhl-sim.
    pub evolution_time: Option<f64>,
    /// Explicit rotation-constant override for hhl-sim.
    pub rotation_constant: Option<f64>,
    /// Allowed off-block mass as a fraction of ||A||_F.
    pub partition_tolerance: f64,
    /// Pass/fail threshold on the global residual.
    pub residual_tolerance: f64,
    pub cg_tolerance: f64,
    pub cg_max_iterations: usize,
    /// Worker threads for block-parallel phases; 0 = default pool.
    pub workers: usize,
    /// Densification cap for condition numbers and direct solves.
    pub dense_cap: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub telemetry_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy_path: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input: InputSource::Generate(GeneratorSpec {
                n: 64,
                density: 0.5,
                seed: 0,
                dominance: 2.0,
            }),
            mode: SolveMode::Direct,
            block_size: BlockSizeChoice::Auto,
            strategy: PreconditionStrategy::Jacobi,
            clock_qubits: 6,
            shots: 0,
            evolution_time: None,
            rotation_constant: None,
            partition_tolerance: 0.0,
            residual_tolerance: 1e-3,
            cg_tolerance: 1e-8,
            cg_max_iterations: 10_000,
            workers: 0,
            dense_cap: crate::dense::DEFAULT_DENSE_CAP,
            seed: 0,
            report_path: None,
            telemetry_path: None,
            policy_path: None,
        }
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

struct BlockSolveOutcome<T> {
    x: DenseVector<T>,
    report: BlockReport,
}

fn solve_block<T: Scalar>(
    index: usize,
    block: &PreconditionedBlock<T>,
    config: &PipelineConfig,
) -> Result<BlockSolveOutcome<T>> {
    let start = Instant::now();
    let dim = block.a_tilde.dim();
    let mut success_probability = None;
    let mut phase_exactness = None;
    let mut iterations = None;

    let x_tilde = match config.mode {
        SolveMode::Direct => direct_solve_with_cap(&block.a_tilde, &block.b_tilde, config.dense_cap)?,
        SolveMode::Cg => {
            let sol = conjugate_gradient(
                &block.a_tilde,
                &block.b_tilde,
                T::lit(config.cg_tolerance),
                config.cg_max_iterations,
                None,
            )?;
            iterations = Some(sol.iterations);
            sol.x
        }
        SolveMode::HhlSim => {
            let overrides = HhlOverrides {
                evolution_time: config.evolution_time.map(T::lit),
                rotation_constant: config.rotation_constant.map(T::lit),
            };
            let hhl_config = choose_config_with(
                &block.a_tilde,
                config.clock_qubits,
                config.shots,
                overrides,
                config.dense_cap,
            )?;
            let out = hhl_solve_seeded(block, &hhl_config, config.seed ^ index as u64)?;
            success_probability = Some(out.success_probability.to_f64_lossy());
            phase_exactness = Some(out.phase_exactness);
            out.solution
        }
    };
    let x = unscale_solution(&x_tilde, &block.preconditioner)?;

    Ok(BlockSolveOutcome {
        x,
        report: BlockReport {
            index,
            dim,
            kappa_before: block.kappa_before.map(|k| k.to_f64_lossy()),
            kappa_after: block.kappa_after.map(|k| k.to_f64_lossy()),
            success_probability,
            phase_exactness,
            iterations,
            solver_mode: config.mode,
            wall_ms: ms(start),
        },
    })
}

/// Resolve the input source into a system.
pub fn load_input<T: Scalar>(config: &PipelineConfig) -> Result<(SparseMatrix<T>, DenseVector<T>)> {
    match &config.input {
        InputSource::Generate(spec) => {
            let a = generate_spd::<T>(spec)?;
            let b = generate_rhs::<T>(spec.n, spec.seed);
            Ok((a, b))
        }
        InputSource::GenerateBlockDiagonal(spec) => generate_block_diagonal_spd::<T>(spec),
        InputSource::Files { matrix, rhs } => {
            let a = load_matrix_market::<T>(matrix)?;
            let b = load_vector::<T>(rhs)?;
            if b.len() != a.dim() {
                return Err(Error::DimensionMismatch {
                    context: "rhs file",
                    expected: a.dim(),
                    actual: b.len(),
                });
            }
            Ok((a, b))
        }
    }
}

/// Run the full pipeline: load/generate, partition (consulting the optimizer
/// when the block size is "auto"), precondition, per-block solve, unscale,
/// aggregate, validate, report, and append telemetry.
///
/// Per-block failures abort the whole solve; partial results are never
/// reported as success.
pub fn run_pipeline<T: Scalar>(config: &PipelineConfig) -> Result<SolveReport> {
    run_pipeline_with_solution::<T>(config).map(|(report, _)| report)
}

/// As [`run_pipeline`], also returning the aggregated solution vector.
pub fn run_pipeline_with_solution<T: Scalar>(
    config: &PipelineConfig,
) -> Result<(SolveReport, DenseVector<T>)> {
    let total_start = Instant::now();

    // Load or generate, then settle the block size.
    let prepare_start = Instant::now();
    let (a, b) = load_input::<T>(config).map_err(|e| e.in_phase("load"))?;
    let n = a.dim();
    let sparsity = a.sparsity();

    let mut policy = match &config.policy_path {
        Some(path) if path.exists() => Some(Policy::load(path)?),
        Some(_) => Some(Policy::new(config.seed)),
        None => None,
    };

    let (block_size, auto_block_size) = match config.block_size {
        BlockSizeChoice::Fixed(v) => (v, false),
        BlockSizeChoice::Auto => {
            let predicted = match &mut policy {
                Some(p) => p.predict_block_size(n, sparsity),
                None => Policy::new(config.seed).predict_block_size(n, sparsity),
            };
            (predicted.min(n), true)
        }
    };

    let system = partition(&a, &b, block_size, T::lit(config.partition_tolerance))
        .map_err(|e| e.in_phase("partition"))?;
    let prepare_ms = ms(prepare_start);

    // Precondition.
    let precondition_start = Instant::now();
    let blocks = precondition_all(&system, config.strategy, config.workers, config.dense_cap)
        .map_err(|e| e.in_phase("precondition"))?;
    let precondition_ms = ms(precondition_start);

    // Per-block solve, in parallel, deterministic merge by index.
    let solve_start = Instant::now();
    let solve = || -> Vec<Result<BlockSolveOutcome<T>>> {
        blocks
            .par_iter()
            .enumerate()
            .map(|(i, blk)| solve_block(i, blk, config))
            .collect()
    };
    let results = if config.workers == 0 {
        solve()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))?;
        pool.install(solve)
    };
    let mut solutions = Vec::with_capacity(results.len());
    let mut block_reports = Vec::with_capacity(results.len());
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(outcome) => {
                solutions.push(outcome.x);
                block_reports.push(outcome.report);
            }
            Err(e) => return Err(e.in_block(index).in_phase("solve")),
        }
    }
    let solve_ms = ms(solve_start);

    // Aggregate and validate against the original system.
    let aggregate_start = Instant::now();
    let x = aggregate(&solutions, &system).map_err(|e| e.in_phase("aggregate"))?;
    let aggregate_ms = ms(aggregate_start);
    let r = residual(&a, &x, &b)
        .map_err(|e| e.in_phase("validate"))?
        .to_f64_lossy();
    let pass = r < config.residual_tolerance;

    let total_ms = ms(total_start);
    let quantum_sim_ms = if config.mode == SolveMode::HhlSim {
        solve_ms
    } else {
        0.0
    };
    let classical_ms = prepare_ms
        + precondition_ms
        + aggregate_ms
        + if config.mode == SolveMode::HhlSim {
            0.0
        } else {
            solve_ms
        };

    let report = SolveReport {
        v: REPORT_SCHEMA_VERSION,
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        input: InputSummary {
            n,
            nnz: a.nnz(),
            sparsity,
        },
        mode: config.mode,
        block_size,
        auto_block_size,
        strategy: config.strategy,
        block_count: system.block_count(),
        blocks: block_reports,
        timings: PhaseTimings {
            prepare_ms,
            precondition_ms,
            solve_ms,
            aggregate_ms,
            total_ms,
        },
        residual: r,
        residual_tolerance: config.residual_tolerance,
        pass,
        seed: config.seed,
        config: serde_json::to_value(config)?,
    };

    if let Some(path) = &config.report_path {
        report.save(path)?;
    }

    let record = TelemetryRecord {
        v: TELEMETRY_SCHEMA_VERSION,
        matrix_dim: n,
        sparsity,
        block_size,
        strategy: config.strategy,
        classical_ms,
        quantum_sim_ms,
        total_ms,
        residual: r,
        timestamp: epoch_millis(),
        seed: config.seed,
    };
    if let Some(path) = &config.telemetry_path {
        let store = TelemetryStore::open(path);
        store.append(&record)?;
    }
    if let Some(p) = &mut policy {
        p.observe(&record);
        if let Some(path) = &config.policy_path {
            p.save(path)?;
        }
    }

    Ok((report, x))
}
