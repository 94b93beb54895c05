//! `hqsolve`: generate, solve, benchmark, tune, and inspect block-partitioned
//! Hermitian positive-definite systems.
//!
//! Exit codes: 0 pass, 1 accuracy failure, 2 usage error, 3 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hqsolve_core::generate::{
    generate_block_diagonal_spd, generate_rhs, generate_spd, BlockDiagSpec, GeneratorSpec,
};
use hqsolve_core::mm::{save_matrix_market, save_vector_plain};
use hqsolve_core::optimizer::{tune, Policy, WorkloadSpec};
use hqsolve_core::pipeline::{run_pipeline, BlockSizeChoice, InputSource, PipelineConfig};
use hqsolve_core::precondition::PreconditionStrategy;
use hqsolve_core::report::{SolveMode, SolveReport};
use hqsolve_core::telemetry::{TelemetryRecord, TelemetryStore};

const EXIT_PASS: u8 = 0;
const EXIT_ACCURACY: u8 = 1;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "hqsolve", version, about = "Hybrid solver for sparse Hermitian positive-definite systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded SPD system as a Matrix Market file plus a
    /// right-hand-side vector file.
    Generate(GenerateArgs),
    /// Run the solve pipeline and report the residual.
    Solve(SolveArgs),
    /// Sweep sizes, modes and block sizes over seeded systems; emit CSV.
    Bench(BenchArgs),
    /// Run optimizer episodes against generated workloads.
    Tune(TuneArgs),
    /// Pretty-print a solve report.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Matrix dimension.
    #[arg(long)]
    n: usize,
    /// Off-diagonal density in (0, 1].
    #[arg(long)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Diagonal dominance factor, >= 1.
    #[arg(long, default_value_t = 2.0)]
    dominance: f64,
    /// Assemble an exactly block-diagonal system with this native block size.
    #[arg(long)]
    block_diagonal: Option<usize>,
    /// Output path for the matrix (.mtx).
    #[arg(long, default_value = "matrix.mtx")]
    out: PathBuf,
    /// Output path for the right-hand side (plain text, "re im" per line).
    #[arg(long, default_value = "rhs.txt")]
    rhs_out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Matrix Market input file (with --rhs).
    #[arg(long, requires = "rhs")]
    matrix: Option<PathBuf>,
    /// Right-hand-side vector file.
    #[arg(long)]
    rhs: Option<PathBuf>,
    /// Generate the system instead of loading it: dimension.
    #[arg(long, conflicts_with = "matrix")]
    gen_n: Option<usize>,
    /// Generated off-diagonal density.
    #[arg(long, default_value_t = 0.5)]
    gen_density: f64,
    /// Generated diagonal dominance.
    #[arg(long, default_value_t = 2.0)]
    gen_dominance: f64,
    /// Generate block-diagonal with this native block size.
    #[arg(long)]
    gen_block_diagonal: Option<usize>,
    /// Solver mode: hhl-sim, cg, or direct.
    #[arg(long)]
    mode: Option<SolveMode>,
    /// Block size (integer) or "auto".
    #[arg(long)]
    block_size: Option<BlockSizeChoice>,
    /// Preconditioning strategy: none or jacobi.
    #[arg(long)]
    strategy: Option<PreconditionStrategy>,
    /// Clock-register width for hhl-sim.
    #[arg(long)]
    clock_qubits: Option<usize>,
    /// Measurement shots for hhl-sim (0 = exact readout).
    #[arg(long)]
    shots: Option<u64>,
    /// Explicit evolution-time override for hhl-sim.
    #[arg(long)]
    evolution_time: Option<f64>,
    /// Explicit rotation-constant override for hhl-sim.
    #[arg(long)]
    rotation_constant: Option<f64>,
    /// Allowed off-block mass as a fraction of the Frobenius norm.
    #[arg(long)]
    partition_tolerance: Option<f64>,
    /// Pass/fail threshold on the global residual.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    cg_tolerance: Option<f64>,
    #[arg(long)]
    cg_max_iterations: Option<usize>,
    /// Worker threads for the parallel phases (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Append a telemetry record here (NDJSON).
    #[arg(long)]
    telemetry: Option<PathBuf>,
    /// Load/persist the block-size policy here (JSON).
    #[arg(long)]
    policy: Option<PathBuf>,
    /// JSON config file; explicit flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated system sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    /// Comma-separated modes (hhl-sim, cg, direct).
    #[arg(long, value_delimiter = ',', required = true)]
    modes: Vec<SolveMode>,
    /// Comma-separated block sizes to sweep.
    #[arg(long, value_delimiter = ',', default_value = "8")]
    block_sizes: Vec<usize>,
    /// Within-block off-diagonal density.
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long, default_value_t = 2.0)]
    dominance: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 6)]
    clock_qubits: usize,
    /// Preconditioning strategy for all runs.
    #[arg(long, default_value = "jacobi")]
    strategy: PreconditionStrategy,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TuneArgs {
    #[arg(long)]
    episodes: usize,
    /// Workload dimension.
    #[arg(long)]
    n: usize,
    /// Within-block off-diagonal density.
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long, default_value_t = 2.0)]
    dominance: f64,
    /// Solver mode the episodes run in.
    #[arg(long, default_value = "direct")]
    mode: SolveMode,
    #[arg(long, default_value_t = 6)]
    clock_qubits: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Policy file to load (if present) and persist.
    #[arg(long)]
    policy: PathBuf,
    /// Telemetry store to append episode records to.
    #[arg(long)]
    telemetry: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Report JSON file to pretty-print.
    #[arg(long)]
    file: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // clap exits 0 for --help/--version and 2 for usage errors.
        Err(e) => e.exit(),
    };
    let outcome = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Tune(args) => cmd_tune(args),
        Command::Report(args) => cmd_report(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn cmd_generate(args: GenerateArgs) -> hqsolve_core::Result<u8> {
    let (a, b) = match args.block_diagonal {
        Some(block_size) => generate_block_diagonal_spd::<f64>(&BlockDiagSpec {
            n: args.n,
            block_size,
            density: args.density,
            seed: args.seed,
            dominance: args.dominance,
        })?,
        None => {
            let spec = GeneratorSpec {
                n: args.n,
                density: args.density,
                seed: args.seed,
                dominance: args.dominance,
            };
            (generate_spd::<f64>(&spec)?, generate_rhs::<f64>(args.n, args.seed))
        }
    };
    save_matrix_market(&a, &args.out)?;
    save_vector_plain(&b, &args.rhs_out)?;
    println!(
        "wrote {} ({}x{}, {} nonzeros) and {}",
        args.out.display(),
        a.dim(),
        a.dim(),
        a.nnz(),
        args.rhs_out.display()
    );
    Ok(EXIT_PASS)
}

fn solve_config(args: &SolveArgs) -> hqsolve_core::Result<PipelineConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<PipelineConfig>(&text)?
        }
        None => PipelineConfig::default(),
    };

    if let (Some(matrix), Some(rhs)) = (&args.matrix, &args.rhs) {
        config.input = InputSource::Files {
            matrix: matrix.clone(),
            rhs: rhs.clone(),
        };
    } else if let Some(n) = args.gen_n {
        let seed = args.seed.unwrap_or(config.seed);
        config.input = match args.gen_block_diagonal {
            Some(block_size) => InputSource::GenerateBlockDiagonal(BlockDiagSpec {
                n,
                block_size,
                density: args.gen_density,
                seed,
                dominance: args.gen_dominance,
            }),
            None => InputSource::Generate(GeneratorSpec {
                n,
                density: args.gen_density,
                seed,
                dominance: args.gen_dominance,
            }),
        };
    } else if args.config.is_none() {
        return Err(hqsolve_core::Error::InvalidArgument(
            "provide --matrix/--rhs, --gen-n, or --config".into(),
        ));
    }

    macro_rules! override_field {
        ($field:ident, $arg:expr) => {
            if let Some(v) = $arg {
                config.$field = v;
            }
        };
    }
    override_field!(mode, args.mode);
    override_field!(block_size, args.block_size);
    override_field!(strategy, args.strategy);
    override_field!(clock_qubits, args.clock_qubits);
    override_field!(shots, args.shots);
    override_field!(partition_tolerance, args.partition_tolerance);
    override_field!(residual_tolerance, args.tolerance);
    override_field!(cg_tolerance, args.cg_tolerance);
    override_field!(cg_max_iterations, args.cg_max_iterations);
    override_field!(workers, args.workers);
    override_field!(seed, args.seed);
    if args.evolution_time.is_some() {
        config.evolution_time = args.evolution_time;
    }
    if args.rotation_constant.is_some() {
        config.rotation_constant = args.rotation_constant;
    }
    if args.report.is_some() {
        config.report_path = args.report.clone();
    }
    if args.telemetry.is_some() {
        config.telemetry_path = args.telemetry.clone();
    }
    if args.policy.is_some() {
        config.policy_path = args.policy.clone();
    }
    Ok(config)
}

fn cmd_solve(args: SolveArgs) -> hqsolve_core::Result<u8> {
    let hhl_flags_given = args.clock_qubits.is_some()
        || args.shots.is_some()
        || args.evolution_time.is_some()
        || args.rotation_constant.is_some();
    let config = solve_config(&args)?;
    if config.mode != SolveMode::HhlSim && hhl_flags_given {
        eprintln!(
            "warning: HHL parameters are ignored in {} mode",
            config.mode
        );
    }
    let report = run_pipeline::<f64>(&config)?;
    print_report_summary(&report);
    Ok(if report.pass { EXIT_PASS } else { EXIT_ACCURACY })
}

fn cmd_bench(args: BenchArgs) -> hqsolve_core::Result<u8> {
    let mut rows = Vec::new();
    for &n in &args.sizes {
        for &mode in &args.modes {
            for &block_size in &args.block_sizes {
                let config = PipelineConfig {
                    input: InputSource::GenerateBlockDiagonal(BlockDiagSpec {
                        n,
                        block_size,
                        density: args.density,
                        seed: args.seed,
                        dominance: args.dominance,
                    }),
                    mode,
                    block_size: BlockSizeChoice::Fixed(block_size),
                    strategy: args.strategy,
                    clock_qubits: args.clock_qubits,
                    seed: args.seed,
                    ..PipelineConfig::default()
                };
                let report = run_pipeline::<f64>(&config)?;
                let record = TelemetryRecord::from_report(&report);
                rows.push(format!(
                    "{},{},{},{:e},{},{},{}",
                    n,
                    mode,
                    block_size,
                    report.residual,
                    record.total_ms,
                    record.classical_ms,
                    record.quantum_sim_ms
                ));
            }
        }
    }
    let mut csv = String::from("size,mode,block_size,residual,total_ms,classical_ms,quantum_sim_ms\n");
    for row in rows {
        csv.push_str(&row);
        csv.push('\n');
    }
    match &args.out {
        Some(path) => {
            std::fs::write(path, &csv)?;
            println!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(EXIT_PASS)
}

fn cmd_tune(args: TuneArgs) -> hqsolve_core::Result<u8> {
    let mut policy = if args.policy.exists() {
        Policy::load(&args.policy)?
    } else {
        Policy::new(args.seed)
    };
    let store = TelemetryStore::open(&args.telemetry);

    // Native block dimension 2 keeps every candidate block size aligned with
    // the generated block boundaries.
    let native_block = 2;
    let episode_spec = |seed: u64| BlockDiagSpec {
        n: args.n,
        block_size: native_block,
        density: args.density,
        seed,
        dominance: args.dominance,
    };
    // The bucketing context must carry the sparsity the episode records will
    // report, which is the realized nonzero fraction, not the density knob.
    let (probe, _) = generate_block_diagonal_spd::<f64>(&episode_spec(args.seed))?;
    let context_sparsity = probe.sparsity();

    let workload = WorkloadSpec {
        n: args.n,
        sparsity: context_sparsity,
        base_seed: args.seed,
    };
    let outcome = tune(&mut policy, &workload, args.episodes, &store, |ctx| {
        let config = PipelineConfig {
            input: InputSource::GenerateBlockDiagonal(episode_spec(ctx.seed)),
            mode: args.mode,
            block_size: BlockSizeChoice::Fixed(ctx.block_size),
            clock_qubits: args.clock_qubits,
            seed: ctx.seed,
            ..PipelineConfig::default()
        };
        let report = run_pipeline::<f64>(&config)?;
        Ok(TelemetryRecord::from_report(&report))
    })?;
    policy.save(&args.policy)?;
    println!(
        "ran {} episodes ({} failed); greedy block size for (n={}, sparsity={:.4}): {}",
        outcome.episodes_run,
        outcome.failures.len(),
        args.n,
        context_sparsity,
        policy.greedy_block_size(args.n, context_sparsity)
    );
    println!("policy -> {}", args.policy.display());
    Ok(EXIT_PASS)
}

fn cmd_report(args: ReportArgs) -> hqsolve_core::Result<u8> {
    use std::fmt::Write as _;

    let report = SolveReport::load(&args.file)?;
    let mut text = report_summary(&report);
    text.push('\n');
    let _ = writeln!(
        text,
        "{:>5} {:>5} {:>12} {:>12} {:>11} {:>8} {:>10}",
        "block", "dim", "kappa_pre", "kappa_post", "P(anc=1)", "exact", "wall_ms"
    );
    for b in &report.blocks {
        let fmt_kappa = |v: Option<f64>| v.map_or_else(|| "-".into(), |x| format!("{x:.4}"));
        let _ = writeln!(
            text,
            "{:>5} {:>5} {:>12} {:>12} {:>11} {:>8} {:>10.3}",
            b.index,
            b.dim,
            fmt_kappa(b.kappa_before),
            fmt_kappa(b.kappa_after),
            b.success_probability
                .map_or_else(|| "-".into(), |x| format!("{x:.3e}")),
            b.phase_exactness.map_or_else(|| "-".into(), |x| x.to_string()),
            b.wall_ms
        );
    }

    // Tolerate a closed pipe (e.g. `hqsolve report ... | head`).
    use std::io::Write as _;
    if let Err(e) = std::io::stdout().write_all(text.as_bytes()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            return Err(e.into());
        }
    }
    Ok(EXIT_PASS)
}

fn report_summary(report: &SolveReport) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "system: n={} nnz={} sparsity={:.4}",
        report.input.n, report.input.nnz, report.input.sparsity
    );
    let _ = writeln!(
        s,
        "mode={} strategy={} block_size={}{} blocks={}",
        report.mode,
        report.strategy,
        report.block_size,
        if report.auto_block_size { " (auto)" } else { "" },
        report.block_count
    );
    let t = &report.timings;
    let _ = writeln!(
        s,
        "timings: prepare={:.2}ms precondition={:.2}ms solve={:.2}ms aggregate={:.2}ms total={:.2}ms",
        t.prepare_ms, t.precondition_ms, t.solve_ms, t.aggregate_ms, t.total_ms
    );
    let _ = writeln!(
        s,
        "residual = {:e} (tolerance {:e}): {}",
        report.residual,
        report.residual_tolerance,
        if report.pass { "PASS" } else { "FAIL" }
    );
    s
}

fn print_report_summary(report: &SolveReport) {
    print!("{}", report_summary(report));
}
