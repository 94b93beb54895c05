//! Statevector simulation of the HHL quantum linear-system algorithm:
//! amplitude encoding, quantum phase estimation with controlled
//! Hamiltonian-evolution powers, the eigenvalue-inversion rotation, inverse
//! phase estimation, and ancilla post-selection.

mod register;

pub use register::{ceil_log2, QubitLayout, RegisterState};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{DenseMatrix, DEFAULT_DENSE_CAP};
use crate::error::{Error, Result};
use crate::precondition::PreconditionedBlock;
use crate::scalar::{czero, Scalar, C};
use crate::sparse::SparseMatrix;
use crate::vector::DenseVector;

/// Amplitude threshold below which a clock value counts as unoccupied.
const OCCUPANCY_TOL: f64 = 1e-12;

/// Post-selection probabilities under this are a failure.
const POST_SELECTION_TOL: f64 = 1e-12;

/// Tunables of one HHL solve.
#[derive(Clone, Debug)]
pub struct HhlConfig<T> {
    clock_qubits: usize,
    evolution_time: T,
    rotation_constant: T,
    shots: u64,
    lambda_bounds: (T, T),
}

impl<T: Scalar> HhlConfig<T> {
    /// Validate and build a configuration.
    ///
    /// Requires `lambda_max_est * t / (2 pi) <= 1/2` (no phase wraparound)
    /// and `C <= lambda_min_est` (rotation amplitudes stay <= 1).
    pub fn new(
        clock_qubits: usize,
        evolution_time: T,
        rotation_constant: T,
        shots: u64,
        lambda_bounds: (T, T),
    ) -> Result<Self> {
        if clock_qubits == 0 {
            return Err(Error::InvalidConfig("need at least one clock qubit".into()));
        }
        if !(evolution_time > T::zero()) {
            return Err(Error::InvalidConfig("evolution time must be positive".into()));
        }
        if !(rotation_constant > T::zero()) {
            return Err(Error::InvalidConfig("rotation constant must be positive".into()));
        }
        let (lo, hi) = lambda_bounds;
        if !(lo > T::zero()) || !(hi >= lo) {
            return Err(Error::InvalidConfig(format!(
                "lambda bounds must satisfy 0 < lo <= hi, got ({lo}, {hi})"
            )));
        }
        let slack = T::one() + T::lit(1e-9);
        let top_phase = hi * evolution_time / (T::lit(2.0) * T::PI());
        if top_phase > T::lit(0.5) * slack {
            return Err(Error::InvalidConfig(format!(
                "lambda_max * t / (2 pi) = {top_phase} exceeds 1/2: phases would wrap"
            )));
        }
        if rotation_constant > lo * slack {
            return Err(Error::InvalidConfig(format!(
                "rotation constant {rotation_constant} exceeds lambda_min estimate {lo}"
            )));
        }
        Ok(Self {
            clock_qubits,
            evolution_time,
            rotation_constant,
            shots,
            lambda_bounds,
        })
    }

    pub fn clock_qubits(&self) -> usize {
        self.clock_qubits
    }

    pub fn evolution_time(&self) -> T {
        self.evolution_time
    }

    pub fn rotation_constant(&self) -> T {
        self.rotation_constant
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn lambda_bounds(&self) -> (T, T) {
        self.lambda_bounds
    }

    pub fn with_shots(mut self, shots: u64) -> Self {
        self.shots = shots;
        self
    }

    /// Eigenvalue decoded from a clock basis value.
    pub fn decode_eigenvalue(&self, clock_value: usize) -> T {
        let grid = T::lit((1u64 << self.clock_qubits) as f64);
        T::lit(2.0) * T::PI() * T::lit(clock_value as f64) / (grid * self.evolution_time)
    }

    /// Eigenphase `lambda * t / (2 pi)` of an eigenvalue under this config.
    pub fn phase_of(&self, eigenvalue: T) -> T {
        eigenvalue * self.evolution_time / (T::lit(2.0) * T::PI())
    }
}

/// Optional explicit overrides for the auto-chosen evolution time and
/// rotation constant.
#[derive(Clone, Copy, Debug)]
pub struct HhlOverrides<T> {
    pub evolution_time: Option<T>,
    pub rotation_constant: Option<T>,
}

impl<T> Default for HhlOverrides<T> {
    fn default() -> Self {
        Self {
            evolution_time: None,
            rotation_constant: None,
        }
    }
}

/// Validated Hermitian eigendecomposition of an SPD matrix.
#[derive(Clone, Debug)]
pub struct EigenDecomposition<T> {
    eigenvalues: Vec<T>,
    eigenvectors: DenseMatrix<T>,
}

impl<T: Scalar> EigenDecomposition<T> {
    /// Compute and validate: positive ascending eigenvalues, orthonormal
    /// columns, residual `A u - lambda u` within 1e-10 of scale.
    pub fn compute(a: &SparseMatrix<T>) -> Result<Self> {
        let (eigenvalues, eigenvectors) = a.to_dense().hermitian_eigen()?;
        if let Some(bad) = eigenvalues.iter().position(|l| !(*l > T::zero())) {
            return Err(Error::NotSpd {
                context: "eigenvalue",
                index: bad,
            });
        }
        let decomp = Self {
            eigenvalues,
            eigenvectors,
        };
        decomp.validate(a)?;
        Ok(decomp)
    }

    /// Check the decomposition invariants against the source matrix.
    pub fn validate(&self, a: &SparseMatrix<T>) -> Result<()> {
        let n = a.dim();
        let tol = T::lit(1e-10).max(T::epsilon() * T::lit(256.0));
        let scale = self.eigenvalues.last().copied().unwrap_or(T::one()).max(T::one());
        for j in 0..n {
            let u = DenseVector::new(self.eigenvectors.column(j));
            let au = crate::sparse::matvec(a, &u)?;
            let lu = u.scale(C::new(self.eigenvalues[j], T::zero()));
            if au.max_abs_diff(&lu) > tol * scale {
                return Err(Error::NumericalBreakdown(format!(
                    "eigenpair {j} residual exceeds tolerance"
                )));
            }
            for k in j..n {
                let w = DenseVector::new(self.eigenvectors.column(k));
                let d = u.dot(&w);
                let expected = if j == k { T::one() } else { T::zero() };
                if (d.norm() - expected).abs() > tol {
                    return Err(Error::NumericalBreakdown(format!(
                        "eigenvector columns {j} and {k} are not orthonormal"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Positive eigenvalues, ascending.
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// Unitary of eigenvectors (column j pairs with eigenvalue j).
    pub fn eigenvectors(&self) -> &DenseMatrix<T> {
        &self.eigenvectors
    }

    pub fn lambda_min(&self) -> T {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> T {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }

    /// Eigenbasis coefficients of a vector.
    pub fn coefficients(&self, v: &DenseVector<T>) -> Vec<C<T>> {
        (0..self.eigenvalues.len())
            .map(|j| DenseVector::new(self.eigenvectors.column(j)).dot(v))
            .collect()
    }

    /// Evolution unitary `exp(i A t 2^l)` on the padded system register.
    ///
    /// The padded subspace is fixed to eigenvalue 1, so it evolves with a
    /// bare phase and never mixes with the physical block.
    fn evolution_power(&self, t: T, l: usize, padded_dim: usize) -> DenseMatrix<T> {
        let dim = self.eigenvalues.len();
        let factor = t * T::lit((1u64 << l) as f64);
        let phases: Vec<C<T>> = self
            .eigenvalues
            .iter()
            .map(|&lambda| C::from_polar(T::one(), lambda * factor))
            .collect();
        let mut u = DenseMatrix::zeros(padded_dim, padded_dim);
        for r in 0..dim {
            for c in 0..dim {
                let mut acc = czero();
                for (j, &phase) in phases.iter().enumerate() {
                    acc += self.eigenvectors.get(r, j) * phase * self.eigenvectors.get(c, j).conj();
                }
                u.set(r, c, acc);
            }
        }
        let pad_phase = C::from_polar(T::one(), factor);
        for r in dim..padded_dim {
            u.set(r, r, pad_phase);
        }
        u
    }
}

/// Choose evolution time and rotation constant for a preconditioned block
/// with the default densification cap.
pub fn choose_config<T: Scalar>(
    a_tilde: &SparseMatrix<T>,
    clock_qubits: usize,
) -> Result<HhlConfig<T>> {
    choose_config_with(a_tilde, clock_qubits, 0, HhlOverrides::default(), DEFAULT_DENSE_CAP)
}

/// Choose (or override) HHL parameters.
///
/// Without overrides: `lambda_max_est` is the Gershgorin row-sum bound,
/// `lambda_min_est` the exact smallest eigenvalue at desk scale (Gershgorin
/// lower bound above the cap), and `t = pi / lambda_max_est` so the top
/// phase sits at 1/2. The rotation constant defaults to
/// `min(lambda_min_est, 2 pi / (2^m t))`: capping at the smallest decoded
/// grid eigenvalue keeps the inversion rotation valid on every clock value
/// that QPE leakage can occupy, which inexact phases always do. With an
/// explicit evolution time the bounds are tightened to the exact spectrum
/// so the wraparound check runs against the true extremes rather than the
/// loose bound.
pub fn choose_config_with<T: Scalar>(
    a_tilde: &SparseMatrix<T>,
    clock_qubits: usize,
    shots: u64,
    overrides: HhlOverrides<T>,
    cap: usize,
) -> Result<HhlConfig<T>> {
    let exact = if a_tilde.dim() <= cap {
        Some(EigenDecomposition::compute(a_tilde)?)
    } else {
        None
    };

    let (lambda_min_est, lambda_max_est) = match (&exact, overrides.evolution_time) {
        (Some(eig), Some(_)) => (eig.lambda_min(), eig.lambda_max()),
        (Some(eig), None) => (eig.lambda_min(), a_tilde.gershgorin_upper()),
        (None, _) => {
            let lo = a_tilde.gershgorin_lower();
            if !(lo > T::zero()) {
                return Err(Error::InvalidConfig(
                    "cannot estimate lambda_min above the densification cap for a \
                     non-dominant matrix"
                        .into(),
                ));
            }
            (lo, a_tilde.gershgorin_upper())
        }
    };

    let evolution_time = overrides
        .evolution_time
        .unwrap_or_else(|| T::PI() / lambda_max_est);
    let grid_floor = T::lit(2.0) * T::PI()
        / (T::lit((1u64 << clock_qubits) as f64) * evolution_time);
    let rotation_constant = overrides
        .rotation_constant
        .unwrap_or_else(|| lambda_min_est.min(grid_floor));

    HhlConfig::new(
        clock_qubits,
        evolution_time,
        rotation_constant,
        shots,
        (lambda_min_est, lambda_max_est),
    )
}

/// Amplitude-encode a right-hand side: system register carries
/// `b~ / ||b~||` zero-padded to `2^q`, clock and ancilla in all-zeros.
pub fn prepare_state<T: Scalar>(
    b_tilde: &DenseVector<T>,
    clock_qubits: usize,
) -> Result<RegisterState<T>> {
    let norm = b_tilde.norm();
    if norm == T::zero() {
        return Err(Error::ZeroRhs);
    }
    let dim = b_tilde.len();
    let padded = dim.next_power_of_two();
    let mut amps = vec![czero(); padded];
    for (i, &e) in b_tilde.entries().iter().enumerate() {
        amps[i] = e.unscale(norm);
    }
    Ok(RegisterState::with_system_amplitudes(&amps, clock_qubits))
}

fn check_register<T: Scalar>(
    state: &RegisterState<T>,
    a_tilde: &SparseMatrix<T>,
    config: &HhlConfig<T>,
) -> Result<()> {
    let layout = state.layout();
    if layout.clock != config.clock_qubits {
        return Err(Error::DimensionMismatch {
            context: "clock register",
            expected: config.clock_qubits,
            actual: layout.clock,
        });
    }
    let q = ceil_log2(a_tilde.dim());
    if layout.system != q {
        return Err(Error::DimensionMismatch {
            context: "system register",
            expected: q,
            actual: layout.system,
        });
    }
    Ok(())
}

/// Forward quantum phase estimation: clock Hadamards, controlled
/// `U^{2^l}` powers with `U = exp(i A~ t)`, then the inverse QFT on the
/// clock register.
pub fn qpe_forward<T: Scalar>(
    state: &RegisterState<T>,
    a_tilde: &SparseMatrix<T>,
    config: &HhlConfig<T>,
) -> Result<RegisterState<T>> {
    check_register(state, a_tilde, config)?;
    let eig = EigenDecomposition::compute(a_tilde)?;
    Ok(qpe_pass(state, &eig, config, false))
}

/// Inverse of [`qpe_forward`]: clock QFT, reversed controlled powers with
/// negated phases, clock Hadamards.
pub fn qpe_inverse<T: Scalar>(
    state: &RegisterState<T>,
    a_tilde: &SparseMatrix<T>,
    config: &HhlConfig<T>,
) -> Result<RegisterState<T>> {
    check_register(state, a_tilde, config)?;
    let eig = EigenDecomposition::compute(a_tilde)?;
    Ok(qpe_pass(state, &eig, config, true))
}

fn qpe_pass<T: Scalar>(
    state: &RegisterState<T>,
    eig: &EigenDecomposition<T>,
    config: &HhlConfig<T>,
    inverse: bool,
) -> RegisterState<T> {
    let mut out = state.clone();
    let layout = out.layout();
    let m = layout.clock;
    let padded = 1usize << layout.system;
    let t = if inverse {
        -config.evolution_time
    } else {
        config.evolution_time
    };

    if inverse {
        out.apply_clock_qft(false);
        for l in (0..m).rev() {
            let u = eig.evolution_power(t, l, padded);
            out.apply_controlled_system_unitary(layout.clock_qubit(l), &u);
        }
        for l in (0..m).rev() {
            out.apply_hadamard(layout.clock_qubit(l));
        }
    } else {
        for l in 0..m {
            out.apply_hadamard(layout.clock_qubit(l));
        }
        for l in 0..m {
            let u = eig.evolution_power(t, l, padded);
            out.apply_controlled_system_unitary(layout.clock_qubit(l), &u);
        }
        out.apply_clock_qft(true);
    }
    out
}

/// Eigenvalue-inversion rotation: for every clock value `c >= 1` with
/// decoded eigenvalue `lambda_hat(c)`, rotate the ancilla by
/// `C / lambda_hat(c)`. Clock value 0 is never rotated; rotations that
/// would exceed amplitude 1 on an occupied clock value are an error.
pub fn eigen_invert<T: Scalar>(
    state: &RegisterState<T>,
    config: &HhlConfig<T>,
) -> Result<RegisterState<T>> {
    if state.layout().clock != config.clock_qubits {
        return Err(Error::DimensionMismatch {
            context: "clock register",
            expected: config.clock_qubits,
            actual: state.layout().clock,
        });
    }
    let mut out = state.clone();
    let c_const = config.rotation_constant;
    let occupancy = T::lit(OCCUPANCY_TOL);
    let unit_slack = T::one() + T::lit(1e-12);
    for clock_value in 1..(1usize << config.clock_qubits) {
        let lambda_hat = config.decode_eigenvalue(clock_value);
        let ratio = c_const / lambda_hat;
        if ratio > unit_slack {
            if out.clock_value_mass(clock_value).sqrt() > occupancy {
                return Err(Error::InvalidRotation {
                    c: c_const.to_f64_lossy(),
                    lambda_hat: lambda_hat.to_f64_lossy(),
                    clock: clock_value,
                });
            }
            continue;
        }
        out.apply_ancilla_rotation(clock_value, ratio.min(T::one()));
    }
    Ok(out)
}

/// Per-eigenvalue phase-estimation diagnostics of one solve.
#[derive(Clone, Debug)]
pub struct PhaseDiagnostic<T> {
    pub eigenvalue: T,
    /// Exact eigenphase `lambda t / (2 pi)`.
    pub phase: T,
    /// Nearest clock grid point `round(phase * 2^m)`.
    pub clock_estimate: usize,
    /// Eigenvalue decoded back from the grid point.
    pub decoded_eigenvalue: T,
    /// Whether the phase is exactly representable in `m` bits.
    pub exact: bool,
    /// Weight `|beta_j|^2` of this eigenvector in the prepared state.
    pub weight: T,
}

/// Outcome of one HHL solve.
#[derive(Clone, Debug)]
pub struct HhlResult<T> {
    /// Solution of the preconditioned block system, padding stripped.
    pub solution: DenseVector<T>,
    /// Ancilla-1 probability (estimated from counts in sampling mode).
    pub success_probability: T,
    /// True when every occupied eigenphase is exactly representable.
    pub phase_exactness: bool,
    pub diagnostics: Vec<PhaseDiagnostic<T>>,
}

/// Run the full HHL pipeline on a preconditioned block:
/// prepare, QPE, eigenvalue inversion, inverse QPE, post-selection.
///
/// With `shots = 0` the conditional amplitudes are read exactly and the
/// unnormalized solution is `(||b~|| sqrt(P) / C) * psi_post` with
/// `psi_post` the normalized post-selected system state. With `shots > 0`
/// the joint measurement distribution is sampled: success probability and
/// entrywise magnitudes come from counts, phases from the exact state.
pub fn hhl_solve<T: Scalar>(
    block: &PreconditionedBlock<T>,
    config: &HhlConfig<T>,
) -> Result<HhlResult<T>> {
    hhl_solve_seeded(block, config, 0)
}

/// As [`hhl_solve`] with an explicit seed for sampling mode.
pub fn hhl_solve_seeded<T: Scalar>(
    block: &PreconditionedBlock<T>,
    config: &HhlConfig<T>,
    sample_seed: u64,
) -> Result<HhlResult<T>> {
    let a_tilde = &block.a_tilde;
    let b_tilde = &block.b_tilde;
    let dim = a_tilde.dim();
    if b_tilde.len() != dim {
        return Err(Error::DimensionMismatch {
            context: "hhl rhs",
            expected: dim,
            actual: b_tilde.len(),
        });
    }
    let b_norm = b_tilde.norm();
    if b_norm == T::zero() {
        return Err(Error::ZeroRhs);
    }

    let eig = EigenDecomposition::compute(a_tilde)?;
    let state = prepare_state(b_tilde, config.clock_qubits)?;

    let (diagnostics, phase_exactness) = phase_diagnostics(&eig, config, b_tilde, b_norm);

    let after_qpe = qpe_pass(&state, &eig, config, false);
    let rotated = eigen_invert(&after_qpe, config)?;
    let final_state = qpe_pass(&rotated, &eig, config, true);
    final_state.validate_norm()?;

    let p_success = final_state.ancilla_one_probability();
    if p_success < T::lit(POST_SELECTION_TOL) {
        return Err(Error::PostSelectionFailure {
            probability: p_success.to_f64_lossy(),
        });
    }

    // Post-selected system state: the (ancilla = 1, clock = 0) slice.
    let padded = 1usize << final_state.layout().system;
    let slice: Vec<C<T>> = (0..padded).map(|s| final_state.amplitude(1, 0, s)).collect();
    let slice_norm = norm_of(&slice);
    if slice_norm == T::zero() {
        return Err(Error::PostSelectionFailure {
            probability: p_success.to_f64_lossy(),
        });
    }

    // Unnormalized solution `(||b~|| sqrt(P0) / C) * psi_post` where
    // `psi_post = slice / ||slice||` and `P0 = ||slice||^2` is the
    // probability of the post-selected outcome (ancilla 1, clock refocused
    // to 0). This collapses to `(||b~|| / C) * slice`; scaling by the full
    // ancilla-1 probability instead would fold residual clock leakage into
    // the solution norm, a bias that does not shrink with more clock qubits.
    let (solution, reported_p) = if config.shots == 0 {
        let scale = b_norm / config.rotation_constant;
        let entries = slice[..dim].iter().map(|c| c.scale(scale)).collect();
        (DenseVector::new(entries), p_success)
    } else {
        sampled_solution(&final_state, &slice, dim, b_norm, config, sample_seed)?
    };

    Ok(HhlResult {
        solution,
        success_probability: reported_p,
        phase_exactness,
        diagnostics,
    })
}

fn norm_of<T: Scalar>(v: &[C<T>]) -> T {
    v.iter()
        .map(|c| c.norm_sqr())
        .fold(T::zero(), |a, b| a + b)
        .sqrt()
}

fn phase_diagnostics<T: Scalar>(
    eig: &EigenDecomposition<T>,
    config: &HhlConfig<T>,
    b_tilde: &DenseVector<T>,
    b_norm: T,
) -> (Vec<PhaseDiagnostic<T>>, bool) {
    let grid = T::lit((1u64 << config.clock_qubits) as f64);
    let normalized = b_tilde.scale(C::new(T::one() / b_norm, T::zero()));
    let coeffs = eig.coefficients(&normalized);
    let occupancy = T::lit(OCCUPANCY_TOL);
    let mut diagnostics = Vec::with_capacity(eig.eigenvalues().len());
    let mut all_exact = true;
    for (j, &lambda) in eig.eigenvalues().iter().enumerate() {
        let phase = config.phase_of(lambda);
        let scaled = phase * grid;
        let clock_estimate = scaled.round().to_f64_lossy() as usize;
        let exact = (scaled - scaled.round()).abs() <= T::lit(1e-9);
        let weight = coeffs[j].norm_sqr();
        if weight > occupancy && !exact {
            all_exact = false;
        }
        diagnostics.push(PhaseDiagnostic {
            eigenvalue: lambda,
            phase,
            clock_estimate,
            decoded_eigenvalue: config.decode_eigenvalue(clock_estimate.max(1)),
            exact,
            weight,
        });
    }
    (diagnostics, all_exact)
}

/// Sample the joint measurement distribution and reconstruct the solution
/// from counts (magnitudes) plus the exact amplitudes (phases).
fn sampled_solution<T: Scalar>(
    state: &RegisterState<T>,
    exact_slice: &[C<T>],
    dim: usize,
    b_norm: T,
    config: &HhlConfig<T>,
    seed: u64,
) -> Result<(DenseVector<T>, T)> {
    let probs: Vec<f64> = state
        .amplitudes()
        .iter()
        .map(|c| c.norm_sqr().to_f64_lossy())
        .collect();
    let total: f64 = probs.iter().sum();
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p / total;
        cumulative.push(acc);
    }

    let mut counts = vec![0u64; probs.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..config.shots {
        let u: f64 = rng.random();
        let idx = cumulative.partition_point(|&c| c < u).min(probs.len() - 1);
        counts[idx] += 1;
    }

    let half = counts.len() / 2;
    let ancilla_one: u64 = counts[half..].iter().sum();
    if ancilla_one == 0 {
        return Err(Error::PostSelectionFailure { probability: 0.0 });
    }
    let p_hat = T::lit(ancilla_one as f64 / config.shots as f64);

    let q = state.layout().system;
    let slice_counts = &counts[half..half + (1usize << q)];
    let slice_total: u64 = slice_counts.iter().sum();
    if slice_total == 0 {
        return Err(Error::PostSelectionFailure {
            probability: p_hat.to_f64_lossy(),
        });
    }

    // Entrywise magnitude of the unnormalized solution:
    // ||b~|| / C * sqrt(count_s / shots) estimates ||b~|| / C * |slice_s|.
    let scale = b_norm / config.rotation_constant;
    let mut entries = Vec::with_capacity(dim);
    for s in 0..dim {
        let magnitude = T::lit(slice_counts[s] as f64 / config.shots as f64).sqrt() * scale;
        let exact = exact_slice[s];
        let phase = if exact.norm() > T::zero() {
            exact.unscale(exact.norm())
        } else {
            C::new(T::one(), T::zero())
        };
        entries.push(phase.scale(magnitude));
    }
    Ok((DenseVector::new(entries), p_hat))
}
