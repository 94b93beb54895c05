use num_complex::Complex;
use thiserror::Error;

/// Crate-wide error type. Scalar payloads are carried as `f64` regardless of
/// the working precision so the type stays non-generic.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix is not Hermitian positive-definite: {context} at index {index}")]
    NotSpd { context: &'static str, index: usize },

    #[error("matrix is numerically singular (sigma_min/sigma_max = {ratio:.3e})")]
    Singular { ratio: f64 },

    #[error("dimension {n} exceeds the dense-computation cap {cap}")]
    DimensionCap { n: usize, cap: usize },

    #[error("right-hand side is the zero vector")]
    ZeroRhs,

    #[error(
        "matrix is not block-diagonal for this partition: off-block mass {mass:.6e} exceeds \
         tolerance {allowed:.6e}"
    )]
    NotBlockDiagonal { mass: f64, allowed: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid HHL configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "eigenvalue-inversion rotation is invalid: C = {c:.6e} exceeds decoded eigenvalue \
         {lambda_hat:.6e} at occupied clock value {clock}"
    )]
    InvalidRotation { c: f64, lambda_hat: f64, clock: usize },

    #[error("post-selection failed: ancilla-1 probability {probability:.3e} below 1e-12")]
    PostSelectionFailure { probability: f64 },

    #[error("no convergence after {iterations} iterations (relative residual {residual:.6e})")]
    MaxIterations {
        iterations: usize,
        residual: f64,
        /// Best iterate reached, widened to f64.
        best: Vec<Complex<f64>>,
    },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("eigendecomposition did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("block {index}: {source}")]
    Block {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{phase}: {source}")]
    Phase {
        phase: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("telemetry record rejected: {0}")]
    InvalidRecord(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wrap an error with the index of the block it occurred in.
    pub fn in_block(self, index: usize) -> Self {
        Error::Block {
            index,
            source: Box::new(self),
        }
    }

    /// Wrap an error with the pipeline phase it occurred in.
    pub fn in_phase(self, phase: &'static str) -> Self {
        Error::Phase {
            phase,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
