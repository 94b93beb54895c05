//! Hybrid solver for sparse Hermitian positive-definite systems `A x = b`:
//! block partitioning, symmetric Jacobi preconditioning under a
//! data-parallel contract, a gate-level statevector simulation of the HHL
//! algorithm per block, solution aggregation, residual validation, and
//! telemetry-driven block-size selection, with classical direct and
//! conjugate-gradient solvers as oracles and baselines.
//!
//! All numeric kernels are generic over the real scalar type through
//! [`Scalar`]; the `*64` / `*32` aliases below pin the two supported
//! precisions.

// Validation guards are written as `!(x > 0)` so NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dense;
pub mod error;
pub mod generate;
pub mod hhl;
pub mod mm;
pub mod optimizer;
pub mod partition;
pub mod pipeline;
pub mod precondition;
pub mod report;
pub mod scalar;
pub mod solvers;
pub mod sparse;
pub mod telemetry;
pub mod vector;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision aliases (the default working precision).
pub type SparseMatrix64 = sparse::SparseMatrix<f64>;
pub type DenseMatrix64 = dense::DenseMatrix<f64>;
pub type DenseVector64 = vector::DenseVector<f64>;
pub type BlockSystem64 = partition::BlockSystem<f64>;
pub type Preconditioner64 = precondition::Preconditioner<f64>;
pub type PreconditionedBlock64 = precondition::PreconditionedBlock<f64>;
pub type HhlConfig64 = hhl::HhlConfig<f64>;
pub type HhlResult64 = hhl::HhlResult<f64>;

/// Single-precision aliases.
pub type SparseMatrix32 = sparse::SparseMatrix<f32>;
pub type DenseMatrix32 = dense::DenseMatrix<f32>;
pub type DenseVector32 = vector::DenseVector<f32>;
