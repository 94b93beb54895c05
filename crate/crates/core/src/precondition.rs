//! Jacobi preconditioning of SPD blocks in the Hermiticity-preserving
//! symmetric form `D^{-1/2} A D^{-1/2}`, with a deterministic data-parallel
//! map over the blocks of a system.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense::{condition_number_with_cap, DEFAULT_DENSE_CAP};
use crate::error::{Error, Result};
use crate::partition::BlockSystem;
use crate::scalar::{Scalar, C};
use crate::sparse::SparseMatrix;
use crate::vector::DenseVector;

/// Preconditioning strategy, selectable by name ("none", "jacobi").
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreconditionStrategy {
    None,
    Jacobi,
}

impl std::fmt::Display for PreconditionStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PreconditionStrategy::None => write!(f, "none"),
            PreconditionStrategy::Jacobi => write!(f, "jacobi"),
        }
    }
}

impl std::str::FromStr for PreconditionStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(PreconditionStrategy::None),
            "jacobi" => Ok(PreconditionStrategy::Jacobi),
            other => Err(Error::InvalidArgument(format!(
                "unknown preconditioning strategy {other:?} (expected \"none\" or \"jacobi\")"
            ))),
        }
    }
}

/// Diagonal preconditioner: stores `1 / A[j][j]` per row.
#[derive(Clone, Debug, PartialEq)]
pub struct Preconditioner<T> {
    inverse_diagonal: Vec<T>,
    strategy: PreconditionStrategy,
}

impl<T: Scalar> Preconditioner<T> {
    /// Identity preconditioner (strategy "none").
    pub fn identity(n: usize) -> Self {
        Self {
            inverse_diagonal: vec![T::one(); n],
            strategy: PreconditionStrategy::None,
        }
    }

    pub fn inverse_diagonal(&self) -> &[T] {
        &self.inverse_diagonal
    }

    pub fn strategy(&self) -> PreconditionStrategy {
        self.strategy
    }

    pub fn dim(&self) -> usize {
        self.inverse_diagonal.len()
    }

    /// Apply `M^{-1} r = D^{-1} r` entrywise (used by preconditioned CG).
    pub fn apply_inverse(&self, r: &DenseVector<T>) -> DenseVector<T> {
        let mut z = r.clone();
        for (zi, &d) in z.entries_mut().iter_mut().zip(&self.inverse_diagonal) {
            *zi = zi.scale(d);
        }
        z
    }
}

/// A block after preconditioning, together with the scaling that produced it
/// and the condition numbers before and after (when the block is small
/// enough to densify).
#[derive(Clone, Debug)]
pub struct PreconditionedBlock<T> {
    pub a_tilde: SparseMatrix<T>,
    pub b_tilde: DenseVector<T>,
    pub preconditioner: Preconditioner<T>,
    pub kappa_before: Option<T>,
    pub kappa_after: Option<T>,
}

/// Extract the inverse diagonal of an SPD block.
pub fn build_jacobi<T: Scalar>(a: &SparseMatrix<T>) -> Result<Preconditioner<T>> {
    let n = a.dim();
    let mut inverse_diagonal = Vec::with_capacity(n);
    for j in 0..n {
        let d = a.get(j, j).re;
        if !(d > T::zero()) || !d.is_finite() {
            return Err(Error::NotSpd {
                context: "jacobi diagonal",
                index: j,
            });
        }
        inverse_diagonal.push(T::one() / d);
    }
    Ok(Preconditioner {
        inverse_diagonal,
        strategy: PreconditionStrategy::Jacobi,
    })
}

/// Symmetric Jacobi scaling: `A~ = D^{-1/2} A D^{-1/2}`, `b~ = D^{-1/2} b`.
///
/// The scaled system stays Hermitian with unit diagonal, and the original
/// solution is recovered as `x = D^{-1/2} x~`.
pub fn apply_symmetric<T: Scalar>(
    a: &SparseMatrix<T>,
    b: &DenseVector<T>,
    m: &Preconditioner<T>,
) -> Result<PreconditionedBlock<T>> {
    apply_symmetric_with_cap(a, b, m, DEFAULT_DENSE_CAP)
}

/// As [`apply_symmetric`] with an explicit densification cap for the
/// condition-number diagnostics.
pub fn apply_symmetric_with_cap<T: Scalar>(
    a: &SparseMatrix<T>,
    b: &DenseVector<T>,
    m: &Preconditioner<T>,
    cap: usize,
) -> Result<PreconditionedBlock<T>> {
    let n = a.dim();
    if m.dim() != n || b.len() != n {
        return Err(Error::DimensionMismatch {
            context: "apply_symmetric",
            expected: n,
            actual: m.dim().min(b.len()),
        });
    }
    let scale: Vec<T> = m.inverse_diagonal.iter().map(|&d| d.sqrt()).collect();

    let triplets: Vec<(usize, usize, C<T>)> = a
        .entries()
        .map(|(i, j, v)| (i, j, v.scale(scale[i] * scale[j])))
        .collect();
    let a_tilde = SparseMatrix::from_triplets(n, triplets)?;

    let mut b_tilde = b.clone();
    for (bi, &s) in b_tilde.entries_mut().iter_mut().zip(&scale) {
        *bi = bi.scale(s);
    }

    let (kappa_before, kappa_after) = if n <= cap {
        (
            Some(condition_number_with_cap(a, cap)?),
            Some(condition_number_with_cap(&a_tilde, cap)?),
        )
    } else {
        (None, None)
    };

    Ok(PreconditionedBlock {
        a_tilde,
        b_tilde,
        preconditioner: m.clone(),
        kappa_before,
        kappa_after,
    })
}

/// Invert the symmetric scaling: `x = D^{-1/2} x~`.
pub fn unscale_solution<T: Scalar>(
    x_tilde: &DenseVector<T>,
    m: &Preconditioner<T>,
) -> Result<DenseVector<T>> {
    if x_tilde.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            context: "unscale_solution",
            expected: m.dim(),
            actual: x_tilde.len(),
        });
    }
    let mut x = x_tilde.clone();
    for (xi, &d) in x.entries_mut().iter_mut().zip(&m.inverse_diagonal) {
        *xi = xi.scale(d.sqrt());
    }
    Ok(x)
}

/// Precondition a single block under the given strategy.
pub fn precondition_block<T: Scalar>(
    a: &SparseMatrix<T>,
    b: &DenseVector<T>,
    strategy: PreconditionStrategy,
    cap: usize,
) -> Result<PreconditionedBlock<T>> {
    match strategy {
        PreconditionStrategy::None => {
            let kappa = if a.dim() <= cap {
                Some(condition_number_with_cap(a, cap)?)
            } else {
                None
            };
            Ok(PreconditionedBlock {
                a_tilde: a.clone(),
                b_tilde: b.clone(),
                preconditioner: Preconditioner::identity(a.dim()),
                kappa_before: kappa,
                kappa_after: kappa,
            })
        }
        PreconditionStrategy::Jacobi => {
            let m = build_jacobi(a)?;
            apply_symmetric_with_cap(a, b, &m, cap)
        }
    }
}

/// Precondition every block of a system, in parallel.
///
/// The map is embarrassingly parallel with per-block outputs written to
/// disjoint slots, so the result is bit-identical for any worker count.
/// `workers = 0` uses the global thread pool. On failure the error of the
/// lowest-indexed failing block is reported.
pub fn precondition_all<T: Scalar>(
    system: &BlockSystem<T>,
    strategy: PreconditionStrategy,
    workers: usize,
    cap: usize,
) -> Result<Vec<PreconditionedBlock<T>>> {
    let run = || -> Vec<Result<PreconditionedBlock<T>>> {
        system
            .blocks()
            .par_iter()
            .map(|(a, b)| precondition_block(a, b, strategy, cap))
            .collect()
    };
    let results = if workers == 0 {
        run()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))?;
        pool.install(run)
    };

    let mut blocks = Vec::with_capacity(results.len());
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(b) => blocks.push(b),
            Err(e) => return Err(e.in_block(index)),
        }
    }
    Ok(blocks)
}
