//! Block partitioning of a system into contiguous diagonal blocks, and
//! aggregation of per-block solutions back into the global vector.

use crate::error::{Error, Result};
use crate::scalar::{Scalar, C};
use crate::sparse::SparseMatrix;
use crate::vector::DenseVector;

/// A system split into contiguous diagonal blocks.
#[derive(Clone, Debug)]
pub struct BlockSystem<T> {
    blocks: Vec<(SparseMatrix<T>, DenseVector<T>)>,
    block_starts: Vec<usize>,
    nominal_block_size: usize,
    total_dim: usize,
    off_block_mass: T,
}

impl<T: Scalar> BlockSystem<T> {
    pub fn blocks(&self) -> &[(SparseMatrix<T>, DenseVector<T>)] {
        &self.blocks
    }

    /// Global index where block `i` starts.
    pub fn block_starts(&self) -> &[usize] {
        &self.block_starts
    }

    /// Number of blocks `k`.
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Nominal block size; every block except possibly the last has this
    /// dimension.
    pub fn nominal_block_size(&self) -> usize {
        self.nominal_block_size
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Frobenius norm of the entries discarded outside the block-diagonal
    /// pattern; exactly zero iff the matrix is block-diagonal for this
    /// partition.
    pub fn off_block_mass(&self) -> T {
        self.off_block_mass
    }
}

/// Partition `(A, b)` into `ceil(N / block_size)` contiguous diagonal blocks.
///
/// The Frobenius mass of all entries outside the block-diagonal pattern is
/// measured; if it exceeds `tolerance * ||A||_F` the partition fails with the
/// measured mass.
pub fn partition<T: Scalar>(
    a: &SparseMatrix<T>,
    b: &DenseVector<T>,
    block_size: usize,
    tolerance: T,
) -> Result<BlockSystem<T>> {
    let n = a.dim();
    if block_size == 0 {
        return Err(Error::InvalidArgument("block size must be >= 1".into()));
    }
    if block_size > n {
        return Err(Error::InvalidArgument(format!(
            "block size {block_size} exceeds dimension {n}"
        )));
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            context: "partition rhs",
            expected: n,
            actual: b.len(),
        });
    }

    let k = n.div_ceil(block_size);
    let block_starts: Vec<usize> = (0..k).map(|i| i * block_size).collect();
    let block_dim = |i: usize| -> usize {
        if i + 1 == k {
            n - block_starts[i]
        } else {
            block_size
        }
    };

    let mut block_triplets: Vec<Vec<(usize, usize, C<T>)>> = (0..k).map(|_| Vec::new()).collect();
    let mut off_mass_sq = T::zero();
    for (i, j, v) in a.entries() {
        let bi = i / block_size;
        let bj = j / block_size;
        if bi == bj {
            let s = block_starts[bi];
            block_triplets[bi].push((i - s, j - s, v));
        } else {
            off_mass_sq += v.norm_sqr();
        }
    }
    let off_block_mass = off_mass_sq.sqrt();

    let allowed = tolerance * a.frobenius_norm();
    if off_block_mass > allowed {
        return Err(Error::NotBlockDiagonal {
            mass: off_block_mass.to_f64_lossy(),
            allowed: allowed.to_f64_lossy(),
        });
    }

    let mut blocks = Vec::with_capacity(k);
    for (i, triplets) in block_triplets.into_iter().enumerate() {
        let dim = block_dim(i);
        let sub = SparseMatrix::from_triplets(dim, triplets)?;
        let rhs = b.slice(block_starts[i], dim);
        blocks.push((sub, rhs));
    }

    Ok(BlockSystem {
        blocks,
        block_starts,
        nominal_block_size: block_size,
        total_dim: n,
        off_block_mass,
    })
}

/// Concatenate per-block solutions into the global solution vector.
pub fn aggregate<T: Scalar>(
    block_solutions: &[DenseVector<T>],
    system: &BlockSystem<T>,
) -> Result<DenseVector<T>> {
    if block_solutions.len() != system.block_count() {
        return Err(Error::DimensionMismatch {
            context: "aggregate block count",
            expected: system.block_count(),
            actual: block_solutions.len(),
        });
    }
    for (i, (x, (a, _))) in block_solutions.iter().zip(system.blocks()).enumerate() {
        if x.len() != a.dim() {
            return Err(Error::DimensionMismatch {
                context: "aggregate block dimension",
                expected: a.dim(),
                actual: x.len(),
            }
            .in_block(i));
        }
    }
    Ok(DenseVector::concat(block_solutions))
}
