//! Deterministic generation of sparse Hermitian positive-definite test
//! systems.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Scalar, C};
use crate::sparse::SparseMatrix;
use crate::vector::DenseVector;

const RHS_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Recipe for a generated Hermitian strictly diagonally dominant matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    /// Dimension (rows = cols).
    pub n: usize,
    /// Target fraction of nonzero off-diagonal entries, in (0, 1].
    pub density: f64,
    /// RNG seed; identical specs yield bit-identical matrices.
    pub seed: u64,
    /// Diagonal dominance factor, >= 1.
    pub dominance: f64,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidSpec("dimension must be >= 1".into()));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::InvalidSpec(format!(
                "density must lie in (0, 1], got {}",
                self.density
            )));
        }
        if !(self.dominance >= 1.0) {
            return Err(Error::InvalidSpec(format!(
                "dominance must be >= 1, got {}",
                self.dominance
            )));
        }
        Ok(())
    }
}

/// Map a flat pair index k in [0, n(n-1)/2) to the k-th (i, j) with i < j in
/// lexicographic order.
fn pair_from_index(n: usize, mut k: usize) -> (usize, usize) {
    let mut i = 0;
    loop {
        let row_pairs = n - 1 - i;
        if k < row_pairs {
            return (i, i + 1 + k);
        }
        k -= row_pairs;
        i += 1;
    }
}

/// Generate a Hermitian, strictly diagonally dominant (hence
/// positive-definite) sparse matrix.
///
/// Exactly `round(density * n(n-1)/2)` Hermitian off-diagonal pairs are
/// selected; each diagonal entry is `dominance * (row off-diagonal absolute
/// sum) + 1`, so strict dominance holds for every `dominance >= 1`.
pub fn generate_spd<T: Scalar>(spec: &GeneratorSpec) -> Result<SparseMatrix<T>> {
    spec.validate()?;
    let n = spec.n;
    let total_pairs = n * (n - 1) / 2;
    let target = ((spec.density * total_pairs as f64).round() as usize).min(total_pairs);

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let selected: BTreeSet<usize> = if total_pairs == 0 || target == 0 {
        BTreeSet::new()
    } else if target * 2 > total_pairs {
        // Dense selection: exclude instead of include.
        let mut excluded = BTreeSet::new();
        while excluded.len() < total_pairs - target {
            excluded.insert(rng.random_range(0..total_pairs));
        }
        (0..total_pairs).filter(|k| !excluded.contains(k)).collect()
    } else {
        let mut included = BTreeSet::new();
        while included.len() < target {
            included.insert(rng.random_range(0..total_pairs));
        }
        included
    };

    let mut triplets: Vec<(usize, usize, C<T>)> = Vec::with_capacity(2 * target + n);
    let mut row_abs_sum = vec![0.0f64; n];
    for &k in &selected {
        let (i, j) = pair_from_index(n, k);
        let re: f64 = rng.random_range(-1.0..1.0);
        let im: f64 = rng.random_range(-1.0..1.0);
        let v = C::new(T::lit(re), T::lit(im));
        let mag = (re * re + im * im).sqrt();
        row_abs_sum[i] += mag;
        row_abs_sum[j] += mag;
        triplets.push((i, j, v));
        triplets.push((j, i, v.conj()));
    }
    for (i, &s) in row_abs_sum.iter().enumerate() {
        let d = spec.dominance * s + 1.0;
        triplets.push((i, i, C::new(T::lit(d), T::zero())));
    }

    SparseMatrix::from_triplets(n, triplets)
}

/// Recipe for a block-diagonal system assembled from generated SPD blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockDiagSpec {
    /// Total dimension.
    pub n: usize,
    /// Native block dimension (last block may be ragged).
    pub block_size: usize,
    /// Off-diagonal density within each block.
    pub density: f64,
    pub seed: u64,
    pub dominance: f64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Assemble an exactly block-diagonal Hermitian SPD system from generated
/// blocks, with a deterministic right-hand side.
pub fn generate_block_diagonal_spd<T: Scalar>(
    spec: &BlockDiagSpec,
) -> Result<(SparseMatrix<T>, DenseVector<T>)> {
    if spec.block_size == 0 || spec.block_size > spec.n {
        return Err(Error::InvalidSpec(format!(
            "block size {} out of range for dimension {}",
            spec.block_size, spec.n
        )));
    }
    let mut triplets = Vec::new();
    let mut start = 0usize;
    let mut index = 0u64;
    while start < spec.n {
        let dim = spec.block_size.min(spec.n - start);
        let block = generate_spd::<T>(&GeneratorSpec {
            n: dim,
            density: spec.density,
            seed: splitmix64(spec.seed ^ index),
            dominance: spec.dominance,
        })?;
        for (i, j, v) in block.entries() {
            triplets.push((start + i, start + j, v));
        }
        start += dim;
        index += 1;
    }
    let a = SparseMatrix::from_triplets(spec.n, triplets)?;
    let b = generate_rhs(spec.n, spec.seed);
    Ok((a, b))
}

/// Deterministic complex right-hand side paired with a generator seed.
pub fn generate_rhs<T: Scalar>(n: usize, seed: u64) -> DenseVector<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ RHS_SEED_SALT);
    let mut v = DenseVector::zeros(n);
    for i in 0..n {
        let re: f64 = rng.random_range(-1.0..1.0);
        let im: f64 = rng.random_range(-1.0..1.0);
        v[i] = C::new(T::lit(re), T::lit(im));
    }
    if v.norm() == T::zero() {
        v[0] = C::new(T::one(), T::zero());
    }
    v
}
