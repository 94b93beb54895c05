//! CSR sparse matrices over complex scalars, plus the residual metric.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::{czero, Scalar, C};
use crate::vector::DenseVector;

/// Absolute tolerance for the Hermitian-symmetry check.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Square sparse matrix in compressed-sparse-row layout.
///
/// Column indices are strictly increasing within each row; the Hermitian
/// flag is established once at construction and cached.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<T> {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<C<T>>,
    hermitian: bool,
}

impl<T: Scalar> SparseMatrix<T> {
    /// Build from coordinate triplets. Entries are sorted into canonical CSR
    /// order; duplicates and out-of-range indices are rejected.
    pub fn from_triplets(n: usize, triplets: Vec<(usize, usize, C<T>)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be >= 1".into()));
        }
        let mut entries = triplets;
        for &(i, j, _) in &entries {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "entry ({i}, {j}) out of range for dimension {n}"
                )));
            }
        }
        entries.sort_by_key(|a| (a.0, a.1));
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(Error::InvalidArgument(format!(
                    "duplicate entry at ({}, {})",
                    w[0].0, w[0].1
                )));
            }
        }

        let mut row_offsets = vec![0usize; n + 1];
        let mut col_indices = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        for &(i, j, v) in &entries {
            row_offsets[i + 1] += 1;
            col_indices.push(j);
            values.push(v);
        }
        for i in 0..n {
            row_offsets[i + 1] += row_offsets[i];
        }

        let mut m = Self {
            n,
            row_offsets,
            col_indices,
            values,
            hermitian: false,
        };
        m.hermitian = m.check_hermitian();
        Ok(m)
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let one = C::new(T::one(), T::zero());
        Self::from_triplets(n, (0..n).map(|i| (i, i, one)).collect()).expect("identity is valid")
    }

    /// Diagonal matrix from real entries.
    pub fn diagonal(diag: &[T]) -> Self {
        Self::from_triplets(
            diag.len(),
            diag.iter()
                .enumerate()
                .map(|(i, &d)| (i, i, C::new(d, T::zero())))
                .collect(),
        )
        .expect("diagonal is valid")
    }

    /// Densify and drop exact zeros back into CSR.
    pub fn from_dense(dense: &DenseMatrix<T>) -> Result<Self> {
        let n = dense.nrows();
        if n != dense.ncols() {
            return Err(Error::InvalidArgument("matrix must be square".into()));
        }
        let mut triplets = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = dense.get(i, j);
                if v != czero() {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, triplets)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Fraction of stored entries over n*n.
    pub fn sparsity(&self) -> f64 {
        self.nnz() as f64 / (self.n as f64 * self.n as f64)
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[C<T>] {
        &self.values
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Stored value at (i, j), or zero.
    pub fn get(&self, i: usize, j: usize) -> C<T> {
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        match self.col_indices[lo..hi].binary_search(&j) {
            Ok(pos) => self.values[lo + pos],
            Err(_) => czero(),
        }
    }

    /// Iterate stored entries of one row as (col, value).
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C<T>)> + '_ {
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        self.col_indices[lo..hi]
            .iter()
            .zip(self.values[lo..hi].iter())
            .map(|(&j, &v)| (j, v))
    }

    /// Iterate all stored entries as (row, col, value).
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C<T>)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    /// Diagonal as complex values (zero where unstored).
    pub fn diag(&self) -> Vec<C<T>> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn frobenius_norm(&self) -> T {
        self.values
            .iter()
            .map(|v| v.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let triplets = self.entries().map(|(i, j, v)| (j, i, v.conj())).collect();
        Self::from_triplets(self.n, triplets).expect("adjoint of valid CSR is valid")
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.entries() {
            d.set(i, j, v);
        }
        d
    }

    /// Gershgorin upper bound on the spectrum: max over rows of the absolute
    /// row sum. For a Hermitian matrix this bounds the largest eigenvalue.
    pub fn gershgorin_upper(&self) -> T {
        let mut bound = T::zero();
        for i in 0..self.n {
            let mut row_sum = T::zero();
            for (j, v) in self.row(i) {
                if j == i {
                    row_sum += v.re.abs();
                } else {
                    row_sum += v.norm();
                }
            }
            bound = bound.max(row_sum);
        }
        bound
    }

    /// Gershgorin lower bound: min over rows of diag - off-diagonal sum.
    pub fn gershgorin_lower(&self) -> T {
        let mut bound = T::infinity();
        for i in 0..self.n {
            let mut off = T::zero();
            let mut diag = T::zero();
            for (j, v) in self.row(i) {
                if j == i {
                    diag = v.re;
                } else {
                    off += v.norm();
                }
            }
            bound = bound.min(diag - off);
        }
        bound
    }

    fn check_hermitian(&self) -> bool {
        let tol = T::lit(HERMITIAN_TOL);
        for (i, j, v) in self.entries() {
            let mirror = self.get(j, i);
            if (mirror - v.conj()).norm() > tol {
                return false;
            }
        }
        true
    }
}

/// Sparse matrix-vector product `A v`.
pub fn matvec<T: Scalar>(a: &SparseMatrix<T>, v: &DenseVector<T>) -> Result<DenseVector<T>> {
    if a.dim() != v.len() {
        return Err(Error::DimensionMismatch {
            context: "matvec",
            expected: a.dim(),
            actual: v.len(),
        });
    }
    let mut out = DenseVector::zeros(a.dim());
    for i in 0..a.dim() {
        let mut acc = czero();
        for (j, val) in a.row(i) {
            acc += val * v[j];
        }
        out[i] = acc;
    }
    Ok(out)
}

/// Relative residual `||A x - b|| / ||b||`.
pub fn residual<T: Scalar>(
    a: &SparseMatrix<T>,
    x: &DenseVector<T>,
    b: &DenseVector<T>,
) -> Result<T> {
    if b.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            context: "residual rhs",
            expected: a.dim(),
            actual: b.len(),
        });
    }
    let b_norm = b.norm();
    if b_norm == T::zero() {
        return Err(Error::ZeroRhs);
    }
    let ax = matvec(a, x)?;
    Ok(ax.sub(b)?.norm() / b_norm)
}
