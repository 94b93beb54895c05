//! Dense complex linear algebra used at desk scale: Hermitian
//! eigendecomposition (cyclic Jacobi), Cholesky factorization, and the
//! 2-norm condition number of sparse matrices after densification.

use crate::error::{Error, Result};
use crate::scalar::{cone, czero, Scalar, C};
use crate::sparse::SparseMatrix;
use crate::vector::DenseVector;

/// Default dimension cap for operations that densify.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// Relative threshold under which a matrix counts as singular.
pub const SINGULAR_RATIO: f64 = 1e-14;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    nrows: usize,
    ncols: usize,
    data: Vec<C<T>>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![czero(); nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, cone());
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.data[i * self.ncols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C<T>) {
        self.data[i * self.ncols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<C<T>> {
        (0..self.nrows).map(|i| self.get(i, j)).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "matmul shape mismatch");
        let mut out = Self::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let aik = self.get(i, k);
                if aik == czero() {
                    continue;
                }
                for j in 0..other.ncols {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &DenseVector<T>) -> DenseVector<T> {
        assert_eq!(self.ncols, v.len(), "matvec shape mismatch");
        let mut out = DenseVector::zeros(self.nrows);
        for i in 0..self.nrows {
            let mut acc = czero();
            for j in 0..self.ncols {
                acc += self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .map(|v| v.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// `A^H A`.
    pub fn gram(&self) -> Self {
        self.adjoint().matmul(self)
    }

    /// Hermitian eigendecomposition by the cyclic complex Jacobi method.
    ///
    /// Returns eigenvalues in ascending order and the unitary of eigenvectors
    /// (column j pairs with eigenvalue j). The input must be Hermitian; only
    /// the stored values are used, no symmetrization is applied.
    pub fn hermitian_eigen(&self) -> Result<(Vec<T>, DenseMatrix<T>)> {
        assert_eq!(self.nrows, self.ncols, "eigendecomposition needs a square matrix");
        let n = self.nrows;
        let mut a = self.clone();
        let mut v = Self::identity(n);

        let norm = a.frobenius_norm();
        if norm == T::zero() {
            return Ok((vec![T::zero(); n], v));
        }
        let target = norm * T::epsilon() * T::lit(n as f64);

        let max_sweeps = 100;
        let mut converged = false;
        for _ in 0..max_sweeps {
            let mut off = T::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    off = off + a.get(i, j).norm_sqr() + a.get(j, i).norm_sqr();
                }
            }
            if off.sqrt() <= target {
                converged = true;
                break;
            }

            for p in 0..n {
                for q in (p + 1)..n {
                    let gamma = a.get(p, q);
                    let gnorm = gamma.norm();
                    if gnorm <= norm * T::epsilon() {
                        continue;
                    }
                    let alpha = a.get(p, p).re;
                    let beta = a.get(q, q).re;
                    let theta = (beta - alpha) / (gnorm + gnorm);
                    let t = if theta == T::zero() {
                        T::one()
                    } else {
                        theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt())
                    };
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    let phase = gamma / C::new(gnorm, T::zero());

                    // A <- J^H A J with J = [[c, s*phase], [-s*conj(phase), c]]
                    // acting on the (p, q) plane.
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, akp.scale(c) - akq * phase.conj().scale(s));
                        a.set(k, q, akp * phase.scale(s) + akq.scale(c));
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, apk.scale(c) - aqk * phase.scale(s));
                        a.set(q, k, apk * phase.conj().scale(s) + aqk.scale(c));
                    }
                    for k in 0..n {
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, vkp.scale(c) - vkq * phase.conj().scale(s));
                        v.set(k, q, vkp * phase.scale(s) + vkq.scale(c));
                    }
                }
            }
        }
        if !converged {
            // One more residual check after the final sweep.
            let mut off = T::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    off = off + a.get(i, j).norm_sqr() + a.get(j, i).norm_sqr();
                }
            }
            if off.sqrt() > target {
                return Err(Error::NoConvergence { sweeps: max_sweeps });
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        let diag: Vec<T> = (0..n).map(|i| a.get(i, i).re).collect();
        order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite eigenvalues"));

        let eigenvalues: Vec<T> = order.iter().map(|&i| diag[i]).collect();
        let mut vectors = Self::zeros(n, n);
        for (new_col, &old_col) in order.iter().enumerate() {
            for k in 0..n {
                vectors.set(k, new_col, v.get(k, old_col));
            }
        }
        Ok((eigenvalues, vectors))
    }

    /// Cholesky factorization `A = L L^H` of a Hermitian positive-definite
    /// matrix. Fails with the index of the first nonpositive pivot.
    pub fn cholesky(&self) -> Result<DenseMatrix<T>> {
        assert_eq!(self.nrows, self.ncols, "cholesky needs a square matrix");
        let n = self.nrows;
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self.get(j, j).re;
            for k in 0..j {
                d -= l.get(j, k).norm_sqr();
            }
            if d <= T::zero() || !d.is_finite() {
                return Err(Error::NotSpd {
                    context: "cholesky pivot",
                    index: j,
                });
            }
            let ljj = d.sqrt();
            l.set(j, j, C::new(ljj, T::zero()));
            for i in (j + 1)..n {
                let mut acc = self.get(i, j);
                for k in 0..j {
                    acc -= l.get(i, k) * l.get(j, k).conj();
                }
                l.set(i, j, acc.unscale(ljj));
            }
        }
        Ok(l)
    }

    /// Solve `A x = b` through the Cholesky factor.
    pub fn cholesky_solve(&self, b: &DenseVector<T>) -> Result<DenseVector<T>> {
        let n = self.nrows;
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                context: "cholesky solve rhs",
                expected: n,
                actual: b.len(),
            });
        }
        let l = self.cholesky()?;
        // Forward: L y = b
        let mut y = DenseVector::zeros(n);
        for i in 0..n {
            let mut acc = b[i];
            for k in 0..i {
                acc -= l.get(i, k) * y[k];
            }
            y[i] = acc.unscale(l.get(i, i).re);
        }
        // Backward: L^H x = y
        let mut x = DenseVector::zeros(n);
        for i in (0..n).rev() {
            let mut acc = y[i];
            for k in (i + 1)..n {
                acc -= l.get(k, i).conj() * x[k];
            }
            x[i] = acc.unscale(l.get(i, i).re);
        }
        Ok(x)
    }
}

/// Singular values of a sparse matrix after densification, descending.
///
/// Hermitian inputs take the `|eigenvalue|` route; general square inputs go
/// through the eigenvalues of `A^H A`.
pub fn singular_values<T: Scalar>(a: &SparseMatrix<T>) -> Result<Vec<T>> {
    let dense = a.to_dense();
    let mut sigmas: Vec<T> = if a.is_hermitian() {
        let (eigs, _) = dense.hermitian_eigen()?;
        eigs.into_iter().map(|l| l.abs()).collect()
    } else {
        let (eigs, _) = dense.gram().hermitian_eigen()?;
        eigs.into_iter().map(|l| l.max(T::zero()).sqrt()).collect()
    };
    sigmas.sort_by(|x, y| y.partial_cmp(x).expect("finite singular values"));
    Ok(sigmas)
}

/// 2-norm condition number `sigma_max / sigma_min` with the default
/// densification cap.
pub fn condition_number<T: Scalar>(a: &SparseMatrix<T>) -> Result<T> {
    condition_number_with_cap(a, DEFAULT_DENSE_CAP)
}

/// 2-norm condition number with an explicit densification cap.
pub fn condition_number_with_cap<T: Scalar>(a: &SparseMatrix<T>, cap: usize) -> Result<T> {
    if a.dim() > cap {
        return Err(Error::DimensionCap { n: a.dim(), cap });
    }
    let sigmas = singular_values(a)?;
    let sigma_max = sigmas[0];
    let sigma_min = *sigmas.last().expect("nonempty");
    if sigma_max == T::zero() || sigma_min < T::lit(SINGULAR_RATIO) * sigma_max {
        return Err(Error::Singular {
            ratio: if sigma_max == T::zero() {
                0.0
            } else {
                (sigma_min / sigma_max).to_f64_lossy()
            },
        });
    }
    Ok(sigma_max / sigma_min)
}
