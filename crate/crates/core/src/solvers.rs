//! Classical baseline solvers: dense Cholesky direct solve and (optionally
//! Jacobi-preconditioned) conjugate gradients.

use crate::dense::DEFAULT_DENSE_CAP;
use crate::error::{Error, Result};
use crate::precondition::Preconditioner;
use crate::scalar::Scalar;
use crate::sparse::{matvec, SparseMatrix};
use crate::vector::DenseVector;

/// How often CG recomputes the true residual to guard against drift of the
/// recursive residual.
const TRUE_RESIDUAL_EVERY: usize = 50;

/// Direct solve of an SPD system through a dense Cholesky factorization.
pub fn direct_solve<T: Scalar>(a: &SparseMatrix<T>, b: &DenseVector<T>) -> Result<DenseVector<T>> {
    direct_solve_with_cap(a, b, DEFAULT_DENSE_CAP)
}

/// As [`direct_solve`] with an explicit densification cap.
pub fn direct_solve_with_cap<T: Scalar>(
    a: &SparseMatrix<T>,
    b: &DenseVector<T>,
    cap: usize,
) -> Result<DenseVector<T>> {
    if a.dim() > cap {
        return Err(Error::DimensionCap { n: a.dim(), cap });
    }
    if b.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            context: "direct_solve rhs",
            expected: a.dim(),
            actual: b.len(),
        });
    }
    a.to_dense().cholesky_solve(b)
}

/// Conjugate-gradient solution with iteration count.
#[derive(Clone, Debug)]
pub struct CgSolution<T> {
    pub x: DenseVector<T>,
    pub iterations: usize,
    /// Relative true residual at termination.
    pub residual: T,
}

/// Conjugate gradients for Hermitian positive-definite systems, optionally
/// preconditioned by a Jacobi diagonal.
///
/// Convergence is declared on the relative 2-norm of the *true* residual,
/// which is recomputed every 50 iterations and whenever the recursive
/// residual first drops under the tolerance.
pub fn conjugate_gradient<T: Scalar>(
    a: &SparseMatrix<T>,
    b: &DenseVector<T>,
    tol: T,
    max_iter: usize,
    preconditioner: Option<&Preconditioner<T>>,
) -> Result<CgSolution<T>> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            context: "conjugate_gradient rhs",
            expected: n,
            actual: b.len(),
        });
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let b_norm = b.norm();
    if b_norm == T::zero() {
        return Err(Error::ZeroRhs);
    }

    let apply_m = |r: &DenseVector<T>| -> DenseVector<T> {
        match preconditioner {
            Some(m) => m.apply_inverse(r),
            None => r.clone(),
        }
    };

    let mut x = DenseVector::zeros(n);
    let mut r = b.clone();
    let mut z = apply_m(&r);
    let mut p = z.clone();
    let mut rho = r.dot(&z).re;

    let mut best_x = x.clone();
    let mut best_res = r.norm() / b_norm;
    if best_res <= tol {
        return Ok(CgSolution {
            x,
            iterations: 0,
            residual: best_res,
        });
    }

    for iteration in 1..=max_iter {
        let ap = matvec(a, &p)?;
        let curvature = p.dot(&ap).re;
        if !(curvature > T::zero()) || !curvature.is_finite() {
            return Err(Error::NumericalBreakdown(format!(
                "nonpositive curvature {curvature} at iteration {iteration}"
            )));
        }
        let alpha = rho / curvature;
        for i in 0..n {
            x[i] += p[i].scale(alpha);
            r[i] -= ap[i].scale(alpha);
        }

        let recursive_res = r.norm() / b_norm;
        let resync = iteration % TRUE_RESIDUAL_EVERY == 0 || recursive_res <= tol;
        if resync {
            r = b.sub(&matvec(a, &x)?)?;
        }
        let true_res = if resync { r.norm() / b_norm } else { recursive_res };
        if true_res < best_res {
            best_res = true_res;
            best_x = x.clone();
        }
        if true_res <= tol {
            return Ok(CgSolution {
                x,
                iterations: iteration,
                residual: true_res,
            });
        }

        z = apply_m(&r);
        let rho_next = r.dot(&z).re;
        if rho_next == T::zero() {
            return Err(Error::NumericalBreakdown(format!(
                "stagnated inner product at iteration {iteration}"
            )));
        }
        let beta = rho_next / rho;
        for i in 0..n {
            p[i] = z[i] + p[i].scale(beta);
        }
        rho = rho_next;
    }

    Err(Error::MaxIterations {
        iterations: max_iter,
        residual: best_res.to_f64_lossy(),
        best: best_x.to_c64(),
    })
}
