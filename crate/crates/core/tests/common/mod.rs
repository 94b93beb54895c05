//! Shared test fixtures and independent oracles.
//!
//! Everything here deliberately avoids the library's own computation paths:
//! the SVD oracle orthogonalizes columns one-sidedly instead of taking
//! Hermitian eigenvalues, and the QPE oracle multiplies explicit circuit
//! matrices instead of applying gates in place.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hqsolve_core::dense::DenseMatrix;
use hqsolve_core::sparse::SparseMatrix;
use hqsolve_core::vector::DenseVector;

pub type C64 = Complex64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Singular values by one-sided Jacobi: rotate column pairs of a dense copy
/// until all columns are mutually orthogonal, then read off column norms.
pub fn svd_singular_values_oracle(a: &SparseMatrix<f64>) -> Vec<f64> {
    let n = a.dim();
    // Column-major copy.
    let mut cols: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); n]; n];
    for (i, j, v) in a.entries() {
        cols[j][i] = v;
    }

    let frob: f64 = cols
        .iter()
        .flat_map(|col| col.iter().map(|x| x.norm_sqr()))
        .sum::<f64>()
        .sqrt();
    if frob == 0.0 {
        return vec![0.0; n];
    }
    let tol = 1e-15;

    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let app: f64 = cols[p].iter().map(|x| x.norm_sqr()).sum();
                let aqq: f64 = cols[q].iter().map(|x| x.norm_sqr()).sum();
                let apq: C64 = cols[p]
                    .iter()
                    .zip(cols[q].iter())
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let g = apq.norm();
                if g <= tol * (app * aqq).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * g);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let cos = 1.0 / (t * t + 1.0).sqrt();
                let sin = t * cos;
                let phase = apq / g;
                for i in 0..n {
                    let xp = cols[p][i];
                    let xq = cols[q][i];
                    cols[p][i] = xp * cos - xq * phase.conj() * sin;
                    cols[q][i] = xp * phase * sin + xq * cos;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigmas: Vec<f64> = cols
        .iter()
        .map(|col| col.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sigmas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sigmas
}

/// Condition number from the one-sided Jacobi oracle.
pub fn condition_number_oracle(a: &SparseMatrix<f64>) -> f64 {
    let sigmas = svd_singular_values_oracle(a);
    sigmas[0] / sigmas[sigmas.len() - 1]
}

/// Seeded random unitary by modified Gram-Schmidt over a complex uniform
/// matrix.
pub fn random_unitary(dim: usize, seed: u64) -> DenseMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<C64> = (0..dim)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        // Two orthogonalization passes keep the basis orthonormal to
        // machine precision.
        for _ in 0..2 {
            for u in &cols {
                let proj: C64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for i in 0..dim {
                    v[i] -= proj * u[i];
                }
            }
        }
        let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue; // resample a dependent draw
        }
        for x in &mut v {
            *x /= norm;
        }
        cols.push(v);
    }
    let mut m = DenseMatrix::zeros(dim, dim);
    for (j, col) in cols.iter().enumerate() {
        for (i, &x) in col.iter().enumerate() {
            m.set(i, j, x);
        }
    }
    m
}

/// Hermitian matrix `V diag(spectrum) V^H` with an exactly conjugate-
/// symmetric stored form.
pub fn hermitian_from_spectrum(spectrum: &[f64], seed: u64) -> SparseMatrix<f64> {
    let dim = spectrum.len();
    let v = random_unitary(dim, seed);
    let mut dense = DenseMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let mut acc = C64::new(0.0, 0.0);
            for (k, &lambda) in spectrum.iter().enumerate() {
                acc += v.get(i, k) * lambda * v.get(j, k).conj();
            }
            if i == j {
                dense.set(i, i, c(acc.re, 0.0));
            } else {
                dense.set(i, j, acc);
                dense.set(j, i, acc.conj());
            }
        }
    }
    SparseMatrix::from_dense(&dense).expect("constructed matrix is valid")
}

/// Seeded random complex vector of unit-scale entries.
pub fn random_vector(dim: usize, seed: u64) -> DenseVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1));
    DenseVector::new(
        (0..dim)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect(),
    )
}

// ---------------------------------------------------------------------------
// Brute-force statevector oracle for QPE, built from explicit matrices.
// ---------------------------------------------------------------------------

/// Dense matrix-vector product over raw complex vectors.
pub fn matvec_raw(m: &[Vec<C64>], v: &[C64]) -> Vec<C64> {
    m.iter()
        .map(|row| row.iter().zip(v.iter()).map(|(a, b)| a * b).sum())
        .collect()
}

/// Full-register Hadamard on one qubit as an explicit matrix.
pub fn hadamard_matrix(total_qubits: usize, qubit: usize) -> Vec<Vec<C64>> {
    let dim = 1usize << total_qubits;
    let mask = 1usize << qubit;
    let s = 1.0 / 2.0f64.sqrt();
    let mut m = vec![vec![C64::new(0.0, 0.0); dim]; dim];
    for row in 0..dim {
        let base = row & !mask;
        if row & mask == 0 {
            m[row][base] = c(s, 0.0);
            m[row][base | mask] = c(s, 0.0);
        } else {
            m[row][base] = c(s, 0.0);
            m[row][base | mask] = c(-s, 0.0);
        }
    }
    m
}

/// Controlled application of a system-register unitary (`dim 2^q`) from one
/// clock bit, as an explicit matrix over the full register.
pub fn controlled_system_matrix(
    system_qubits: usize,
    clock_qubits: usize,
    clock_bit: usize,
    u: &[Vec<C64>],
) -> Vec<Vec<C64>> {
    let total = 1 + clock_qubits + system_qubits;
    let dim = 1usize << total;
    let q = system_qubits;
    let mut m = vec![vec![C64::new(0.0, 0.0); dim]; dim];
    for row in 0..dim {
        let s_row = row & ((1 << q) - 1);
        let rest = row >> q;
        let clock_value = rest & ((1 << clock_qubits) - 1);
        if (clock_value >> clock_bit) & 1 == 1 {
            for (s_col, entry) in u[s_row].iter().enumerate() {
                m[row][(rest << q) | s_col] = *entry;
            }
        } else {
            m[row][row] = c(1.0, 0.0);
        }
    }
    m
}

/// Inverse QFT on the clock register straight from the DFT definition:
/// `<c'|IQFT|c> = M^{-1/2} exp(-2 pi i c c' / M)`.
pub fn clock_iqft_matrix(system_qubits: usize, clock_qubits: usize) -> Vec<Vec<C64>> {
    let total = 1 + clock_qubits + system_qubits;
    let dim = 1usize << total;
    let q = system_qubits;
    let big_m = 1usize << clock_qubits;
    let scale = 1.0 / (big_m as f64).sqrt();
    let mut m = vec![vec![C64::new(0.0, 0.0); dim]; dim];
    for row in 0..dim {
        let s = row & ((1 << q) - 1);
        let c_out = (row >> q) & (big_m - 1);
        let a = row >> (q + clock_qubits);
        for c_in in 0..big_m {
            let col = (a << (q + clock_qubits)) | (c_in << q) | s;
            let angle = -2.0 * std::f64::consts::PI * (c_in * c_out) as f64 / big_m as f64;
            m[row][col] = C64::from_polar(scale, angle);
        }
    }
    m
}

/// Run the whole QPE oracle: Hadamards, controlled powers of a *diagonal*
/// evolution `U = diag(exp(i lambda_s t))` over the padded system register,
/// then the inverse QFT.
pub fn qpe_oracle_state(
    system_eigenvalues: &[f64],
    t: f64,
    clock_qubits: usize,
    initial: &[C64],
) -> Vec<C64> {
    let q_dim = system_eigenvalues.len();
    assert!(q_dim.is_power_of_two());
    let q = q_dim.trailing_zeros() as usize;
    let total = 1 + clock_qubits + q;
    assert_eq!(initial.len(), 1 << total);

    let mut state = initial.to_vec();
    for bit in 0..clock_qubits {
        let h = hadamard_matrix(total, q + bit);
        state = matvec_raw(&h, &state);
    }
    for bit in 0..clock_qubits {
        let factor = t * (1u64 << bit) as f64;
        let u: Vec<Vec<C64>> = (0..q_dim)
            .map(|r| {
                (0..q_dim)
                    .map(|cc| {
                        if r == cc {
                            C64::from_polar(1.0, system_eigenvalues[r] * factor)
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    })
                    .collect()
            })
            .collect();
        let cu = controlled_system_matrix(q, clock_qubits, bit, &u);
        state = matvec_raw(&cu, &state);
    }
    let iqft = clock_iqft_matrix(q, clock_qubits);
    matvec_raw(&iqft, &state)
}

/// Relative L2 distance between two vectors.
pub fn rel_l2_error(got: &DenseVector<f64>, want: &DenseVector<f64>) -> f64 {
    got.sub(want).unwrap().norm() / want.norm()
}

// ---------------------------------------------------------------------------
// Minimal JSON-schema checker for the subset the report schema uses:
// type, required, properties, items, enum.
// ---------------------------------------------------------------------------

pub fn validate_against_schema(
    schema: &serde_json::Value,
    instance: &serde_json::Value,
    path: &str,
) -> Result<(), String> {
    use serde_json::Value;

    if let Some(allowed) = schema.get("enum").and_then(Value::as_array) {
        if !allowed.contains(instance) {
            return Err(format!("{path}: {instance} not in enum {allowed:?}"));
        }
    }

    if let Some(ty) = schema.get("type").and_then(Value::as_str) {
        let ok = match ty {
            "object" => instance.is_object(),
            "array" => instance.is_array(),
            "string" => instance.is_string(),
            "boolean" => instance.is_boolean(),
            "integer" => instance.as_i64().is_some() || instance.as_u64().is_some(),
            "number" => instance.is_number(),
            other => return Err(format!("{path}: unsupported schema type {other}")),
        };
        if !ok {
            return Err(format!("{path}: expected {ty}, got {instance}"));
        }
    }

    if let Some(required) = schema.get("required").and_then(Value::as_array) {
        for key in required {
            let key = key.as_str().expect("required keys are strings");
            if instance.get(key).is_none() {
                return Err(format!("{path}: missing required field {key:?}"));
            }
        }
    }

    if let Some(props) = schema.get("properties").and_then(Value::as_object) {
        if let Some(obj) = instance.as_object() {
            for (key, sub) in props {
                if let Some(value) = obj.get(key) {
                    validate_against_schema(sub, value, &format!("{path}.{key}"))?;
                }
            }
        }
    }

    if let Some(item_schema) = schema.get("items") {
        if let Some(items) = instance.as_array() {
            for (i, item) in items.iter().enumerate() {
                validate_against_schema(item_schema, item, &format!("{path}[{i}]"))?;
            }
        }
    }

    Ok(())
}

/// Load the report schema shipped with the repository.
pub fn report_schema() -> serde_json::Value {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../schema/report.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).expect("schema file present"))
        .expect("schema file parses")
}
