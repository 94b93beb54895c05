//! Dense complex vectors.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::{czero, Scalar, C};

/// Dense complex vector of a system's dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseVector<T> {
    entries: Vec<C<T>>,
}

impl<T: Scalar> DenseVector<T> {
    pub fn new(entries: Vec<C<T>>) -> Self {
        Self { entries }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            entries: vec![czero(); n],
        }
    }

    /// All-ones real vector.
    pub fn ones(n: usize) -> Self {
        Self {
            entries: vec![C::new(T::one(), T::zero()); n],
        }
    }

    /// Build from real entries.
    pub fn from_real(values: &[T]) -> Self {
        Self {
            entries: values.iter().map(|&v| C::new(v, T::zero())).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[C<T>] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [C<T>] {
        &mut self.entries
    }

    pub fn into_entries(self) -> Vec<C<T>> {
        self.entries
    }

    /// Euclidean norm.
    pub fn norm(&self) -> T {
        self.entries
            .iter()
            .map(|c| c.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// Conjugated inner product `self^H other`.
    pub fn dot(&self, other: &Self) -> C<T> {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a.conj() * b)
            .fold(czero(), |acc, v| acc + v)
    }

    pub fn scale(&self, factor: C<T>) -> Self {
        Self {
            entries: self.entries.iter().map(|&e| e * factor).collect(),
        }
    }

    /// `self - other`, checking dimensions.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                context: "vector subtraction",
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(Self {
            entries: self
                .entries
                .iter()
                .zip(other.entries.iter())
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Concatenate a sequence of vectors.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Self>) -> Self
    where
        T: 'a,
    {
        let mut entries = Vec::new();
        for p in parts {
            entries.extend_from_slice(&p.entries);
        }
        Self { entries }
    }

    /// Slice out `[start, start+len)` as a new vector.
    pub fn slice(&self, start: usize, len: usize) -> Self {
        Self {
            entries: self.entries[start..start + len].to_vec(),
        }
    }

    /// Maximum entrywise distance to another vector.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    /// Widen to f64 entries.
    pub fn to_c64(&self) -> Vec<num_complex::Complex<f64>> {
        self.entries
            .iter()
            .map(|c| num_complex::Complex::new(c.re.to_f64_lossy(), c.im.to_f64_lossy()))
            .collect()
    }
}

impl<T> Index<usize> for DenseVector<T> {
    type Output = C<T>;
    fn index(&self, i: usize) -> &C<T> {
        &self.entries[i]
    }
}

impl<T> IndexMut<usize> for DenseVector<T> {
    fn index_mut(&mut self, i: usize) -> &mut C<T> {
        &mut self.entries[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_and_dot() {
        let v: DenseVector<f64> = DenseVector::from_real(&[3.0, 4.0]);
        assert!((v.norm() - 5.0).abs() < 1e-15);
        let w: DenseVector<f64> = DenseVector::new(vec![C::new(0.0, 1.0), C::new(1.0, 0.0)]);
        let d = w.dot(&w);
        assert!((d.re - 2.0).abs() < 1e-15 && d.im.abs() < 1e-15);
    }

    #[test]
    fn sub_rejects_mismatched_lengths() {
        let a: DenseVector<f64> = DenseVector::zeros(2);
        let b = DenseVector::zeros(3);
        assert!(a.sub(&b).is_err());
    }
}
