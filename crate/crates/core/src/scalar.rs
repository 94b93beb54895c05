//! Real scalar abstraction: every numeric kernel in this crate is generic
//! over the working precision and instantiated as `f32` or `f64` through
//! the aliases at the crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar usable as the real base type of all matrices,
/// vectors and register amplitudes.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Sum<Self> + Debug + Display + Send + Sync + 'static
{
    /// Lift an `f64` literal (tolerances, constants) into the working precision.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Lower to `f64` for reporting and serialization.
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Complex value in the working precision.
pub type C<T> = Complex<T>;

/// Complex zero.
pub fn czero<T: Scalar>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

/// Complex one.
pub fn cone<T: Scalar>() -> C<T> {
    Complex::new(T::one(), T::zero())
}

/// Complex from a real.
pub fn creal<T: Scalar>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}
