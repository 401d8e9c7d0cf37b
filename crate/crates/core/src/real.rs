//! Scalar abstraction used by the numerical kernels.

use std::fmt::{Debug, Display, LowerExp};
use std::ops::{Add, Sub};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, Zero};

/// Floating-point scalar accepted by the kernels in [`crate::numerics`].
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Converts a literal. Every `f64` literal used by the kernels fits in `f32`.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in the scalar type")
    }

    /// Converts a count.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in the scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// A value that can be integrated: a real scalar or a complex number over it.
pub trait Integrable<T: Real>:
    Copy + Zero + Add<Output = Self> + Sub<Output = Self> + std::ops::Mul<T, Output = Self> + Debug
{
    /// Modulus used for error estimates.
    fn modulus(&self) -> T;
}

impl<T: Real> Integrable<T> for T {
    #[inline]
    fn modulus(&self) -> T {
        self.abs()
    }
}

impl<T: Real> Integrable<T> for Complex<T> {
    #[inline]
    fn modulus(&self) -> T {
        self.norm()
    }
}
