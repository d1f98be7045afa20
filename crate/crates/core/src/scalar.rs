//! Scalar abstraction for the numerical core.
//!
//! Everything downstream of the data containers is generic over [`Scalar`],
//! so the solver stack runs in `f32` or `f64` without duplication. `f64` is
//! the default throughout the crate's type aliases; `f32` loses enough
//! precision that the tight KKT tolerances used in the tests only make sense
//! in `f64`.

use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by the solver stack.
///
/// A blanket impl covers every type with the required bounds; in practice
/// that is `f32` and `f64`.
pub trait Scalar:
    nalgebra::RealField
    + FromPrimitive
    + ToPrimitive
    + Copy
    + Default
    + std::iter::Sum
    + for<'a> std::iter::Sum<&'a Self>
{
}

impl<T> Scalar for T where
    T: nalgebra::RealField
        + FromPrimitive
        + ToPrimitive
        + Copy
        + Default
        + std::iter::Sum
        + for<'a> std::iter::Sum<&'a Self>
{
}

/// Lossy conversion from `f64` literals and configuration values.
#[inline]
pub fn cast<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("finite f64 constants convert into any Scalar")
}

/// Lossy conversion to `f64` for reporting and diagnostics.
#[inline]
pub fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().expect("Scalar values convert to f64")
}

/// Mean of a slice; zero on empty input.
pub fn mean<T: Scalar>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    xs.iter().copied().sum::<T>() / cast::<T>(xs.len() as f64)
}
