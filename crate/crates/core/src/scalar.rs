//! Scalar abstraction shared by the geometry, tracking and feature code.

use std::fmt::Debug;

use num_traits::{Float, FloatConst, NumCast};

/// Floating point type the geometric core is written against.
///
/// Implemented for `f32` and `f64`. The pipeline runs in `f64` and stores
/// the final feature matrix as `f32`.
pub trait Scalar: Float + FloatConst + Default + Debug + Send + Sync + 'static {
    /// Converts an `f64` literal or value into `Self`.
    fn lit(v: f64) -> Self {
        <Self as NumCast>::from(v).expect("value representable in scalar type")
    }

    /// Converts `self` into `f64`.
    fn as_f64(self) -> f64 {
        <f64 as NumCast>::from(self).expect("scalar convertible to f64")
    }

    /// Small positive constant guarding every division by a length.
    fn gamma() -> Self {
        Self::lit(GAMMA)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Degeneracy guard used in all length divisions (1e-10).
pub const GAMMA: f64 = 1e-10;

/// `num / den`, where denominators at or below the guard are replaced by it.
///
/// Exact for every non-degenerate input; finite for degenerate ones.
#[inline]
pub fn guarded_div<T: Scalar>(num: T, den: T) -> T {
    let g = T::gamma();
    if den > g {
        num / den
    } else {
        num / g
    }
}
