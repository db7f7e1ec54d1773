//! Scalar abstraction: the crate's numerics are generic over `f32`/`f64`.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps, ToPrimitive};
use rustfft::FftNum;

/// Floating-point scalar usable throughout the crate.
///
/// Bundles the `num-traits` surface the math needs with `rustfft`'s
/// requirements so one bound works for fields, transforms and samplers.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssignOps + FftNum + Default
{
    /// Shorthand for converting an `f64` literal into `Self`.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal must be representable")
    }

    /// Lossy conversion to `f64` (exact for `f64` itself).
    #[inline]
    fn to64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
