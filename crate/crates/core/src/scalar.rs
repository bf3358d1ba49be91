//! Floating-point bound shared by every numerical kernel in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst};
use rustfft::FftNum;

/// A real scalar usable by the spectral kernels.
///
/// `FftNum` brings `num_traits::Signed` along with it, so `abs` and `signum`
/// are ambiguous on a generic `S`; write `Float::abs(x)` in generic code.
pub trait Scalar:
    Float + FloatConst + FftNum + Sum + Default + Display + LowerExp + Debug + Send + Sync + 'static
{
    /// Converts an `f64` literal. Infallible for the supported float types.
    fn lit(x: f64) -> Self;

    fn to_f64_lossy(self) -> f64;

    fn of_usize(n: usize) -> Self {
        Self::lit(n as f64)
    }
}

impl Scalar for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}
