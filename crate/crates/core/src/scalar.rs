use core::fmt::Debug;
use core::iter::Sum;

use num_traits::Float;

/// Floating point element type of tensors and parameters.
///
/// Training runs in `f32`; finite-difference checks run in `f64`.
pub trait Real: Float + Sum + Default + Debug + Send + Sync + 'static {
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Real for f32 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}
