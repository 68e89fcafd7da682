//! Scalar abstraction: every numerical routine in the crate is written once
//! against [`Real`] and instantiated for `f32` and `f64`.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar usable throughout the crate.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Every `f64` is representable (possibly rounded)
    /// in both supported types, so this never fails.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::lit(n as f64)
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn deg(self) -> Self {
        self.to_degrees()
    }

    #[inline]
    fn rad(self) -> Self {
        self.to_radians()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Degrees to radians for an `f64` literal, converted to `T`.
#[inline]
pub fn deg<T: Real>(degrees: f64) -> T {
    T::lit(degrees.to_radians())
}
