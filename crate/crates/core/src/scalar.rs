//! Scalar abstraction shared by the numerical modules.
//!
//! Everything that does arithmetic on weights, probabilities, embeddings or
//! gradients is written against [`Real`], so the same code runs in `f32` and
//! `f64`. Feature storage is always `f32`; training defaults to `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand_distr::weighted::AliasableWeight;

/// Floating-point scalar usable throughout the crate (`f32` or `f64`).
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + LinalgScalar
    + ScalarOperand
    + AliasableWeight
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; exact for values representable in `Self`.
    #[inline]
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 converts to every Real")
    }

    #[inline]
    fn of_usize(x: usize) -> Self {
        <Self as FromPrimitive>::from_usize(x).expect("usize converts to every Real")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("Real converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    fn half<T: Real>() -> T {
        T::of(1.0) / T::of_usize(2)
    }

    #[test]
    fn conversions_round_trip() {
        assert_eq!(half::<f32>(), 0.5f32);
        assert_eq!(half::<f64>(), 0.5f64);
        assert_eq!(f32::of(0.1).as_f64(), 0.1f32 as f64);
    }
}
