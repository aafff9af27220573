//! Scalar trait for the floating-point types the library is generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::ScalarOperand;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar: f32 or f64.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + ScalarOperand
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Convert an f64 constant to the working scalar type.
#[inline]
pub fn real<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("f64 constant not representable")
}

/// Lossy conversion back to f64 for diagnostics and output.
#[inline]
pub fn to_f64<F: Real>(x: F) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
