//! Scalar abstraction for the numeric core.
//!
//! Everything in [`crate::linalg`], [`crate::operators`], [`crate::bounds`]
//! and [`crate::fock_sim`] is generic over a floating-point scalar so the
//! same code runs in `f32` or `f64`. Concrete `f64` aliases live at the
//! crate root; the Monte-Carlo layer is `f64` only.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for converting an `f64` literal into the working scalar.
#[inline]
pub(crate) fn r<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal must convert into the scalar type")
}

/// Converts an integer-valued count into the working scalar.
#[inline]
pub(crate) fn from_count<T: Real>(n: u64) -> T {
    T::from_u64(n).expect("count must convert into the scalar type")
}
