//! Scalar abstraction shared by every numerical module.
//!
//! All state-vector, surrogate and metric code is written against [`Real`],
//! which is implemented for `f32` and `f64`. Most experiments run in `f64`;
//! `f32` is useful for quick smoke runs and to check that nothing leans on
//! double-precision accidents.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub trait Real:
    Float
    + NumAssign
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal or computed constant into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Real")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Infinity norm of a slice.
pub fn max_abs<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

pub fn norm2<T: Real>(v: &[T]) -> T {
    dot(v, v).sqrt()
}

/// `1 - f` for the normalised scalar product `f` of two vectors.
///
/// Evaluated as `|u - v|^2 / 2` on the unit vectors, which keeps full
/// relative precision when the vectors are nearly parallel. Returns zero when
/// either vector vanishes.
pub fn one_minus_similarity<T: Real>(a: &[T], b: &[T]) -> T {
    let na = norm2(a);
    let nb = norm2(b);
    if na == T::zero() || nb == T::zero() {
        return T::zero();
    }
    let s: T = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let d = *x / na - *y / nb;
            d * d
        })
        .sum();
    s * T::half()
}
