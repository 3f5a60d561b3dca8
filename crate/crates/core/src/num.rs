//! Scalar abstraction for the score math.

use num_traits::{Float, FromPrimitive};
use std::fmt;
use std::iter::Sum;
use std::ops::AddAssign;

/// Floating-point scalar used for probabilities, scores and deltas.
///
/// Everything structural (node ids, degrees, walk counts, seeds) stays in
/// integer types; only measured quantities are expressed in `Real`. `f32` and
/// `f64` both implement it.
pub trait Real:
    Float + FromPrimitive + AddAssign + Sum<Self> + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + AddAssign
        + Sum<T>
        + fmt::Debug
        + fmt::Display
        + Send
        + Sync
        + 'static
{
}

/// `num / den` as a `Real`. Panics if the scalar cannot represent the
/// integers, which cannot happen for the walk counts used here.
pub(crate) fn ratio<F: Real>(num: u64, den: u64) -> F {
    debug_assert!(den > 0);
    from_u64::<F>(num) / from_u64::<F>(den)
}

/// `n` as a `Real`.
pub(crate) fn from_u64<F: Real>(n: u64) -> F {
    F::from_u64(n).expect("count representable")
}

/// `n` as a `Real`.
pub(crate) fn from_usize<F: Real>(n: usize) -> F {
    F::from_usize(n).expect("count representable")
}
