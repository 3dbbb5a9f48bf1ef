//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point types the library computes with.
///
/// Everything numerical is written against this trait so that `f32` and
/// `f64` share one implementation. Tolerances in the test-suite are pinned
/// for `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal, panicking only if the type cannot hold it.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `|t|^{q}` with the convention `0^q = 0` for every `q`.
    #[inline]
    fn abs_pow(self, q: Self) -> Self {
        let a = self.abs();
        if a == Self::zero() {
            Self::zero()
        } else if q == Self::lit(2.0) {
            a * a
        } else {
            a.powf(q)
        }
    }

    /// `|t|^{q-2} t`, the signed power; zero at `t = 0` for every `q > 1`.
    #[inline]
    fn signed_pow(self, q: Self) -> Self {
        if self == Self::zero() {
            Self::zero()
        } else if q == Self::lit(2.0) {
            self
        } else {
            self.signum() * self.abs().powf(q - Self::one())
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Sums a slice in a fixed pairwise order.
///
/// The result depends only on the input order, never on thread layout.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        xs.iter().fold(T::zero(), |acc, &x| acc + x)
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}
