//! Scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the engine is generic over: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; literals and RNG output go through here.
    fn of(x: f64) -> Self;

    fn of_usize(n: usize) -> Self;

    fn to_f64_lossy(self) -> f64;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn of(x: f64) -> Self {
                x as $t
            }

            #[inline]
            fn of_usize(n: usize) -> Self {
                n as $t
            }

            #[inline]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

const PAIRWISE_BLOCK: usize = 8;

/// Pairwise (tree) summation of `f(k)` for `k` in `lo..hi`, in index order.
pub fn pairwise_sum_by<T: Real, F: Fn(usize) -> T>(lo: usize, hi: usize, f: &F) -> T {
    let n = hi - lo;
    if n <= PAIRWISE_BLOCK {
        let mut acc = T::zero();
        for k in lo..hi {
            acc = acc + f(k);
        }
        return acc;
    }
    let mid = lo + n / 2;
    pairwise_sum_by(lo, mid, f) + pairwise_sum_by(mid, hi, f)
}

/// Pairwise summation of two sums at once.
pub fn pairwise_sum2_by<T: Real, F: Fn(usize) -> (T, T)>(lo: usize, hi: usize, f: &F) -> (T, T) {
    let n = hi - lo;
    if n <= PAIRWISE_BLOCK {
        let mut a = T::zero();
        let mut b = T::zero();
        for k in lo..hi {
            let (x, y) = f(k);
            a = a + x;
            b = b + y;
        }
        return (a, b);
    }
    let mid = lo + n / 2;
    let (a0, b0) = pairwise_sum2_by(lo, mid, f);
    let (a1, b1) = pairwise_sum2_by(mid, hi, f);
    (a0 + a1, b0 + b1)
}

pub fn pairwise_sum<T: Real>(values: &[T]) -> T {
    pairwise_sum_by(0, values.len(), &|k| values[k])
}
