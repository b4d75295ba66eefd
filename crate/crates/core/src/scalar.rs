use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar used throughout the crate (`f32`, `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Never fails for the float types implemented here.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    /// Loosest default tolerance that the type can actually reach.
    fn default_tol() -> Self {
        Self::lit(1e-10).max(Self::lit(100.0) * Self::epsilon())
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `1 - y^k` for `y = 1 - gap/scale`, accurate when the gap is tiny.
#[inline]
pub(crate) fn one_minus_pow_from_gap<T: Real>(ratio: T, gap: T, scale: T, k: T) -> T {
    if gap < T::lit(0.5) * scale {
        -(k * (-gap / scale).ln_1p()).exp_m1()
    } else {
        T::one() - ratio.powf(k)
    }
}
