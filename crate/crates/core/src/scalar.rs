use std::fmt;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar type underlying every complex coefficient: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + fmt::Debug + fmt::Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal (tolerances, constants) into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub(crate) fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

pub(crate) fn one<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

/// `z^k` for any integer `k`; `z` must be nonzero when `k < 0`.
pub(crate) fn powi<T: Real>(z: Complex<T>, k: i64) -> Complex<T> {
    if k >= 0 {
        z.powu(k as u32)
    } else {
        z.inv().powu((-k) as u32)
    }
}
