use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, NumCast};

/// Floating-point scalar accepted by the closed-form evaluators and the min-plus scheme.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumCast + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Relative tolerance used for indicator equalities such as `0_{x = 0}`.
    fn indicator_tol() -> Self {
        let floor = Self::epsilon() * lit(16.0);
        let base: Self = lit(1e-12);
        if floor > base {
            floor
        } else {
            base
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in the target float type")
}

/// Converts `T` into `f64`.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Tests `a == 0` up to `indicator_tol() * max(1, scale)`.
#[inline]
pub fn is_zero_within<T: Real>(a: T, scale: T) -> bool {
    a.abs() <= T::indicator_tol() * scale.abs().max(T::one())
}
