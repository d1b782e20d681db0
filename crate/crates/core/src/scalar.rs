use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point type the library is generic over (`f32`, `f64`).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + NumAssign
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Converts an `f64` constant into `T`.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant representable in scalar type")
}

/// Widens to `f64` for reporting.
#[inline]
pub fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// A tolerance that is `base` in double precision and is floored at
/// `4096 ε` for lower-precision scalars.
#[inline]
pub fn tol<T: Scalar>(base: f64) -> T {
    let floor = T::epsilon() * lit(4096.0);
    let b = lit::<T>(base);
    if b > floor {
        b
    } else {
        floor
    }
}

/// `sign(x)` as ±1 (zero maps to +1).
#[inline]
pub(crate) fn sgn<T: Scalar>(x: T) -> T {
    if x < T::zero() {
        -T::one()
    } else {
        T::one()
    }
}
