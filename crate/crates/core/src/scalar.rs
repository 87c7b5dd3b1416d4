//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating-point scalar (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Converts a count or index into the working scalar.
#[inline]
pub fn from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("integer representable in scalar type")
}

/// `(sin x, cos x)` from two independent calls.
///
/// Optimized builds otherwise fuse the pair into one `sincos` call, which can
/// differ from `cos` in the last bit and make outputs depend on the profile.
#[inline]
pub fn sin_cos<T: Real>(x: T) -> (T, T) {
    (x.sin(), std::hint::black_box(x).cos())
}

/// `e^{i x}`.
#[inline]
pub fn cis<T: Real>(x: T) -> Complex<T> {
    let (s, c) = sin_cos(x);
    Complex::new(c, s)
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle<T: Real>(x: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut y = x % two_pi;
    if y <= -T::PI() {
        y += two_pi;
    } else if y > T::PI() {
        y -= two_pi;
    }
    y
}
