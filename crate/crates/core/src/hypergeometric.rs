//! Terminating hypergeometric series with integer or half-integer
//! parameters.
//!
//! The sums are generic over any [`Num`] field, so they can be evaluated
//! exactly over rationals as well as in floating point.

use num_traits::{FromPrimitive, Num};

use crate::error::{Error, Result};
use crate::scalar::{from_usize, Real};

/// A half-integer `k/2`, stored as `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const fn from_int(n: i64) -> Self {
        HalfInt(2 * n)
    }

    pub const fn from_halves(k: i64) -> Self {
        HalfInt(k)
    }

    pub const fn halves(self) -> i64 {
        self.0
    }

    /// `Some(j)` when the value is the non-positive integer `−j`.
    pub fn nonpositive_integer(self) -> Option<usize> {
        (self.0 <= 0 && self.0 % 2 == 0).then(|| (-self.0 / 2) as usize)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

fn int<T: Num + FromPrimitive>(n: i64) -> T {
    T::from_i64(n).expect("integer representable in scalar type")
}

/// Rising factorial `(a)_k`.
pub fn pochhammer<T: Num + Clone + FromPrimitive>(a: HalfInt, k: usize) -> T {
    let mut p = T::one();
    for j in 0..k as i64 {
        p = p * int::<T>(a.0 + 2 * j) / int::<T>(2);
    }
    p
}

/// `₂F₀(−n, −m; ; x) = Σ_{k=0}^{min(n,m)} (−n)_k (−m)_k x^k / k!`.
pub fn hyp2f0_terminating<T: Num + Clone + FromPrimitive>(n: usize, m: usize, x: T) -> T {
    let kmax = n.min(m) as i64;
    let (n, m) = (n as i64, m as i64);
    let mut term = T::one();
    let mut sum = T::one();
    for k in 0..kmax {
        term = term * int::<T>((k - n) * (k - m)) / int::<T>(k + 1) * x.clone();
        sum = sum + term.clone();
    }
    sum
}

/// Gauss series `₂F₁(a₁, a₂; c; x)` truncated where it terminates.
///
/// At least one numerator parameter must be a non-positive integer, and the
/// denominator must not vanish before the series stops.
pub fn hyp2f1_terminating<T: Num + Clone + FromPrimitive>(
    a1: HalfInt,
    a2: HalfInt,
    c: HalfInt,
    x: T,
) -> Result<T> {
    let kmax = match (a1.nonpositive_integer(), a2.nonpositive_integer()) {
        (Some(i), Some(j)) => i.min(j),
        (Some(i), None) => i,
        (None, Some(j)) => j,
        (None, None) => {
            return Err(Error::Domain(format!(
                "2F1({}, {}; {}; x) does not terminate",
                a1.to_f64(),
                a2.to_f64(),
                c.to_f64()
            )))
        }
    };
    if let Some(j) = c.nonpositive_integer() {
        if j < kmax {
            return Err(Error::Domain(format!(
                "2F1 denominator parameter {} vanishes before termination",
                c.to_f64()
            )));
        }
    }
    let mut term = T::one();
    let mut sum = T::one();
    for k in 0..kmax as i64 {
        let num = (a1.0 + 2 * k) * (a2.0 + 2 * k);
        let den = (c.0 + 2 * k) * 2 * (k + 1);
        term = term * int::<T>(num) / int::<T>(den) * x.clone();
        sum = sum + term.clone();
    }
    Ok(sum)
}

/// `[ln 0!, ln 1!, …, ln n!]`.
pub fn ln_factorials<T: Real>(n: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = T::zero();
    out.push(acc);
    for k in 1..=n {
        acc += from_usize::<T>(k).ln();
        out.push(acc);
    }
    out
}
