//! Evolution-operator parameters `(θ, τ, φ, ξ)` from an Ermakov state.
//!
//! With `u = (β − 2iα/β)/√ω` and `v = √ω/β` the parameters satisfy
//!
//! ```text
//! u + v = 2 e^{−iθ} cosh τ
//! u − v = 2 e^{i(θ−2φ)} sinh τ
//! ξ √2  = ε − iδ/β
//! ```
//!
//! Angles come from complex arguments, not arctangents, so the quadrant is
//! never lost.

use num_complex::Complex;

use crate::ermakov::ErmakovState;
use crate::error::{to_f64, Error, Result};
use crate::scalar::{cis, lit, sin_cos, wrap_angle, Real};

/// Parameters of `U = e^{iθN} S(τ, φ) D(ξ) e^{2iγN}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezeParameters<T> {
    pub theta: T,
    pub tau: T,
    pub phi: T,
    pub xi: Complex<T>,
}

impl<T: Real> SqueezeParameters<T> {
    pub fn identity() -> Self {
        Self {
            theta: T::zero(),
            tau: T::zero(),
            phi: T::zero(),
            xi: Complex::new(T::zero(), T::zero()),
        }
    }
}

fn check<T: Real>(state: &ErmakovState<T>, omega: T) -> Result<()> {
    if state.beta == T::zero() {
        return Err(Error::Singularity {
            t_lo: f64::NAN,
            t_hi: f64::NAN,
        });
    }
    if !(omega > T::zero()) || !omega.is_finite() {
        return Err(Error::Domain(format!(
            "mode frequency must be positive, got {}",
            to_f64(omega)
        )));
    }
    Ok(())
}

/// `(u + v, u − v)` for the state.
fn defining_sums<T: Real>(state: &ErmakovState<T>, omega: T) -> (Complex<T>, Complex<T>) {
    let sw = omega.sqrt();
    let two = lit::<T>(2.0);
    let u = Complex::new(state.beta, -two * state.alpha / state.beta) / sw;
    let v = sw / state.beta;
    (u + v, u - v)
}

fn shift<T: Real>(state: &ErmakovState<T>) -> Complex<T> {
    Complex::new(state.epsilon, -state.delta / state.beta)
}

pub fn to_squeeze_parameters<T: Real>(
    state: &ErmakovState<T>,
    omega: T,
) -> Result<SqueezeParameters<T>> {
    check(state, omega)?;
    let (x1, x2) = defining_sums(state, omega);
    let theta = wrap_angle(-x1.arg());
    let half = lit::<T>(0.5);
    let (tau, phi) = if x2.norm() <= lit::<T>(8.0) * T::epsilon() * x1.norm() {
        // φ is unobservable at τ = 0
        (T::zero(), T::zero())
    } else {
        let tau = (x2.norm() * half).asinh();
        (tau, wrap_angle((theta - x2.arg()) * half))
    };
    let xi = shift(state) / lit::<T>(2.0).sqrt();
    let p = SqueezeParameters {
        theta,
        tau,
        phi,
        xi,
    };
    if !(theta.is_finite() && tau.is_finite() && phi.is_finite() && xi.re.is_finite() && xi.im.is_finite())
    {
        return Err(Error::Numeric("squeeze parameters not finite".into()));
    }
    Ok(p)
}

/// Largest deviation over the three defining identities.
pub fn consistency_residual<T: Real>(
    p: &SqueezeParameters<T>,
    state: &ErmakovState<T>,
    omega: T,
) -> T {
    let (x1, x2) = defining_sums(state, omega);
    let two = lit::<T>(2.0);
    let r1 = (x1 - cis(-p.theta) * (two * p.tau.cosh())).norm();
    let r2 = (x2 - cis(p.theta - two * p.phi) * (two * p.tau.sinh())).norm();
    let r3 = (p.xi * two.sqrt() - shift(state)).norm();
    r1.max(r2).max(r3)
}

/// Quadrant-free defects of the tangent relations
/// `tan θ = 2α/(β² + ω)` and `tan 2φ = 4αβ²/(β⁴ − 4α² − ω²)`,
/// written as normalized cross products.
pub fn tangent_defects<T: Real>(
    p: &SqueezeParameters<T>,
    state: &ErmakovState<T>,
    omega: T,
) -> (T, T) {
    let two = lit::<T>(2.0);
    let four = lit::<T>(4.0);
    let (al, be) = (state.alpha, state.beta);
    let b2 = be * be;
    let (num1, den1) = (two * al, b2 + omega);
    let (st, ct) = sin_cos(p.theta);
    let d1 = (st * den1 - ct * num1).abs() / num1.hypot(den1);
    let (num2, den2) = (four * al * b2, b2 * b2 - four * al * al - omega * omega);
    let norm2 = num2.hypot(den2);
    let d2 = if norm2 == T::zero() {
        T::zero()
    } else {
        let (sp, cp) = sin_cos(two * p.phi);
        (sp * den2 - cp * num2).abs() / norm2
    };
    (d1, d2)
}

/// Whether the state yields a minimum-uncertainty (unsqueezed-phase) point:
/// `α = 0` and `β² = ω` within `tol`.
pub fn is_unsqueezed<T: Real>(state: &ErmakovState<T>, omega: T, tol: T) -> bool {
    state.alpha.abs() <= tol && (state.beta * state.beta - omega).abs() <= tol
}
