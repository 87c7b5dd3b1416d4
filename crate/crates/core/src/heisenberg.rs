//! Heisenberg-picture operators as linear combinations of the initial
//! ladder operators.
//!
//! ```text
//! â(t) = A â + B â† + shift
//! A = e^{2iγ}(ω + β² + 2iα)/(2β√ω)
//! B = e^{−2iγ}(ω − β² + 2iα)/(2β√ω)
//! ```

use std::io::Write;

use num_complex::Complex;

use crate::ermakov::ErmakovState;
use crate::error::{to_f64, Error, Result};
use crate::export::fmt_num;
use crate::scalar::{cis, from_usize, lit, Real};

/// `Ô = a·â + b·â† + shift`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorCoefficients<T> {
    pub a: Complex<T>,
    pub b: Complex<T>,
    pub shift: Complex<T>,
}

impl<T: Real> OperatorCoefficients<T> {
    /// Coefficients of `Ô†`.
    pub fn adjoint(&self) -> Self {
        Self {
            a: self.b.conj(),
            b: self.a.conj(),
            shift: self.shift.conj(),
        }
    }

    /// `|A|² − |B|²`, equal to one for any canonical annihilator.
    pub fn canonical_defect(&self) -> T {
        (self.a.norm_sqr() - self.b.norm_sqr() - T::one()).abs()
    }

    pub fn max_diff(&self, other: &Self) -> T {
        (self.a - other.a)
            .norm()
            .max((self.b - other.b).norm())
            .max((self.shift - other.shift).norm())
    }

    pub fn is_finite(&self) -> bool {
        [self.a, self.b, self.shift]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Quadrature `x̂ = a·â + adag·â† + constant`, with `adag = a*`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureCoefficients<T> {
    pub a: Complex<T>,
    pub adag: Complex<T>,
    pub constant: T,
}

impl<T: Real> QuadratureCoefficients<T> {
    fn hermitian(a: Complex<T>, constant: T) -> Self {
        Self {
            a,
            adag: a.conj(),
            constant,
        }
    }

    pub fn as_operator(&self) -> OperatorCoefficients<T> {
        OperatorCoefficients {
            a: self.a,
            b: self.adag,
            shift: Complex::new(self.constant, T::zero()),
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

/// `(A, B)` of `â(t)`.
pub fn ab_coefficients<T: Real>(state: &ErmakovState<T>, omega: T) -> Result<(Complex<T>, Complex<T>)> {
    check(state, omega)?;
    let two = lit::<T>(2.0);
    let ErmakovState {
        alpha, beta, gamma, ..
    } = *state;
    let den = two * beta * omega.sqrt();
    let b2 = beta * beta;
    let a = cis(two * gamma) * Complex::new(omega + b2, two * alpha) / den;
    let b = cis(-two * gamma) * Complex::new(omega - b2, two * alpha) / den;
    Ok((a, b))
}

/// `â(t)` in the Heisenberg picture.
pub fn heisenberg_a<T: Real>(state: &ErmakovState<T>, omega: T) -> Result<OperatorCoefficients<T>> {
    let (a, b) = ab_coefficients(state, omega)?;
    let ErmakovState {
        alpha,
        beta,
        delta,
        epsilon,
        ..
    } = *state;
    let two = lit::<T>(2.0);
    let bracket = Complex::new(omega * epsilon / beta, -(delta - two * alpha * epsilon / beta));
    let shift = -bracket / (two * omega).sqrt();
    Ok(OperatorCoefficients { a, b, shift })
}

/// `â†(t)` in the Heisenberg picture.
pub fn heisenberg_adag<T: Real>(state: &ErmakovState<T>, omega: T) -> Result<OperatorCoefficients<T>> {
    Ok(heisenberg_a(state, omega)?.adjoint())
}

/// `(q̂(t), p̂(t))` over the initial `â, â†`.
///
/// The ladder operators are those of the mode frequency,
/// `q̂ = (â + â†)/√(2ω)`; ω enters only through the state.
pub fn heisenberg_qp<T: Real>(
    state: &ErmakovState<T>,
) -> Result<(QuadratureCoefficients<T>, QuadratureCoefficients<T>)> {
    check(state, T::one())?;
    let ErmakovState {
        alpha,
        beta,
        gamma,
        delta,
        epsilon,
        ..
    } = *state;
    let two = lit::<T>(2.0);
    let ph = cis(two * gamma) / (beta * two.sqrt());
    let q = QuadratureCoefficients::hermitian(ph, -epsilon / beta);
    let p = QuadratureCoefficients::hermitian(
        ph * Complex::new(two * alpha, -beta * beta),
        delta - two * alpha * epsilon / beta,
    );
    Ok((q, p))
}

/// `(A(t)B(t′) − A(t′)B(t), A(t)A*(t′) − B(t)B*(t′), B*(t)A*(t′) − A*(t)B*(t′))`.
pub fn commutators_from<T: Real>(
    c1: &OperatorCoefficients<T>,
    c2: &OperatorCoefficients<T>,
) -> [Complex<T>; 3] {
    let (a1, b1, a2, b2) = (c1.a, c1.b, c2.a, c2.b);
    [
        a1 * b2 - a2 * b1,
        a1 * a2.conj() - b1 * b2.conj(),
        b1.conj() * a2.conj() - a1.conj() * b2.conj(),
    ]
}

/// Two-time commutator coefficients for `â(t)` at the states `s1` (time `t`)
/// and `s2` (time `t′`).
pub fn two_time_commutators<T: Real>(
    s1: &ErmakovState<T>,
    s2: &ErmakovState<T>,
    omega: T,
) -> Result<[Complex<T>; 3]> {
    Ok(commutators_from(&heisenberg_a(s1, omega)?, &heisenberg_a(s2, omega)?))
}

/// Closed-form `â(t)` for the degenerate parametric amplifier; a non-zero
/// `γ(0)` multiplies `A` by `e^{2iγ(0)}` and `B` by `e^{−2iγ(0)}`.
pub fn dpa_closed_form<T: Real>(
    omega: T,
    lambda: T,
    init: &ErmakovState<T>,
    t: T,
) -> Result<OperatorCoefficients<T>> {
    check(init, omega)?;
    let two = lit::<T>(2.0);
    let ErmakovState {
        alpha: a0,
        beta: b0,
        gamma: g0,
        delta: d0,
        epsilon: e0,
        ..
    } = *init;
    let pre = cis(-omega * t) * (-lambda * t).exp();
    // γ decouples from the rest of the system, so γ(0) enters as a phase
    let rot = cis(two * g0);
    let grow = omega * (two * lambda * t).exp();
    let den = two * b0 * omega.sqrt();
    let a = rot * pre * Complex::new(grow + b0 * b0, two * a0) / den;
    let b = rot.conj() * pre * Complex::new(grow - b0 * b0, two * a0) / den;
    let i = Complex::new(T::zero(), T::one());
    let shift = i * pre * Complex::new(b0 * d0 - two * a0 * e0, grow * e0) / (b0 * (two * omega).sqrt());
    Ok(OperatorCoefficients { a, b, shift })
}

/// Coefficients of the linear invariant
/// `b̂(t) = e^{−2iγ}/√2 · (βq̂ + ε + i(p̂ − 2αq̂ − δ)/β)`, rebased onto `â, â†`
/// of frequency `ω`.
pub fn invariant_b<T: Real>(state: &ErmakovState<T>, omega: T) -> Result<OperatorCoefficients<T>> {
    check(state, omega)?;
    let two = lit::<T>(2.0);
    let ErmakovState {
        alpha,
        beta,
        gamma,
        delta,
        epsilon,
        ..
    } = *state;
    let pre = cis(-two * gamma) / two.sqrt();
    let cq = pre * Complex::new(beta, -two * alpha / beta);
    let cp = pre * Complex::new(T::zero(), T::one() / beta);
    let c0 = pre * Complex::new(epsilon, -delta / beta);
    let sq = (two * omega).sqrt().recip();
    let sp = Complex::new(T::zero(), (omega / two).sqrt());
    Ok(OperatorCoefficients {
        a: cq * sq - cp * sp,
        b: cq * sq + cp * sp,
        shift: c0,
    })
}

/// Mean values and variances of `q̂, p̂` in the dynamical number state `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumberStateMoments<T> {
    pub q_mean: T,
    pub p_mean: T,
    pub q_var: T,
    pub p_var: T,
}

impl<T: Real> NumberStateMoments<T> {
    pub fn uncertainty_product(&self) -> T {
        self.q_var * self.p_var
    }
}

pub fn number_state_moments<T: Real>(
    state: &ErmakovState<T>,
    omega: T,
    n: usize,
) -> Result<NumberStateMoments<T>> {
    check(state, omega)?;
    let two = lit::<T>(2.0);
    let four = lit::<T>(4.0);
    let ErmakovState {
        alpha,
        beta,
        delta,
        epsilon,
        ..
    } = *state;
    let k = two * from_usize::<T>(n) + T::one();
    let b2 = beta * beta;
    Ok(NumberStateMoments {
        q_mean: -epsilon / beta,
        p_mean: delta - two * alpha * epsilon / beta,
        q_var: k / (two * b2),
        p_var: k * (four * alpha * alpha + b2 * b2) / (two * b2),
    })
}

/// Writes `t,n,q_mean,p_mean,q_var,p_var,uncertainty_product`.
pub fn write_moments_csv<T, W, I>(mut w: W, rows: I) -> Result<()>
where
    T: Real,
    W: Write,
    I: IntoIterator<Item = (T, usize, NumberStateMoments<T>)>,
{
    writeln!(w, "t,n,q_mean,p_mean,q_var,p_var,uncertainty_product")?;
    for (t, n, m) in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt_num(t),
            n,
            fmt_num(m.q_mean),
            fmt_num(m.p_mean),
            fmt_num(m.q_var),
            fmt_num(m.p_var),
            fmt_num(m.uncertainty_product())
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ermakov::standard_initial;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn st(alpha: f64, beta: f64, gamma: f64, delta: f64, epsilon: f64) -> ErmakovState<f64> {
        ErmakovState::new(alpha, beta, gamma, delta, epsilon, 0.0).unwrap()
    }

    fn close(z: Complex<f64>, re: f64, im: f64, tol: f64) -> bool {
        (z - Complex::new(re, im)).norm() < tol
    }

    #[test]
    fn standard_state_is_identity_map() {
        for w in [0.5, 1.0, 3.0] {
            let c = heisenberg_a(&standard_initial(w).unwrap(), w).unwrap();
            assert!(close(c.a, 1.0, 0.0, 1e-15));
            assert!(close(c.b, 0.0, 0.0, 1e-15));
            assert!(close(c.shift, 0.0, 0.0, 1e-15));
        }
    }

    #[test]
    fn phase_only_rotation() {
        let (a, b) = ab_coefficients(&st(0.0, 2.0, 0.4, 0.0, 0.0), 4.0).unwrap();
        assert!(close(a, (0.8f64).cos(), (0.8f64).sin(), 1e-15));
        assert!(close(b, 0.0, 0.0, 1e-15));
    }

    #[test]
    fn shift_examples() {
        let c = heisenberg_a(&st(0.7, 1.3, 0.2, 0.0, 0.0), 2.0).unwrap();
        assert_eq!(c.shift, Complex::new(0.0, 0.0));
        // ε = β, δ = 2α, ω = 1
        let c = heisenberg_a(&st(0.3, 1.7, 0.0, 0.6, 1.7), 1.0).unwrap();
        assert!(close(c.shift, -FRAC_1_SQRT_2, 0.0, 1e-15));
    }

    #[test]
    fn quadratures_at_standard_state() {
        let (q, p) = heisenberg_qp(&standard_initial(1.0).unwrap()).unwrap();
        assert!(close(q.a, FRAC_1_SQRT_2, 0.0, 1e-15));
        assert!(close(q.adag, FRAC_1_SQRT_2, 0.0, 1e-15));
        assert!(close(p.a, 0.0, -FRAC_1_SQRT_2, 1e-15));
        assert!(close(p.adag, 0.0, FRAC_1_SQRT_2, 1e-15));
        assert_eq!((q.constant, p.constant), (0.0, 0.0));
    }

    #[test]
    fn quadrature_pairs_are_exact_conjugates() {
        let (q, p) = heisenberg_qp(&st(-1.1, -0.4, 2.3, 0.9, -3.0)).unwrap();
        assert_eq!(q.adag, q.a.conj());
        assert_eq!(p.adag, p.a.conj());
    }

    #[test]
    fn equal_time_commutator_of_quadratures_is_i() {
        // [x a + x* a†, y a + y* a†] = x y* − x* y
        let (q, p) = heisenberg_qp(&st(0.8, 0.6, -1.0, 0.2, 0.1)).unwrap();
        let c = q.a * p.adag - q.adag * p.a;
        assert!(close(c, 0.0, 1.0, 1e-14));
    }

    #[test]
    fn equal_time_two_time_commutators() {
        let s = st(0.8, 0.6, -1.0, 0.2, 0.1);
        let c = two_time_commutators(&s, &s, 1.7).unwrap();
        assert!(close(c[0], 0.0, 0.0, 1e-14));
        assert!(close(c[1], 1.0, 0.0, 1e-14));
        assert!(close(c[2], 0.0, 0.0, 1e-14));
    }

    #[test]
    fn two_time_phase_only() {
        let w = 2.0f64;
        let (g1, g2) = (0.3, -0.5);
        let c = two_time_commutators(&st(0.0, w.sqrt(), g1, 0.0, 0.0), &st(0.0, w.sqrt(), g2, 0.0, 0.0), w)
            .unwrap();
        let e = Complex::new(0.0, 2.0 * (g1 - g2)).exp();
        assert!(close(c[0], 0.0, 0.0, 1e-15));
        assert!((c[1] - e).norm() < 1e-15);
        assert!(close(c[2], 0.0, 0.0, 1e-15));
    }

    #[test]
    fn dpa_closed_form_standard() {
        let (w, l) = (1.0, 0.1);
        let init = standard_initial(w).unwrap();
        let c0 = dpa_closed_form(w, l, &init, 0.0).unwrap();
        assert!(close(c0.a, 1.0, 0.0, 1e-15) && close(c0.b, 0.0, 0.0, 1e-15));
        assert!(close(c0.shift, 0.0, 0.0, 1e-15));
        let t = 2.5;
        let c = dpa_closed_form(w, l, &init, t).unwrap();
        let ph = Complex::new(0.0, -w * t).exp();
        assert!((c.a - ph * (l * t).cosh()).norm() < 1e-14);
        assert!((c.b - ph * (l * t).sinh()).norm() < 1e-14);
    }

    #[test]
    fn dpa_closed_form_is_canonical() {
        let init = st(0.4, 0.7, 0.0, -0.3, 0.5);
        for t in [0.0, 0.3, 1.0, 4.0] {
            let c = dpa_closed_form(1.3, 0.2, &init, t).unwrap();
            assert!(c.canonical_defect() < 1e-12);
        }
    }

    #[test]
    fn invariant_b_at_standard_state_is_a() {
        let b = invariant_b(&standard_initial(2.5).unwrap(), 2.5).unwrap();
        assert!(close(b.a, 1.0, 0.0, 1e-15));
        assert!(close(b.b, 0.0, 0.0, 1e-15));
        assert!(close(b.shift, 0.0, 0.0, 1e-15));
    }

    #[test]
    fn invariant_b_is_canonical() {
        let b = invariant_b(&st(0.8, -1.6, 0.3, 0.2, -0.4), 0.7).unwrap();
        assert!(b.canonical_defect() < 1e-14);
    }

    #[test]
    fn vacuum_moments_are_minimum_uncertainty() {
        let w = 3.0f64;
        let m = number_state_moments(&standard_initial(w).unwrap(), w, 0).unwrap();
        assert_eq!((m.q_mean, m.p_mean), (0.0, 0.0));
        assert!((m.q_var - 1.0 / 6.0).abs() < 1e-15);
        assert!((m.p_var - 1.5).abs() < 1e-15);
        assert!((m.uncertainty_product() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn moments_csv_header_and_row() {
        let m = number_state_moments(&standard_initial(1.0).unwrap(), 1.0, 2).unwrap();
        let mut buf = Vec::new();
        write_moments_csv(&mut buf, [(0.5, 2, m)]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next().unwrap(), "t,n,q_mean,p_mean,q_var,p_var,uncertainty_product");
        assert!(lines.next().unwrap().starts_with("5.00000000000000e-1,2,0.00000000000000e0,"));
    }

    #[test]
    fn singular_state_is_rejected() {
        let s = ErmakovState {
            beta: 0.0,
            ..ErmakovState::default()
        };
        assert!(matches!(ab_coefficients(&s, 1.0), Err(Error::Singularity { .. })));
        assert!(heisenberg_qp(&s).is_err());
        assert!(number_state_moments(&s, 1.0, 0).is_err());
    }
}
