//! Closed-form squeeze and displacement matrices against independent
//! evaluations: the Gamma-function form of the squeeze elements, matrix
//! exponentials, and the factorization identity.

use squeezevo::fock_oracle::factorization_defect;
use squeezevo::matrix_elements::{displacement_matrix, oracle_defect_block, squeeze_element, squeeze_matrix, Route};
use squeezevo::Complex64;

/// `Γ(k/2)` for `k ≥ 1`.
fn gamma_half(k: usize) -> f64 {
    let fact = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
    if k.is_multiple_of(2) {
        fact(k / 2 - 1)
    } else {
        let j = (k - 1) / 2;
        fact(2 * j) * std::f64::consts::PI.sqrt() / (4f64.powi(j as i32) * fact(j))
    }
}

/// Terminating `₂F₁(a, b; c; z)`.
fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 0..200 {
        let k = k as f64;
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
        if term == 0.0 {
            break;
        }
        sum += term;
    }
    sum
}

/// `S_mn` for `m ≥ n`, same parity, from the Gamma-function representation.
/// `printed` keeps the extra `+1` in the last Gamma argument.
fn squeeze_gamma_form(tau: f64, phi: f64, m: usize, n: usize, printed: bool) -> Complex64 {
    let fact = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
    let (s, c) = (tau.sinh(), tau.cosh());
    let h = (m - n) / 2;
    let pre = (fact(m) * fact(n) * std::f64::consts::PI / (2f64.powi((m + n) as i32) * c)).sqrt();
    let base = Complex64::from_polar(s, -2.0 * phi) * -1.0;
    let last = if printed { gamma_half(n + 3) } else { gamma_half(n + 1) };
    let den = fact(h) * gamma_half(n + 2) * last;
    let f = hyp2f1((1.0 - n as f64) / 2.0, -(n as f64) / 2.0, 1.0 + h as f64, -s * s);
    base.powi(h as i32) * (pre * c.powf(-((m + n) as f64) / 2.0) / den * f)
}

#[test]
fn gamma_form_with_corrected_argument_matches() {
    for tau in [0.1, 0.5, 1.0] {
        for phi in [0.0, 0.3, 2.0] {
            for n in 0..12 {
                for m in (n..20).step_by(2) {
                    let a = squeeze_element(tau, phi, m, n, Route::Direct);
                    let b = squeeze_gamma_form(tau, phi, m, n, false);
                    assert!((a - b).norm() < 1e-12, "({m}, {n}) τ = {tau}: {a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn gamma_form_as_printed_is_off_by_a_factor() {
    // the printed Γ((n+1)/2 + 1) replaces Γ((n+1)/2), a ratio of (n+1)/2
    let tau = 0.5f64;
    let s00 = squeeze_element(tau, 0.0, 0, 0, Route::Direct);
    let printed = squeeze_gamma_form(tau, 0.0, 0, 0, true);
    assert!((printed - s00 * 2.0).norm() < 1e-14);
    assert!((printed.re - 2.0 / tau.cosh().sqrt()).abs() < 1e-14);
    for n in [1usize, 4, 7] {
        let exact = squeeze_element(tau, 0.3, n + 2, n, Route::Direct);
        let ratio = exact / squeeze_gamma_form(tau, 0.3, n + 2, n, true);
        assert!((ratio - Complex64::new((n as f64 + 1.0) / 2.0, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn closed_forms_match_matrix_exponentials() {
    for (tau, phi) in [(0.1, 0.0), (0.5, 0.3), (0.8, 2.0)] {
        let s = squeeze_matrix(tau, phi, 32);
        assert!(oracle_defect_block(&s, 128, 33).unwrap() < 1e-8);
    }
    for xi in [Complex64::new(1.0, 0.5), Complex64::new(0.0, -2.0), Complex64::new(0.0, 0.0)] {
        let d = displacement_matrix(xi, 32);
        assert!(oracle_defect_block(&d, 128, 33).unwrap() < 1e-8);
    }
}

#[test]
fn closed_forms_are_unitary_on_a_block() {
    // columns of a truncated unitary lose norm only through the tail
    let s = squeeze_matrix(0.4, 1.1, 90);
    let d = displacement_matrix(Complex64::new(-0.7, 0.9), 90);
    for norms in [s.column_norms_sqr(), d.column_norms_sqr()] {
        for x in &norms[..20] {
            assert!((x - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn factorization_defect_shrinks_with_truncation() {
    assert!(factorization_defect(0.0, 0.3, 32).unwrap() == 0.0);
    let coarse = factorization_defect(1.0, 0.3, 48).unwrap();
    let fine = factorization_defect(1.0, 0.3, 96).unwrap();
    assert!(fine < coarse);
}
