//! Fock-basis matrix elements of the displacement operator
//! `D(ξ) = exp(ξ*â − ξâ†)` and the squeeze operator
//! `S(τ, φ) = exp((e^{2iφ}â² − e^{−2iφ}â†²)τ/2)` from terminating
//! hypergeometric sums.
//!
//! Each element has two evaluation routes. The direct route follows the
//! hypergeometric form with plain factorials. The log route carries
//! factorials and powers as logarithms with explicit signs, which stays
//! finite for large indices and near the removable singularities at `ξ = 0`
//! and `τ = 0`.

use ndarray::Array2;
use num_complex::Complex;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fock_oracle::{oracle_displacement, oracle_squeeze};
use crate::hypergeometric::{hyp2f0_terminating, hyp2f1_terminating, ln_factorials, pochhammer, HalfInt};
use crate::linalg::{max_abs_diff_block, CMatrix};
use crate::scalar::{cis, from_usize, lit, Real};

/// Largest index evaluated by the direct route.
pub const DIRECT_MAX: usize = 20;

/// Below this squeeze magnitude the identity is returned.
pub const TAU_IDENTITY: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Direct,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FockKind<T> {
    Displacement { xi: Complex<T> },
    Squeeze { tau: T, phi: T },
}

/// Matrix of an operator on `|0⟩ … |M⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockMatrix<T> {
    kind: FockKind<T>,
    entries: CMatrix<T>,
}

impl<T: Real> FockMatrix<T> {
    pub fn kind(&self) -> FockKind<T> {
        self.kind
    }

    pub fn entries(&self) -> &CMatrix<T> {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix<T> {
        self.entries
    }

    /// Largest Fock index `M`.
    pub fn max_index(&self) -> usize {
        self.entries.nrows() - 1
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, m: usize, n: usize) -> Complex<T> {
        self.entries[[m, n]]
    }

    /// `Σ_m |F_mn|²` for each column `n`.
    pub fn column_norms_sqr(&self) -> Vec<T> {
        self.entries
            .columns()
            .into_iter()
            .map(|c| c.iter().fold(T::zero(), |s, z| s + z.norm_sqr()))
            .collect()
    }

    /// `{kind, params, entries: [[[re, im], …], …]}`.
    pub fn to_json(&self) -> Value {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        let (kind, params) = match self.kind {
            FockKind::Displacement { xi } => ("displacement", json!({ "xi": [f(xi.re), f(xi.im)] })),
            FockKind::Squeeze { tau, phi } => ("squeeze", json!({ "tau": f(tau), "phi": f(phi) })),
        };
        let rows: Vec<Vec<[f64; 2]>> = self
            .entries
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|z| [f(z.re), f(z.im)]).collect())
            .collect();
        json!({ "kind": kind, "params": params, "entries": rows })
    }
}

fn factorial<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |p, k| p * from_usize::<T>(k))
}

fn neg1<T: Real>(k: usize) -> T {
    if k.is_multiple_of(2) {
        T::one()
    } else {
        -T::one()
    }
}

/// `Σ_{k=0}^{kmax} (−1)^k e^{ℓ_k}` where `ℓ_0 = l0` and
/// `ℓ_{k+1} − ℓ_k = ln_ratio(k)`.
///
/// Terms are scaled by the largest one before exponentiation; offsets are
/// accumulated from the small ratio logarithms, so no large logarithm is
/// differenced.
fn alternating_sum<T: Real>(l0: T, kmax: usize, ln_ratio: impl Fn(usize) -> T) -> T {
    let mut d = Vec::with_capacity(kmax + 1);
    let mut acc = T::zero();
    d.push(acc);
    for k in 0..kmax {
        acc += ln_ratio(k);
        d.push(acc);
    }
    let top = d.iter().copied().fold(T::neg_infinity(), T::max);
    let sum = d
        .iter()
        .enumerate()
        .fold(T::zero(), |s, (k, &dk)| s + neg1::<T>(k) * (dk - top).exp());
    sum * (l0 + top).exp()
}

fn displacement_direct<T: Real>(xi: Complex<T>, m: usize, n: usize) -> Complex<T> {
    let r2 = xi.norm_sqr();
    let pre = (-xi).powi(m as i32) * xi.conj().powi(n as i32) * (-r2 * lit(0.5)).exp()
        / (factorial::<T>(m) * factorial::<T>(n)).sqrt();
    pre * hyp2f0_terminating(n, m, -r2.recip())
}

fn displacement_log<T: Real>(xi: Complex<T>, m: usize, n: usize, lf: &[T]) -> Complex<T> {
    let r = xi.norm();
    if r == T::zero() {
        return if m == n { Complex::new(T::one(), T::zero()) } else { Complex::new(T::zero(), T::zero()) };
    }
    // the hypergeometric sum equals (−1)^lo r^α √(lo!/hi!) L_lo^{(α)}(r²),
    // α = |m − n|; the Laguerre recurrence avoids the cancellation of the
    // alternating series
    let (lo, hi) = (m.min(n), m.max(n));
    let alpha = from_usize::<T>(hi - lo);
    let x = r * r;
    let mut l_prev = T::one();
    let mut l_cur = T::one() + alpha - x;
    if lo == 0 {
        l_cur = T::one();
    }
    for k in 1..lo {
        let kt = from_usize::<T>(k);
        let next = ((lit::<T>(2.0) * kt + T::one() + alpha - x) * l_cur - (kt + alpha) * l_prev) / (kt + T::one());
        l_prev = l_cur;
        l_cur = next;
    }
    let ln_pre = alpha * r.ln() + (lf[lo] - lf[hi]) * lit(0.5) - x * lit(0.5);
    let v = neg1::<T>(m + lo) * ln_pre.exp() * l_cur;
    cis(from_usize::<T>(m) * xi.arg() - from_usize::<T>(n) * xi.arg()) * v
}

fn displacement_route<T: Real>(xi: Complex<T>, m: usize, n: usize) -> Route {
    let r = xi.norm();
    if m <= DIRECT_MAX && n <= DIRECT_MAX && r >= lit(0.5) && r <= lit(4.0) {
        Route::Direct
    } else {
        Route::Log
    }
}

/// `⟨m|D(ξ)|n⟩` by the requested route.
pub fn displacement_element<T: Real>(xi: Complex<T>, m: usize, n: usize, route: Route) -> Complex<T> {
    if xi.norm() == T::zero() {
        return displacement_log(xi, m, n, &[]);
    }
    match route {
        Route::Direct => displacement_direct(xi, m, n),
        Route::Log => displacement_log(xi, m, n, &ln_factorials(m.max(n))),
    }
}

/// `⟨m|D(ξ)|n⟩` for `0 ≤ m, n ≤ max_index`.
pub fn displacement_matrix<T: Real>(xi: Complex<T>, max_index: usize) -> FockMatrix<T> {
    let lf = ln_factorials::<T>(max_index);
    let entries = Array2::from_shape_fn((max_index + 1, max_index + 1), |(m, n)| {
        if xi.norm() == T::zero() {
            return displacement_log(xi, m, n, &lf);
        }
        match displacement_route(xi, m, n) {
            Route::Direct => displacement_direct(xi, m, n),
            Route::Log => displacement_log(xi, m, n, &lf),
        }
    });
    FockMatrix {
        kind: FockKind::Displacement { xi },
        entries,
    }
}

fn squeeze_direct<T: Real>(tau: T, phi: T, m: usize, n: usize) -> Complex<T> {
    let (i, j, odd) = (m / 2, n / 2, m % 2 == 1);
    let (s, c) = (tau.sinh(), tau.cosh());
    let lower = if odd { HalfInt::from_halves(3) } else { HalfInt::from_halves(1) };
    let norm = (pochhammer::<T>(lower, i) * pochhammer::<T>(lower, j) / (factorial::<T>(i) * factorial::<T>(j))).sqrt();
    let f = hyp2f1_terminating(
        HalfInt::from_int(-(j as i64)),
        HalfInt::from_int(-(i as i64)),
        lower,
        -(s * s).recip(),
    )
    .expect("terminating by construction");
    let mut v = neg1::<T>(i) / c.sqrt() * norm * num_traits::pow(s / c, (m + n) / 2) * f;
    if odd {
        v /= s;
    }
    cis(-from_usize::<T>(m) * phi + from_usize::<T>(n) * phi) * v
}

fn ln_half_pochhammer<T: Real>(odd: bool, k: usize, lf: &[T]) -> T {
    // (1/2)_k = (2k)!/(4^k k!), (3/2)_k = (2k+1)!/(4^k k!)
    let top = if odd { lf[2 * k + 1] } else { lf[2 * k] };
    top - from_usize::<T>(k) * lit::<T>(4.0).ln() - lf[k]
}

fn squeeze_log<T: Real>(tau: T, phi: T, m: usize, n: usize, lf: &[T]) -> Complex<T> {
    let (i, j, odd) = (m / 2, n / 2, m % 2 == 1);
    let (ln_s, ln_c) = (tau.sinh().ln(), tau.cosh().ln());
    let half = lit::<T>(0.5);
    let pre = (ln_half_pochhammer(odd, i, lf) + ln_half_pochhammer(odd, j, lf) - lf[i] - lf[j]) * half - ln_c * half;
    let cpow = from_usize::<T>(i + j + usize::from(odd)) * ln_c;
    let l0 = pre + from_usize::<T>(i + j) * ln_s - cpow;
    let h = if odd { lit::<T>(1.5) } else { half };
    let sum = alternating_sum(l0, i.min(j), |k| {
        from_usize::<T>((i - k) * (j - k)).ln() - (from_usize::<T>(k + 1) * (h + from_usize::<T>(k))).ln() - ln_s - ln_s
    });
    cis(-from_usize::<T>(m) * phi + from_usize::<T>(n) * phi) * (neg1::<T>(i) * sum)
}

fn squeeze_route<T: Real>(tau: T, m: usize, n: usize) -> Route {
    if m <= DIRECT_MAX && n <= DIRECT_MAX && tau >= lit(0.1) {
        Route::Direct
    } else {
        Route::Log
    }
}

fn squeeze_entry<T: Real>(tau: T, phi: T, m: usize, n: usize, route: Route, lf: &[T]) -> Complex<T> {
    let zero = Complex::new(T::zero(), T::zero());
    if (m + n) % 2 == 1 {
        return zero;
    }
    if tau.abs() < lit(TAU_IDENTITY) {
        return if m == n { Complex::new(T::one(), T::zero()) } else { zero };
    }
    match route {
        Route::Direct => squeeze_direct(tau, phi, m, n),
        Route::Log => squeeze_log(tau, phi, m, n, lf),
    }
}

/// `⟨m|S(τ, φ)|n⟩` by the requested route; `τ ≥ 0`.
pub fn squeeze_element<T: Real>(tau: T, phi: T, m: usize, n: usize, route: Route) -> Complex<T> {
    squeeze_entry(tau, phi, m, n, route, &ln_factorials(2 * m.max(n) + 1))
}

/// `⟨m|S(τ, φ)|n⟩` for `0 ≤ m, n ≤ max_index`; `τ ≥ 0`.
pub fn squeeze_matrix<T: Real>(tau: T, phi: T, max_index: usize) -> FockMatrix<T> {
    let lf = ln_factorials::<T>(2 * max_index + 1);
    let entries = Array2::from_shape_fn((max_index + 1, max_index + 1), |(m, n)| {
        squeeze_entry(tau, phi, m, n, squeeze_route(tau, m, n), &lf)
    });
    FockMatrix {
        kind: FockKind::Squeeze { tau, phi },
        entries,
    }
}

fn oracle_of<T: Real>(f: &FockMatrix<T>, dim: usize) -> Result<CMatrix<T>> {
    match f.kind {
        FockKind::Displacement { xi } => oracle_displacement(xi, dim),
        FockKind::Squeeze { tau, phi } => oracle_squeeze(tau, phi, dim),
    }
}

/// `max |F_mn − oracle_mn|` over `m, n < block`, with the oracle built as a
/// matrix exponential in dimension `oracle_dim`.
pub fn oracle_defect_block<T: Real>(f: &FockMatrix<T>, oracle_dim: usize, block: usize) -> Result<T> {
    if block > f.dim() || block > oracle_dim {
        return Err(Error::Domain(format!(
            "comparison block {block} exceeds matrix dimension"
        )));
    }
    Ok(max_abs_diff_block(f.entries(), &oracle_of(f, oracle_dim)?, block))
}

/// Oracle comparison on the low block `m, n ≤ dim(F)/2`; requires
/// `oracle_dim ≥ 2·dim(F)`.
pub fn oracle_defect<T: Real>(f: &FockMatrix<T>, oracle_dim: usize) -> Result<T> {
    if oracle_dim < 2 * f.dim() {
        return Err(Error::Domain(format!(
            "oracle dimension {oracle_dim} below twice the matrix dimension {}",
            f.dim()
        )));
    }
    oracle_defect_block(f, oracle_dim, f.dim() / 2 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn zero_parameters_give_identity() {
        let d = displacement_matrix(c(0.0, 0.0), 6);
        let s = squeeze_matrix(0.0, 0.4, 6);
        for m in 0..7 {
            for n in 0..7 {
                let e = if m == n { c(1.0, 0.0) } else { c(0.0, 0.0) };
                assert_eq!(d.get(m, n), e);
                assert_eq!(s.get(m, n), e);
            }
        }
    }

    #[test]
    fn displacement_low_elements() {
        let xi = c(0.7, -0.4);
        let d = displacement_matrix(xi, 4);
        let g = (-xi.norm_sqr() / 2.0).exp();
        assert!((d.get(0, 0) - c(g, 0.0)).norm() < 1e-15);
        assert!((d.get(1, 0) + xi * g).norm() < 1e-15);
        assert!((d.get(0, 1) - xi.conj() * g).norm() < 1e-15);
        // ⟨1|D|1⟩ = (1 − |ξ|²) e^{−|ξ|²/2}
        assert!((d.get(1, 1) - c((1.0 - xi.norm_sqr()) * g, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn squeeze_low_elements() {
        let (tau, phi) = (0.6f64, 0.3f64);
        let s = squeeze_matrix(tau, phi, 4);
        let (ch, th) = (tau.cosh(), tau.tanh());
        assert!((s.get(0, 0) - c(ch.powf(-0.5), 0.0)).norm() < 1e-15);
        let s20 = -Complex::new(0.0, -2.0 * phi).exp() * th / (2.0 * ch).sqrt();
        assert!((s.get(2, 0) - s20).norm() < 1e-15);
        assert!((s.get(1, 1) - c(ch.powf(-1.5), 0.0)).norm() < 1e-15);
        assert_eq!(s.get(1, 0), c(0.0, 0.0));
        assert_eq!(s.get(3, 2), c(0.0, 0.0));
    }

    #[test]
    fn routes_agree_up_to_twenty() {
        let lf = ln_factorials::<f64>(64);
        for xi in [c(1.0, 0.5), c(0.0, -2.0), c(-0.6, 0.3)] {
            for m in 0..=DIRECT_MAX {
                for n in 0..=DIRECT_MAX {
                    let a = displacement_direct(xi, m, n);
                    let b = displacement_log(xi, m, n, &lf);
                    assert!((a - b).norm() < 1e-12, "D {xi} {m} {n}: {a} vs {b}");
                }
            }
        }
        for (tau, phi) in [(0.1, 0.0), (0.5, 0.3), (1.0, 2.0), (1.5, -1.0)] {
            for m in 0..=DIRECT_MAX {
                for n in (m % 2..=DIRECT_MAX).step_by(2) {
                    let a = squeeze_direct(tau, phi, m, n);
                    let b = squeeze_log(tau, phi, m, n, &lf);
                    assert!((a - b).norm() < 1e-12, "S {tau} {m} {n}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn log_route_has_finite_small_tau_limit() {
        let s = squeeze_element(1e-6f64, 0.0, 2, 2, Route::Log);
        assert!((s - c(1.0, 0.0)).norm() < 1e-10);
        let s = squeeze_element(1e-6f64, 0.0, 3, 3, Route::Log);
        assert!((s - c(1.0, 0.0)).norm() < 1e-10);
        let d = displacement_element(c(1e-7, 0.0), 5, 5, Route::Log);
        assert!((d - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn log_route_matches_high_precision_values() {
        // reference values from 50-digit arithmetic on the expanded sums
        let d = displacement_element(c(0.0, -2.0), 40, 37, Route::Log);
        assert!((d - c(0.0, -0.1234736899652034)).norm() < 1e-14);
        let d = displacement_element(c(1.0, 0.5), 33, 12, Route::Log);
        assert!((d - c(6.8539785550810374e-6, 2.2092939408953434e-6)).norm() < 1e-15);
        let s = squeeze_element(1.0, 0.0, 32, 30, Route::Log);
        assert!((s - c(-0.1283782848628697, 0.0)).norm() < 1e-12);
        let s = squeeze_element(0.5, 0.0, 41, 3, Route::Log);
        assert!((s - c(-1.0168347776281018e-5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn parity_zeros_are_exact() {
        let s = squeeze_matrix(1.2f64, 0.7, 30);
        for m in 0..31 {
            for n in 0..31 {
                if (m + n) % 2 == 1 {
                    assert_eq!(s.get(m, n), c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn squeezed_vacuum_column() {
        let tau = 0.8f64;
        let s = squeeze_matrix(tau, 1.1, 40);
        let mut lf = 0.0f64;
        for k in 0..=20usize {
            if k > 0 {
                lf += ((2 * k - 1) as f64 / (2 * k) as f64).ln();
            }
            // (2k)!/(4^k (k!)²)
            let p = lf.exp() * tau.tanh().powi(2 * k as i32) / tau.cosh();
            assert!((s.get(2 * k, 0).norm_sqr() - p).abs() < 1e-14);
        }
    }

    #[test]
    fn json_layout() {
        let v = squeeze_matrix(0.2f64, 0.0, 1).to_json();
        assert_eq!(v["kind"], "squeeze");
        assert_eq!(v["entries"].as_array().unwrap().len(), 2);
        assert_eq!(v["entries"][0][1], json!([0.0, 0.0]));
    }

    #[test]
    fn oracle_defect_requires_room() {
        let d = displacement_matrix(c(0.0, 0.0), 9);
        assert!(oracle_defect(&d, 16).is_err());
        assert_eq!(oracle_defect(&d, 20).unwrap(), 0.0);
    }
}
