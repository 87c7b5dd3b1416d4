//! Photon amplitudes `⟨m|ψₙ(t)⟩ = e^{imθ} (S·D)_{mn} e^{2inγ}` of the
//! dynamical number states, their photon-number distributions, and the
//! evolution of superpositions.

use std::io::Write;

use ndarray::Array2;
use num_complex::Complex;
use serde_json::{json, Value};

use crate::error::{to_f64, Error, Result};
use crate::export::fmt_num;
use crate::hypergeometric::ln_factorials;
use crate::linalg::CMatrix;
use crate::matrix_elements::{displacement_element, squeeze_matrix, FockMatrix, Route};
use crate::scalar::{cis, from_usize, lit, Real};
use crate::squeeze_params::SqueezeParameters;

/// Deficit above which a vector is flagged as under-truncated.
pub const DEFICIT_FLAG: f64 = 1e-6;

/// Amplitudes over `|0⟩ … |M⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeVector<T> {
    /// Initial photon number; `None` for a superposition.
    pub n: Option<usize>,
    pub t: Option<T>,
    pub entries: Vec<Complex<T>>,
    /// `1 − Σ|entries|²`, clamped to `[0, 1]`.
    pub deficit: T,
    /// Set when `deficit > 1e−6`.
    pub flagged: bool,
}

impl<T: Real> AmplitudeVector<T> {
    fn from_entries(n: Option<usize>, entries: Vec<Complex<T>>) -> Self {
        let total = entries.iter().fold(T::zero(), |s, z| s + z.norm_sqr());
        let deficit = (T::one() - total).max(T::zero()).min(T::one());
        Self {
            n,
            t: None,
            entries,
            deficit,
            flagged: deficit > lit(DEFICIT_FLAG),
        }
    }

    pub fn with_time(mut self, t: T) -> Self {
        self.t = Some(t);
        self
    }

    pub fn max_index(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.entries.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `{t, n, deficit, probs, amps: [[re, im], …]}`.
    pub fn to_json(&self) -> Value {
        let f = |x: T| to_f64(x);
        json!({
            "t": self.t.map(f),
            "n": self.n,
            "deficit": f(self.deficit),
            "probs": self.entries.iter().map(|z| f(z.norm_sqr())).collect::<Vec<_>>(),
            "amps": self.entries.iter().map(|z| [f(z.re), f(z.im)]).collect::<Vec<_>>(),
        })
    }
}

/// Photon-number distribution with its normalization bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonDistribution<T> {
    pub probs: Vec<T>,
    pub total: T,
    pub deficit: T,
}

impl<T: Real> PhotonDistribution<T> {
    pub fn mean(&self) -> T {
        self.probs
            .iter()
            .enumerate()
            .fold(T::zero(), |s, (m, &p)| s + from_usize::<T>(m) * p)
    }
}

pub fn photon_distribution<T: Real>(v: &AmplitudeVector<T>) -> PhotonDistribution<T> {
    let probs = v.probabilities();
    let total = probs.iter().fold(T::zero(), |s, &p| s + p);
    PhotonDistribution {
        probs,
        total,
        deficit: v.deficit,
    }
}

/// Smallest `M` satisfying `M ≥ 4(n + sinh²τ + |ξ|²)`.
pub fn recommended_truncation<T: Real>(p: &SqueezeParameters<T>, n: usize) -> usize {
    let s = p.tau.sinh();
    let need = lit::<T>(4.0) * (from_usize::<T>(n) + s * s + p.xi.norm_sqr());
    need.ceil().to_usize().unwrap_or(usize::MAX)
}

/// `Some(recommended)` when `max_index` violates the truncation rule.
pub fn truncation_warning<T: Real>(p: &SqueezeParameters<T>, n: usize, max_index: usize) -> Option<usize> {
    let r = recommended_truncation(p, n);
    (max_index < r).then_some(r)
}

fn displacement_column<T: Real>(xi: Complex<T>, n: usize, max_index: usize) -> Vec<Complex<T>> {
    (0..=max_index)
        .map(|k| displacement_element(xi, k, n, Route::Log))
        .collect()
}

fn rotate_column<T: Real>(
    s: &FockMatrix<T>,
    d: &[Complex<T>],
    theta: T,
    phase_in: Complex<T>,
) -> Vec<Complex<T>> {
    let dim = d.len();
    (0..dim)
        .map(|m| {
            // S_mk vanishes unless k ≡ m (mod 2)
            let mut acc = Complex::new(T::zero(), T::zero());
            let mut k = m % 2;
            while k < dim {
                acc += s.get(m, k) * d[k];
                k += 2;
            }
            cis(theta * from_usize::<T>(m)) * acc * phase_in
        })
        .collect()
}

/// `⟨m|ψₙ⟩` for `0 ≤ m ≤ max_index`, with the `S·D` sum truncated at
/// `max_index`.
pub fn state_amplitudes<T: Real>(
    p: &SqueezeParameters<T>,
    gamma: T,
    n: usize,
    max_index: usize,
) -> Result<AmplitudeVector<T>> {
    if n > max_index {
        return Err(Error::Domain(format!(
            "input photon number {n} exceeds truncation {max_index}"
        )));
    }
    let s = squeeze_matrix(p.tau, p.phi, max_index);
    let d = displacement_column(p.xi, n, max_index);
    let ph = cis(lit::<T>(2.0) * gamma * from_usize::<T>(n));
    Ok(AmplitudeVector::from_entries(Some(n), rotate_column(&s, &d, p.theta, ph)))
}

/// The truncated evolution matrix `e^{iθN} S D e^{2iγN}` on `|0⟩ … |M⟩`,
/// whose columns are the [`state_amplitudes`].
pub fn evolution_matrix<T: Real>(p: &SqueezeParameters<T>, gamma: T, max_index: usize) -> CMatrix<T> {
    let dim = max_index + 1;
    let s = squeeze_matrix(p.tau, p.phi, max_index);
    let two = lit::<T>(2.0);
    let mut u = Array2::zeros((dim, dim));
    for n in 0..dim {
        let d = displacement_column(p.xi, n, max_index);
        let col = rotate_column(&s, &d, p.theta, cis(two * gamma * from_usize::<T>(n)));
        for (m, z) in col.into_iter().enumerate() {
            u[[m, n]] = z;
        }
    }
    u
}

/// `Σₙ cₙ |ψₙ⟩`.
///
/// The coefficients must be normalized within `1e−10` unless `renormalize`
/// is set, in which case they are scaled to unit norm first.
pub fn evolve_superposition<T: Real>(
    c: &[Complex<T>],
    p: &SqueezeParameters<T>,
    gamma: T,
    max_index: usize,
    renormalize: bool,
) -> Result<AmplitudeVector<T>> {
    if c.is_empty() || c.len() > max_index + 1 {
        return Err(Error::Domain(format!(
            "superposition needs between 1 and {} coefficients, got {}",
            max_index + 1,
            c.len()
        )));
    }
    let norm2 = c.iter().fold(T::zero(), |s, z| s + z.norm_sqr());
    let scale = if (norm2 - T::one()).abs() <= lit(1e-10) {
        T::one()
    } else if renormalize && norm2 > T::zero() {
        norm2.sqrt().recip()
    } else {
        return Err(Error::Domain(format!(
            "superposition coefficients have squared norm {}, expected 1",
            to_f64(norm2)
        )));
    };
    let dim = max_index + 1;
    let s = squeeze_matrix(p.tau, p.phi, max_index);
    let two = lit::<T>(2.0);
    // columns of the evolution matrix for the occupied inputs only
    let mut u = Array2::zeros((dim, c.len()));
    for n in 0..c.len() {
        let d = displacement_column(p.xi, n, max_index);
        let col = rotate_column(&s, &d, p.theta, cis(two * gamma * from_usize::<T>(n)));
        for (m, z) in col.into_iter().enumerate() {
            u[[m, n]] = z;
        }
    }
    let cv = ndarray::Array1::from_iter(c.iter().map(|z| *z * scale));
    Ok(AmplitudeVector::from_entries(None, u.dot(&cv).to_vec()))
}

/// `|⟨2k|S(τ)|0⟩|² = (2k)!/(4^k (k!)²) · tanh^{2k}τ / cosh τ`.
pub fn squeezed_vacuum_probability<T: Real>(tau: T, k: usize) -> T {
    let lf = ln_factorials::<T>(2 * k);
    let lb = lf[2 * k] - lf[k] - lf[k] - from_usize::<T>(k) * lit::<T>(4.0).ln();
    let th = tau.tanh();
    if k == 0 {
        return tau.cosh().recip();
    }
    (lb + from_usize::<T>(2 * k) * th.ln()).exp() / tau.cosh()
}

fn n_field(n: Option<usize>) -> String {
    n.map(|n| n.to_string()).unwrap_or_default()
}

/// Writes `t,n,m,prob,re,im`; superpositions leave `n` empty.
pub fn write_amplitudes_csv<'a, T: Real, W: Write>(
    mut w: W,
    vectors: impl IntoIterator<Item = &'a AmplitudeVector<T>>,
) -> Result<()> {
    writeln!(w, "t,n,m,prob,re,im")?;
    for v in vectors {
        let t = v.t.map(fmt_num).unwrap_or_default();
        let n = n_field(v.n);
        for (m, z) in v.entries.iter().enumerate() {
            writeln!(
                w,
                "{t},{n},{m},{},{},{}",
                fmt_num(z.norm_sqr()),
                fmt_num(z.re),
                fmt_num(z.im)
            )?;
        }
    }
    Ok(())
}

/// Writes `t,n,m,prob`.
pub fn write_statistics_csv<'a, T: Real, W: Write>(
    mut w: W,
    vectors: impl IntoIterator<Item = &'a AmplitudeVector<T>>,
) -> Result<()> {
    writeln!(w, "t,n,m,prob")?;
    for v in vectors {
        let t = v.t.map(fmt_num).unwrap_or_default();
        let n = n_field(v.n);
        for (m, z) in v.entries.iter().enumerate() {
            writeln!(w, "{t},{n},{m},{}", fmt_num(z.norm_sqr()))?;
        }
    }
    Ok(())
}

/// JSON array of per-vector records.
pub fn amplitudes_json<'a, T: Real>(vectors: impl IntoIterator<Item = &'a AmplitudeVector<T>>) -> Value {
    Value::Array(vectors.into_iter().map(|v| v.to_json()).collect())
}
