//! Brute-force reference computations in a truncated Fock space.
//!
//! Operators are dense `(M+1) × (M+1)` matrices built from the ladder rule
//! `â|n⟩ = √n |n−1⟩`. Truncation corrupts the last rows and columns, so
//! comparisons are made on a low-index block.

use ndarray::{s, Array2};
use num_complex::Complex;

use crate::error::{to_f64, Error, Result};
use crate::hamiltonian::{CoefficientSet, HamiltonianSpec};
use crate::heisenberg::{OperatorCoefficients, QuadratureCoefficients};
use crate::hypergeometric::ln_factorials;
use crate::linalg::{adjoint, banded_matmul, diag, expm, identity, lincomb, max_abs_diff_block, CMatrix};
use crate::ode::{dopri_advance, AdaptiveConfig, StepStats};
use crate::scalar::{cis, from_usize, lit, Real};
use crate::squeeze_params::SqueezeParameters;

/// Smallest dimension accepted by the oracle constructions.
pub const MIN_DIM: usize = 8;

/// Hermiticity tolerance for Hamiltonians handed to the oracle.
pub const HERMITICITY_TOL: f64 = 1e-12;

fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < MIN_DIM {
        return Err(Error::Domain(format!(
            "truncated basis needs dimension ≥ {MIN_DIM}, got {dim}"
        )));
    }
    Ok(())
}

/// `â`, `â†`, `q̂`, `p̂`, `N̂` and the quadratic forms of the Hamiltonian on
/// `|0⟩ … |dim−1⟩` for a mode of frequency `ω`.
#[derive(Clone, Debug)]
pub struct TruncatedBasis<T> {
    omega: T,
    a: CMatrix<T>,
    adag: CMatrix<T>,
    q: CMatrix<T>,
    p: CMatrix<T>,
    number: CMatrix<T>,
    q2: CMatrix<T>,
    p2: CMatrix<T>,
    qp_sym: CMatrix<T>,
}

impl<T: Real> TruncatedBasis<T> {
    pub fn new(omega: T, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain("truncated basis needs at least two states".into()));
        }
        if !(omega > T::zero()) || !omega.is_finite() {
            return Err(Error::Domain(format!(
                "mode frequency must be positive, got {}",
                to_f64(omega)
            )));
        }
        let a = annihilator::<T>(dim);
        let adag = adjoint(&a);
        let two = lit::<T>(2.0);
        let sq = (two * omega).sqrt().recip();
        let sp = (omega / two).sqrt();
        let q = (&a + &adag).mapv(|z| z * sq);
        let p = (&a - &adag).mapv(|z| Complex::new(z.im * sp, -z.re * sp));
        let number = diag(&(0..dim).map(|n| Complex::new(from_usize(n), T::zero())).collect::<Vec<_>>());
        let q2 = q.dot(&q);
        let p2 = p.dot(&p);
        let qp_sym = q.dot(&p) + p.dot(&q);
        Ok(Self {
            omega,
            a,
            adag,
            q,
            p,
            number,
            q2,
            p2,
            qp_sym,
        })
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &CMatrix<T> {
        &self.a
    }

    pub fn adag(&self) -> &CMatrix<T> {
        &self.adag
    }

    pub fn q(&self) -> &CMatrix<T> {
        &self.q
    }

    pub fn p(&self) -> &CMatrix<T> {
        &self.p
    }

    pub fn number(&self) -> &CMatrix<T> {
        &self.number
    }

    /// `c_a·â + c_b·â† + shift·I`.
    pub fn operator(&self, c: &OperatorCoefficients<T>) -> CMatrix<T> {
        let mut m = self.a.mapv(|z| z * c.a) + self.adag.mapv(|z| z * c.b);
        m.diag_mut().mapv_inplace(|z| z + c.shift);
        m
    }

    pub fn quadrature(&self, c: &QuadratureCoefficients<T>) -> CMatrix<T> {
        self.operator(&c.as_operator())
    }
}

fn annihilator<T: Real>(dim: usize) -> CMatrix<T> {
    let mut a = Array2::zeros((dim, dim));
    for n in 1..dim {
        a[[n - 1, n]] = Complex::new(from_usize::<T>(n).sqrt(), T::zero());
    }
    a
}

/// `H = a p̂² + b q̂² + (c/2)(q̂p̂ + p̂q̂) − f q̂ − g p̂`.
///
/// For `d = c/2` this equals `a p̂² + b q̂² + c q̂p̂ − i d − f q̂ − g p̂` and is
/// exactly Hermitian even after truncation.
pub fn build_hamiltonian<T: Real>(cs: &CoefficientSet<T>, basis: &TruncatedBasis<T>) -> Result<CMatrix<T>> {
    let defect = cs.hermiticity_defect();
    if !(defect <= lit(HERMITICITY_TOL)) {
        return Err(Error::NonHermitian {
            defect: to_f64(defect),
        });
    }
    if !cs.is_finite() {
        return Err(Error::Numeric("hamiltonian coefficients not finite".into()));
    }
    Ok(lincomb(&[
        (cs.a, &basis.p2),
        (cs.b, &basis.q2),
        (cs.c * lit(0.5), &basis.qp_sym),
        (-cs.f, &basis.q),
        (-cs.g, &basis.p),
    ]))
}

/// `ω/2 (ââ† + â†â) + (λ/2i)(e^{2iωt}â² − e^{−2iωt}â†²)` with `ω` taken from the
/// basis.
pub fn dpa_hamiltonian_direct<T: Real>(lambda: T, t: T, basis: &TruncatedBasis<T>) -> CMatrix<T> {
    let w = basis.omega;
    let half = lit::<T>(0.5);
    let (a, ad) = (&basis.a, &basis.adag);
    let kin = (a.dot(ad) + ad.dot(a)).mapv(|z| z * (w * half));
    let two = lit::<T>(2.0);
    let ph = cis(two * w * t);
    let pump = (a.dot(a).mapv(|z| z * ph) - ad.dot(ad).mapv(|z| z * ph.conj()))
        .mapv(|z| z * Complex::new(T::zero(), -lambda * half));
    kin + pump
}

/// `exp(ξ*â − ξâ†)` by scaling and squaring.
pub fn oracle_displacement<T: Real>(xi: Complex<T>, dim: usize) -> Result<CMatrix<T>> {
    check_dim(dim)?;
    let a = annihilator::<T>(dim);
    let gen = a.mapv(|z| z * xi.conj()) - adjoint(&a).mapv(|z| z * xi);
    expm(&gen)
}

/// `exp((e^{2iφ}â² − e^{−2iφ}â†²)τ/2)` by scaling and squaring.
pub fn oracle_squeeze<T: Real>(tau: T, phi: T, dim: usize) -> Result<CMatrix<T>> {
    check_dim(dim)?;
    let a = annihilator::<T>(dim);
    let a2 = a.dot(&a);
    let two = lit::<T>(2.0);
    let w = cis(two * phi) * (tau / two);
    let gen = a2.mapv(|z| z * w) - adjoint(&a2).mapv(|z| z * w.conj());
    expm(&gen)
}

/// `e^{iθN̂} S(τ, φ) D(ξ) e^{2iγN̂}` in dimension `dim`.
pub fn build_u_of_t<T: Real>(p: &SqueezeParameters<T>, gamma: T, dim: usize) -> Result<CMatrix<T>> {
    let two = lit::<T>(2.0);
    let rot = |x: T| diag(&(0..dim).map(|n| cis(x * from_usize::<T>(n))).collect::<Vec<_>>());
    let s = oracle_squeeze(p.tau, p.phi, dim)?;
    let d = oracle_displacement(p.xi, dim)?;
    Ok(rot(p.theta).dot(&s).dot(&d).dot(&rot(two * gamma)))
}

/// `exp(x·â†²)` restricted to `dim`; nilpotent, so the series is exact.
fn raising_pair_exp<T: Real>(x: Complex<T>, dim: usize, lf: &[T]) -> CMatrix<T> {
    let mut m = identity::<T>(dim);
    if x.norm() == T::zero() {
        return m;
    }
    let (ln_x, arg_x) = (x.norm().ln(), x.arg());
    for n in 0..dim {
        for k in 1..=(dim - 1 - n) / 2 {
            let row = n + 2 * k;
            let k_t = from_usize::<T>(k);
            // x^k/k! · √(row!/n!)
            let mag = (k_t * ln_x - lf[k] + (lf[row] - lf[n]) * lit(0.5)).exp();
            m[[row, n]] = cis(k_t * arg_x) * mag;
        }
    }
    m
}

/// The three-factor product
/// `e^{−½e^{−2iφ}tanhτ·â†²} e^{−ln coshτ·(N̂+½)} e^{½e^{2iφ}tanhτ·â²}`.
pub fn factorization_product<T: Real>(tau: T, phi: T, dim: usize) -> Result<CMatrix<T>> {
    check_dim(dim)?;
    let lf = ln_factorials::<T>(dim);
    let two = lit::<T>(2.0);
    let half = lit::<T>(0.5);
    let th = tau.tanh();
    let left = raising_pair_exp(-cis(-two * phi) * (th * half), dim, &lf);
    // exp(y·â²) is the transpose of exp(y·â†²)
    let right = raising_pair_exp(cis(two * phi) * (th * half), dim, &lf).reversed_axes();
    let lc = tau.cosh().ln();
    let mid = diag(
        &(0..dim)
            .map(|n| Complex::new((-lc * (from_usize::<T>(n) + half)).exp(), T::zero()))
            .collect::<Vec<_>>(),
    );
    Ok(left.dot(&mid).dot(&right))
}

/// Difference between [`oracle_squeeze`] and [`factorization_product`] on
/// `m, n < block`.
pub fn factorization_defect_block<T: Real>(tau: T, phi: T, dim: usize, block: usize) -> Result<T> {
    if dim < 16 {
        return Err(Error::Domain(format!(
            "factorization check needs dimension ≥ 16, got {dim}"
        )));
    }
    let e = oracle_squeeze(tau, phi, dim)?;
    let f = factorization_product(tau, phi, dim)?;
    Ok(max_abs_diff_block(&e, &f, block.min(dim)))
}

/// [`factorization_defect_block`] on the block of size `min(32, dim/2)`.
pub fn factorization_defect<T: Real>(tau: T, phi: T, dim: usize) -> Result<T> {
    factorization_defect_block(tau, phi, dim, 32.min(dim / 2))
}

/// Time-ordered propagator of `i dU/dt = H(t) U` on selected columns.
#[derive(Clone, Debug)]
pub struct Propagator<T> {
    dim: usize,
    columns: Vec<usize>,
    times: Vec<T>,
    states: Vec<CMatrix<T>>,
    unitarity_defect: T,
    edge_weight: T,
    stats: StepStats<T>,
}

impl<T: Real> Propagator<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Initial Fock states that were propagated, in column order.
    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    /// `U(t_i)` restricted to the propagated columns (`dim × columns.len()`).
    pub fn at(&self, i: usize) -> &CMatrix<T> {
        &self.states[i]
    }

    /// `U(t_i)|n⟩`, if column `n` was propagated.
    pub fn column(&self, i: usize, n: usize) -> Option<ndarray::Array1<Complex<T>>> {
        let j = self.columns.iter().position(|&c| c == n)?;
        Some(self.states[i].column(j).to_owned())
    }

    /// `max |U†U − I|` over the grid, restricted to propagated columns below
    /// `dim/2`.
    pub fn unitarity_defect(&self) -> T {
        self.unitarity_defect
    }

    /// Largest probability found in the two highest Fock states, over the
    /// grid and the checked columns.
    pub fn edge_weight(&self) -> T {
        self.edge_weight
    }

    pub fn stats(&self) -> &StepStats<T> {
        &self.stats
    }
}

fn column_unitarity<T: Real>(u: &CMatrix<T>, cols: &[usize], limit: usize) -> T {
    let keep: Vec<usize> = (0..cols.len()).filter(|&j| cols[j] < limit).collect();
    let mut r = T::zero();
    for (x, &j) in keep.iter().enumerate() {
        for &k in &keep[x..] {
            let mut acc = czero::<T>();
            for m in 0..u.nrows() {
                acc += u[[m, j]].conj() * u[[m, k]];
            }
            let target = if j == k { T::one() } else { T::zero() };
            r = r.max((acc - Complex::new(target, T::zero())).norm());
        }
    }
    r
}

fn edge_weight<T: Real>(u: &CMatrix<T>, cols: &[usize], limit: usize) -> T {
    let dim = u.nrows();
    let top = u.slice(s![dim - 2.., ..]);
    let mut r = T::zero();
    for (j, &c) in cols.iter().enumerate() {
        if c < limit {
            r = r.max(top.column(j).iter().fold(T::zero(), |s, z| s + z.norm_sqr()));
        }
    }
    r
}

/// Propagates every basis column; truncation is judged on columns below
/// `dim/4`.
pub fn propagate<T: Real>(spec: &HamiltonianSpec<T>, grid: &[T], dim: usize, tol: T) -> Result<Propagator<T>> {
    let cols: Vec<usize> = (0..dim).collect();
    propagate_impl(spec, grid, dim, &cols, tol, dim / 4)
}

/// Propagates the columns `U(t)|n⟩` for the listed `n` only; truncation is
/// judged on all of them.
pub fn propagate_columns<T: Real>(
    spec: &HamiltonianSpec<T>,
    grid: &[T],
    dim: usize,
    columns: &[usize],
    tol: T,
) -> Result<Propagator<T>> {
    propagate_impl(spec, grid, dim, columns, tol, dim)
}

fn propagate_impl<T: Real>(
    spec: &HamiltonianSpec<T>,
    grid: &[T],
    dim: usize,
    columns: &[usize],
    tol: T,
    check_below: usize,
) -> Result<Propagator<T>> {
    check_dim(dim)?;
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("time grid must be non-empty and strictly increasing".into()));
    }
    if !(tol > T::zero()) {
        return Err(Error::Domain("propagator tolerance must be positive".into()));
    }
    if let Some(&n) = columns.iter().find(|&&n| n >= dim) {
        return Err(Error::Domain(format!("column {n} outside dimension {dim}")));
    }
    let basis = TruncatedBasis::new(spec.omega(), dim)?;
    let minus_i = Complex::new(T::zero(), -T::one());
    let mut f = |t: T, u: &CMatrix<T>| -> Result<CMatrix<T>> {
        let h = build_hamiltonian(&spec.coeffs_at(t)?, &basis)?;
        Ok(banded_matmul(&h, 2, u.view()).mapv(|z| z * minus_i))
    };
    let mut u0 = Array2::zeros((dim, columns.len()));
    for (j, &n) in columns.iter().enumerate() {
        u0[[n, j]] = Complex::new(T::one(), T::zero());
    }
    let cfg = AdaptiveConfig::with_tol(tol);
    let mut h = T::zero();
    let mut stats = StepStats::<T>::default();
    let mut states = vec![u0];
    let mut hook = |_: T, _: T, _: &CMatrix<T>| Ok(());
    for w in grid.windows(2) {
        let next = dopri_advance(&mut f, w[0], states.last().unwrap(), w[1], &cfg, &mut h, &mut stats, &mut hook)?;
        states.push(next);
    }
    let half = dim / 2;
    let unitarity = states
        .iter()
        .map(|u| column_unitarity(u, columns, half))
        .fold(T::zero(), T::max);
    let edge = states
        .iter()
        .map(|u| edge_weight(u, columns, check_below))
        .fold(T::zero(), T::max);
    let limit = tol * lit(100.0);
    if edge > limit {
        return Err(Error::TruncationTooSmall {
            defect: to_f64(edge),
            limit: to_f64(limit),
            suggested: 2 * dim,
        });
    }
    Ok(Propagator {
        dim,
        columns: columns.to_vec(),
        times: grid.to_vec(),
        states,
        unitarity_defect: unitarity,
        edge_weight: edge,
        stats,
    })
}

/// `U† X U` for a full propagator matrix `U`.
pub fn heisenberg_picture<T: Real>(u: &CMatrix<T>, x: &CMatrix<T>) -> CMatrix<T> {
    adjoint(u).dot(x).dot(u)
}
