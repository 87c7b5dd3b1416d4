//! Dense complex matrix helpers for the truncated Fock space.

use ndarray::{s, Array1, Array2, ArrayView2, Zip};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

pub type CMatrix<T> = Array2<Complex<T>>;
pub type CVector<T> = Array1<Complex<T>>;

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    Array2::from_diag_elem(n, Complex::new(T::one(), T::zero()))
}

/// Diagonal matrix with the given entries.
pub fn diag<T: Real>(d: &[Complex<T>]) -> CMatrix<T> {
    let mut m = Array2::zeros((d.len(), d.len()));
    for (i, &z) in d.iter().enumerate() {
        m[[i, i]] = z;
    }
    m
}

pub fn adjoint<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    a.t().mapv(|z| z.conj())
}

pub fn matmul<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.dot(b)
}

/// `[a, b] = ab − ba`.
pub fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.dot(b) - b.dot(a)
}

/// Product `h·u` for a matrix `h` with `h[i, k] = 0` whenever `|i − k| > width`.
pub fn banded_matmul<T: Real>(h: &CMatrix<T>, width: usize, u: ArrayView2<Complex<T>>) -> CMatrix<T> {
    let n = h.nrows();
    let mut out = Array2::zeros((n, u.ncols()));
    for i in 0..n {
        let lo = i.saturating_sub(width);
        let hi = (i + width + 1).min(n);
        let mut row = out.row_mut(i);
        for k in lo..hi {
            let hik = h[[i, k]];
            if hik == Complex::new(T::zero(), T::zero()) {
                continue;
            }
            Zip::from(&mut row)
                .and(u.row(k))
                .for_each(|o, &x| *o += hik * x);
        }
    }
    out
}

/// `x·a` for real `x`.
pub fn scale_real<T: Real>(a: &CMatrix<T>, x: T) -> CMatrix<T> {
    a.mapv(|z| z * x)
}

/// `Σ xᵢ·aᵢ` for real weights.
pub fn lincomb<T: Real>(terms: &[(T, &CMatrix<T>)]) -> CMatrix<T> {
    let mut out = Array2::zeros(terms[0].1.raw_dim());
    for (x, m) in terms {
        Zip::from(&mut out).and(*m).for_each(|o, &z| *o += z * *x);
    }
    out
}

/// `max |a_mn − b_mn|` over `m, n < block`.
pub fn max_abs_diff_block<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>, block: usize) -> T {
    let k = block.min(a.nrows()).min(b.nrows());
    let mut r = T::zero();
    Zip::from(a.slice(s![..k, ..k]))
        .and(b.slice(s![..k, ..k]))
        .for_each(|x, y| r = r.max((*x - *y).norm()));
    r
}

/// `max_{m,n < block} |(a†a − I)_mn|`.
pub fn unitarity_defect<T: Real>(a: &CMatrix<T>, block: usize) -> T {
    let p = adjoint(a).dot(a);
    max_abs_diff_block(&p, &identity(a.nrows()), block)
}

/// Maximum absolute column sum.
pub fn norm1<T: Real>(a: &CMatrix<T>) -> T {
    a.columns()
        .into_iter()
        .map(|c| c.iter().fold(T::zero(), |s, z| s + z.norm()))
        .fold(T::zero(), T::max)
}

/// Solves `a x = b` by LU decomposition with partial pivoting.
pub fn lu_solve<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::Domain("lu_solve: dimension mismatch".into()));
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| lu[[i, k]].norm().partial_cmp(&lu[[j, k]].norm()).unwrap())
            .unwrap();
        if lu[[p, k]].norm() == T::zero() {
            return Err(Error::Numeric("singular matrix in lu_solve".into()));
        }
        if p != k {
            for j in 0..n {
                lu.swap([k, j], [p, j]);
            }
            for j in 0..x.ncols() {
                x.swap([k, j], [p, j]);
            }
        }
        let piv = lu[[k, k]];
        for i in k + 1..n {
            let l = lu[[i, k]] / piv;
            if l == Complex::new(T::zero(), T::zero()) {
                continue;
            }
            lu[[i, k]] = l;
            for j in k + 1..n {
                let v = lu[[k, j]];
                lu[[i, j]] -= l * v;
            }
            for j in 0..x.ncols() {
                let v = x[[k, j]];
                x[[i, j]] -= l * v;
            }
        }
    }
    for k in (0..n).rev() {
        let piv = lu[[k, k]];
        for j in 0..x.ncols() {
            let mut acc = x[[k, j]];
            for i in k + 1..n {
                acc -= lu[[k, i]] * x[[i, j]];
            }
            x[[k, j]] = acc / piv;
        }
    }
    Ok(x)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.
pub fn expm<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Domain("expm: matrix must be square".into()));
    }
    if !a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Numeric("expm: non-finite input".into()));
    }
    let theta13 = lit::<T>(5.371920351148152);
    let nrm = norm1(a);
    let mut squarings = 0i32;
    if nrm > theta13 {
        squarings = (nrm / theta13).log2().ceil().to_i32().unwrap_or(0).max(0);
    }
    let scale = lit::<T>(2.0).powi(-squarings);
    let a = scale_real(a, scale);
    let id = identity::<T>(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let b = |i: usize| lit::<T>(PADE13[i]);
    let inner_u = lincomb(&[(b(13), &a6), (b(11), &a4), (b(9), &a2)]);
    let u = a.dot(&(a6.dot(&inner_u) + lincomb(&[(b(7), &a6), (b(5), &a4), (b(3), &a2), (b(1), &id)])));
    let inner_v = lincomb(&[(b(12), &a6), (b(10), &a4), (b(8), &a2)]);
    let v = a6.dot(&inner_v) + lincomb(&[(b(6), &a6), (b(4), &a4), (b(2), &a2), (b(0), &id)]);
    let mut r = lu_solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    Ok(r)
}
