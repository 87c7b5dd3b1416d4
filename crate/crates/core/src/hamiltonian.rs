//! Time-dependent quadratic Hamiltonians
//! `H(t) = a p² + b q² + c qp − i d − f q − g p` (ħ = 1).
//!
//! Coefficients come either from an analytic preset (free oscillator or
//! degenerate parametric amplifier) or from a sampled table.

use std::io::Read;
use std::path::Path;

use crate::error::{to_f64, Error, Result};
use crate::scalar::{lit, sin_cos, Real};

/// The six real coefficients of the Hamiltonian at one instant.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct CoefficientSet<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    pub f: T,
    pub g: T,
}

impl<T: Real> CoefficientSet<T> {
    pub fn zero() -> Self {
        Self {
            a: T::zero(),
            b: T::zero(),
            c: T::zero(),
            d: T::zero(),
            f: T::zero(),
            g: T::zero(),
        }
    }

    fn from_array(v: [T; 6]) -> Self {
        Self {
            a: v[0],
            b: v[1],
            c: v[2],
            d: v[3],
            f: v[4],
            g: v[5],
        }
    }

    pub fn as_array(&self) -> [T; 6] {
        [self.a, self.b, self.c, self.d, self.f, self.g]
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|x| x.is_finite())
    }

    pub fn hermiticity_defect(&self) -> T {
        hermiticity_defect(self)
    }
}

/// `|d − c/2|`; zero exactly when `c qp − i d` is Hermitian.
pub fn hermiticity_defect<T: Real>(cs: &CoefficientSet<T>) -> T {
    (cs.d - cs.c * lit(0.5)).abs()
}

/// Interpolation rule for sampled coefficient tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Interpolation {
    /// Shape-preserving piecewise cubic Hermite (Fritsch–Carlson slopes).
    #[default]
    MonotoneCubic,
    Linear,
}

/// Coefficients sampled on a strictly increasing time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTable<T> {
    times: Vec<T>,
    values: Vec<[T; 6]>,
    slopes: Vec<[T; 6]>,
    interpolation: Interpolation,
}

impl<T: Real> CoefficientTable<T> {
    pub fn new(
        times: Vec<T>,
        rows: Vec<CoefficientSet<T>>,
        interpolation: Interpolation,
    ) -> Result<Self> {
        if times.len() != rows.len() {
            return Err(Error::Table(format!(
                "{} times but {} coefficient rows",
                times.len(),
                rows.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::Table("at least two samples are required".into()));
        }
        for (i, (t, row)) in times.iter().zip(&rows).enumerate() {
            if !t.is_finite() || !row.is_finite() {
                return Err(Error::Table(format!("non-finite value in row {}", i + 1)));
            }
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Table(format!(
                "times must be strictly increasing (row {} -> {})",
                i + 1,
                i + 2
            )));
        }
        let values: Vec<[T; 6]> = rows.iter().map(CoefficientSet::as_array).collect();
        let slopes = match interpolation {
            Interpolation::Linear => vec![[T::zero(); 6]; times.len()],
            Interpolation::MonotoneCubic => {
                let mut s = vec![[T::zero(); 6]; times.len()];
                for col in 0..6 {
                    let y: Vec<T> = values.iter().map(|r| r[col]).collect();
                    for (k, m) in pchip_slopes(&times, &y).into_iter().enumerate() {
                        s[k][col] = m;
                    }
                }
                s
            }
        };
        Ok(Self {
            times,
            values,
            slopes,
            interpolation,
        })
    }

    /// Reads a table with header `t,a,b,c,d,f,g`.
    pub fn from_csv_reader<R: Read>(reader: R, interpolation: Interpolation) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let expected = ["t", "a", "b", "c", "d", "f", "g"];
        if header != expected {
            return Err(Error::Table(format!(
                "expected header `t,a,b,c,d,f,g`, found `{}`",
                header.join(",")
            )));
        }
        let mut times = Vec::new();
        let mut rows = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let line = i + 2;
            if record.len() != 7 {
                return Err(Error::Table(format!(
                    "line {line}: expected 7 fields, found {}",
                    record.len()
                )));
            }
            let mut v = [T::zero(); 7];
            for (j, field) in record.iter().enumerate() {
                let x: f64 = field.parse().map_err(|_| {
                    Error::Table(format!(
                        "line {line}, column `{}`: cannot parse `{field}`",
                        expected[j]
                    ))
                })?;
                v[j] = lit(x);
            }
            times.push(v[0]);
            rows.push(CoefficientSet::from_array([v[1], v[2], v[3], v[4], v[5], v[6]]));
        }
        Self::new(times, rows, interpolation)
    }

    pub fn from_csv_path(path: impl AsRef<Path>, interpolation: Interpolation) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(file, interpolation)
    }

    pub fn window(&self) -> (T, T) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest `|d − c/2|` over the samples.
    pub fn max_hermiticity_defect(&self) -> T {
        self.values
            .iter()
            .map(|r| (r[3] - r[2] * lit(0.5)).abs())
            .fold(T::zero(), T::max)
    }

    pub fn eval(&self, t: T) -> Result<CoefficientSet<T>> {
        let (lo, hi) = self.window();
        if !(t >= lo && t <= hi) {
            return Err(Error::Domain(format!(
                "t = {} outside table window [{}, {}]",
                to_f64(t),
                to_f64(lo),
                to_f64(hi)
            )));
        }
        let k = (self.times.partition_point(|x| *x <= t).max(1) - 1).min(self.times.len() - 2);
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let mut out = [T::zero(); 6];
        for (col, o) in out.iter_mut().enumerate() {
            let (y0, y1) = (self.values[k][col], self.values[k + 1][col]);
            *o = match self.interpolation {
                Interpolation::Linear => y0 + (y1 - y0) * s,
                Interpolation::MonotoneCubic => {
                    let (m0, m1) = (self.slopes[k][col], self.slopes[k + 1][col]);
                    hermite_cubic(y0, y1, m0 * h, m1 * h, s)
                }
            };
        }
        let cs = CoefficientSet::from_array(out);
        if !cs.is_finite() {
            return Err(Error::Numeric(format!(
                "interpolated coefficients not finite at t = {}",
                to_f64(t)
            )));
        }
        Ok(cs)
    }
}

fn hermite_cubic<T: Real>(y0: T, y1: T, d0: T, d1: T, s: T) -> T {
    let two = lit::<T>(2.0);
    let three = lit::<T>(3.0);
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = two * s3 - three * s2 + T::one();
    let h10 = s3 - two * s2 + s;
    let h01 = three * s2 - two * s3;
    let h11 = s3 - s2;
    h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1
}

/// Fritsch–Carlson slopes with the non-centred three-point end rule.
fn pchip_slopes<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    let n = x.len();
    let h: Vec<T> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let del: Vec<T> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![del[0], del[0]];
    }
    let mut m = vec![T::zero(); n];
    let two = lit::<T>(2.0);
    for k in 1..n - 1 {
        if del[k - 1] * del[k] > T::zero() {
            let w1 = two * h[k] + h[k - 1];
            let w2 = h[k] + two * h[k - 1];
            m[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
        }
    }
    m[0] = pchip_end(h[0], h[1], del[0], del[1]);
    m[n - 1] = pchip_end(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    m
}

fn pchip_end<T: Real>(h0: T, h1: T, d0: T, d1: T) -> T {
    let two = lit::<T>(2.0);
    let three = lit::<T>(3.0);
    let m = ((two * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m.signum() != d0.signum() || d0 == T::zero() {
        T::zero()
    } else if d0.signum() != d1.signum() && m.abs() > three * d0.abs() {
        three * d0
    } else {
        m
    }
}

/// Source of the coefficients.
#[derive(Clone, Debug, PartialEq)]
pub enum HamiltonianKind<T> {
    /// `H = (p² + ω² q²)/2`.
    Sho,
    /// Degenerate parametric amplifier with pump strength `λ`.
    Dpa { lambda: T },
    Custom(CoefficientTable<T>),
}

/// A coefficient source together with the mode frequency `ω`.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSpec<T> {
    omega: T,
    kind: HamiltonianKind<T>,
}

impl<T: Real> HamiltonianSpec<T> {
    fn check_omega(omega: T) -> Result<()> {
        if !(omega > T::zero()) || !omega.is_finite() {
            return Err(Error::Domain(format!(
                "mode frequency must be positive, got {}",
                to_f64(omega)
            )));
        }
        Ok(())
    }

    pub fn sho(omega: T) -> Result<Self> {
        Self::check_omega(omega)?;
        Ok(Self {
            omega,
            kind: HamiltonianKind::Sho,
        })
    }

    pub fn dpa(omega: T, lambda: T) -> Result<Self> {
        Self::check_omega(omega)?;
        if !lambda.is_finite() {
            return Err(Error::Domain("pump strength must be finite".into()));
        }
        Ok(Self {
            omega,
            kind: HamiltonianKind::Dpa { lambda },
        })
    }

    pub fn custom(omega: T, table: CoefficientTable<T>) -> Result<Self> {
        Self::check_omega(omega)?;
        Ok(Self {
            omega,
            kind: HamiltonianKind::Custom(table),
        })
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    pub fn kind(&self) -> &HamiltonianKind<T> {
        &self.kind
    }

    /// Valid time window; `None` for analytic presets (all of ℝ).
    pub fn window(&self) -> Option<(T, T)> {
        match &self.kind {
            HamiltonianKind::Custom(table) => Some(table.window()),
            _ => None,
        }
    }

    /// Whether `[t0, t1]` lies inside the valid window.
    pub fn covers(&self, t0: T, t1: T) -> bool {
        match self.window() {
            None => t0.is_finite() && t1.is_finite(),
            Some((lo, hi)) => t0 >= lo && t1 <= hi,
        }
    }

    pub fn coeffs_at(&self, t: T) -> Result<CoefficientSet<T>> {
        if !t.is_finite() {
            return Err(Error::Domain("time must be finite".into()));
        }
        let half = lit::<T>(0.5);
        match &self.kind {
            HamiltonianKind::Sho => Ok(CoefficientSet {
                a: half,
                b: half * self.omega * self.omega,
                ..CoefficientSet::zero()
            }),
            HamiltonianKind::Dpa { lambda } => {
                let w = self.omega;
                let l = *lambda;
                let (s, c) = sin_cos(lit::<T>(2.0) * w * t);
                Ok(CoefficientSet {
                    a: half * (T::one() - l / w * s),
                    b: half * (w * w + l * w * s),
                    c: l * c,
                    d: half * l * c,
                    f: T::zero(),
                    g: T::zero(),
                })
            }
            HamiltonianKind::Custom(table) => table.eval(t),
        }
    }

    /// Non-zero `|d − c/2|` worth warning about; presets are Hermitian by
    /// construction.
    pub fn hermiticity_warning(&self, tol: T) -> Option<T> {
        match &self.kind {
            HamiltonianKind::Custom(table) => {
                let d = table.max_hermiticity_defect();
                (d > tol).then_some(d)
            }
            _ => None,
        }
    }
}

pub fn coeffs_at<T: Real>(spec: &HamiltonianSpec<T>, t: T) -> Result<CoefficientSet<T>> {
    spec.coeffs_at(t)
}
