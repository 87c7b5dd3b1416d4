//! Explicit Runge–Kutta integrators over a generic state space.
//!
//! The same core drives the six-variable Ermakov system and the
//! column-wise Schrödinger propagation of dense complex matrices.

use ndarray::{Array1, Array2, Zip};
use num_complex::Complex;

use crate::error::{to_f64, Error, Result};
use crate::scalar::{lit, Real};

/// A vector-space-like state that Runge–Kutta stages can be formed from.
pub trait OdeState<T: Real>: Clone {
    /// `self += a * x`
    fn axpy(&mut self, a: T, x: &Self);

    /// `max_i |err_i| / (atol + rtol * max(|y0_i|, |y1_i|))`
    fn error_ratio(err: &Self, y0: &Self, y1: &Self, atol: T, rtol: T) -> T;

    fn all_finite(&self) -> bool;
}

impl<T: Real, const N: usize> OdeState<T> for [T; N] {
    fn axpy(&mut self, a: T, x: &Self) {
        for (s, xi) in self.iter_mut().zip(x) {
            *s += a * *xi;
        }
    }

    fn error_ratio(err: &Self, y0: &Self, y1: &Self, atol: T, rtol: T) -> T {
        let mut r = T::zero();
        for i in 0..N {
            let sc = atol + rtol * y0[i].abs().max(y1[i].abs());
            r = r.max(err[i].abs() / sc);
        }
        r
    }

    fn all_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }
}

impl<T: Real> OdeState<T> for Array1<Complex<T>> {
    fn axpy(&mut self, a: T, x: &Self) {
        Zip::from(self).and(x).for_each(|s, &xi| *s += xi * a);
    }

    fn error_ratio(err: &Self, y0: &Self, y1: &Self, atol: T, rtol: T) -> T {
        let mut r = T::zero();
        Zip::from(err).and(y0).and(y1).for_each(|e, a, b| {
            let sc = atol + rtol * a.norm().max(b.norm());
            r = r.max(e.norm() / sc);
        });
        r
    }

    fn all_finite(&self) -> bool {
        self.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl<T: Real> OdeState<T> for Array2<Complex<T>> {
    fn axpy(&mut self, a: T, x: &Self) {
        Zip::from(self).and(x).for_each(|s, &xi| *s += xi * a);
    }

    fn error_ratio(err: &Self, y0: &Self, y1: &Self, atol: T, rtol: T) -> T {
        let mut r = T::zero();
        Zip::from(err).and(y0).and(y1).for_each(|e, a, b| {
            let sc = atol + rtol * a.norm().max(b.norm());
            r = r.max(e.norm() / sc);
        });
        r
    }

    fn all_finite(&self) -> bool {
        self.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

fn combine<T: Real, S: OdeState<T>>(y: &S, h: T, terms: &[(f64, &S)]) -> S {
    let mut out = y.clone();
    for &(c, k) in terms {
        if c != 0.0 {
            out.axpy(h * lit::<T>(c), k);
        }
    }
    out
}

/// One classical fourth-order Runge–Kutta step.
pub fn rk4_step<T, S, F>(f: &mut F, t: T, y: &S, h: T) -> Result<S>
where
    T: Real,
    S: OdeState<T>,
    F: FnMut(T, &S) -> Result<S>,
{
    let half = lit::<T>(0.5);
    let k1 = f(t, y)?;
    let k2 = f(t + half * h, &combine(y, h, &[(0.5, &k1)]))?;
    let k3 = f(t + half * h, &combine(y, h, &[(0.5, &k2)]))?;
    let k4 = f(t + h, &combine(y, h, &[(1.0, &k3)]))?;
    Ok(combine(
        y,
        h,
        &[
            (1.0 / 6.0, &k1),
            (1.0 / 3.0, &k2),
            (1.0 / 3.0, &k3),
            (1.0 / 6.0, &k4),
        ],
    ))
}

/// Step-size control for the embedded Dormand–Prince 5(4) pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveConfig<T> {
    pub atol: T,
    pub rtol: T,
    pub h_init: Option<T>,
    pub h_max: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> AdaptiveConfig<T> {
    pub fn with_tol(tol: T) -> Self {
        Self {
            atol: tol,
            rtol: tol,
            h_init: None,
            h_max: None,
            max_steps: 10_000_000,
        }
    }
}

/// Bookkeeping accumulated across adaptive steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepStats<T> {
    pub accepted: usize,
    pub rejected: usize,
    pub h_min: T,
    pub h_max: T,
    /// Largest accepted error ratio (local error / tolerance).
    pub max_error_ratio: T,
}

impl<T: Real> Default for StepStats<T> {
    fn default() -> Self {
        Self {
            accepted: 0,
            rejected: 0,
            h_min: T::infinity(),
            h_max: T::zero(),
            max_error_ratio: T::zero(),
        }
    }
}

impl<T: Real> StepStats<T> {
    fn record(&mut self, h: T, ratio: T) {
        self.accepted += 1;
        self.h_min = self.h_min.min(h);
        self.h_max = self.h_max.max(h);
        self.max_error_ratio = self.max_error_ratio.max(ratio);
    }

    pub fn merge(&mut self, other: &Self) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.h_min = self.h_min.min(other.h_min);
        self.h_max = self.h_max.max(other.h_max);
        self.max_error_ratio = self.max_error_ratio.max(other.max_error_ratio);
    }
}

const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// fifth-order minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const C: [f64; 6] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0];

/// Advances `y0` from `t0` to exactly `t1` with adaptive Dormand–Prince
/// steps.
///
/// `h` carries the step-size suggestion between calls. `on_step` sees every
/// accepted step as `(t_lo, t_hi, y_new)` and may abort the integration.
#[allow(clippy::too_many_arguments)]
pub fn dopri_advance<T, S, F, G>(
    f: &mut F,
    t0: T,
    y0: &S,
    t1: T,
    cfg: &AdaptiveConfig<T>,
    h: &mut T,
    stats: &mut StepStats<T>,
    on_step: &mut G,
) -> Result<S>
where
    T: Real,
    S: OdeState<T>,
    F: FnMut(T, &S) -> Result<S>,
    G: FnMut(T, T, &S) -> Result<()>,
{
    if !(t1 >= t0) {
        return Err(Error::Domain("integration interval must be forward in time".into()));
    }
    let span = t1 - t0;
    if span == T::zero() {
        return Ok(y0.clone());
    }
    if !(*h > T::zero()) || !h.is_finite() {
        *h = cfg.h_init.unwrap_or(span / lit(16.0));
    }
    if let Some(hm) = cfg.h_max {
        *h = h.min(hm);
    }
    let safety = lit::<T>(0.9);
    let fac_min = lit::<T>(0.2);
    let fac_max = lit::<T>(5.0);
    let expo = lit::<T>(-0.2);

    let mut t = t0;
    let mut y = y0.clone();
    let mut k1 = f(t, &y)?;
    let mut steps = 0usize;
    while t < t1 {
        let last = t + *h >= t1;
        let step = if last { t1 - t } else { *h };
        let floor = T::epsilon() * lit(16.0) * t.abs().max(T::one());
        if step < floor && !last {
            return Err(Error::Stiffness {
                t: to_f64(t),
                h: to_f64(step),
            });
        }
        steps += 1;
        if steps > cfg.max_steps {
            return Err(Error::Stiffness {
                t: to_f64(t),
                h: to_f64(step),
            });
        }

        let k2 = f(t + lit::<T>(C[1]) * step, &combine(&y, step, &[(A2[0], &k1)]))?;
        let k3 = f(
            t + lit::<T>(C[2]) * step,
            &combine(&y, step, &[(A3[0], &k1), (A3[1], &k2)]),
        )?;
        let k4 = f(
            t + lit::<T>(C[3]) * step,
            &combine(&y, step, &[(A4[0], &k1), (A4[1], &k2), (A4[2], &k3)]),
        )?;
        let k5 = f(
            t + lit::<T>(C[4]) * step,
            &combine(
                &y,
                step,
                &[(A5[0], &k1), (A5[1], &k2), (A5[2], &k3), (A5[3], &k4)],
            ),
        )?;
        let k6 = f(
            t + step,
            &combine(
                &y,
                step,
                &[
                    (A6[0], &k1),
                    (A6[1], &k2),
                    (A6[2], &k3),
                    (A6[3], &k4),
                    (A6[4], &k5),
                ],
            ),
        )?;
        let y_new = combine(
            &y,
            step,
            &[
                (B[0], &k1),
                (B[2], &k3),
                (B[3], &k4),
                (B[4], &k5),
                (B[5], &k6),
            ],
        );
        let t_new = if last { t1 } else { t + step };
        let k7 = f(t_new, &y_new)?;

        let mut err = y.clone();
        err.axpy(-T::one(), &y);
        for (e, k) in [
            (E[0], &k1),
            (E[2], &k3),
            (E[3], &k4),
            (E[4], &k5),
            (E[5], &k6),
            (E[6], &k7),
        ] {
            err.axpy(step * lit::<T>(e), k);
        }
        let ratio = if y_new.all_finite() {
            S::error_ratio(&err, &y, &y_new, cfg.atol, cfg.rtol)
        } else {
            T::infinity()
        };

        if ratio <= T::one() {
            on_step(t, t_new, &y_new)?;
            stats.record(step, ratio);
            let fac = if ratio == T::zero() {
                fac_max
            } else {
                (safety * ratio.powf(expo)).max(fac_min).min(fac_max)
            };
            if !last {
                *h = step * fac;
            } else {
                *h = h.max(step * fac).min(*h * fac_max);
            }
            if let Some(hm) = cfg.h_max {
                *h = h.min(hm);
            }
            t = t_new;
            y = y_new;
            k1 = k7;
        } else {
            stats.rejected += 1;
            let fac = if ratio.is_finite() {
                (safety * ratio.powf(expo)).max(fac_min)
            } else {
                fac_min
            };
            *h = step * fac;
        }
    }
    Ok(y)
}
