//! The six-variable Ermakov-type system
//!
//! ```text
//! α' = aβ⁴ − b − 2cα − 4aα²
//! β' = −(c + 4aα) β
//! γ' = −aβ²
//! δ' = 2aβ³ε + f + 2gα − (c + 4aα) δ
//! ε' = (g − 2aδ) β
//! κ' = gδ − aδ² + aβ²ε²
//! ```
//!
//! whose solutions parameterize the dynamical invariants, the evolution
//! operator and the Heisenberg-picture operators.

use std::io::Write;

use crate::error::{to_f64, Error, Result};
use crate::export::fmt_num;
use crate::hamiltonian::{CoefficientSet, HamiltonianSpec};
use crate::ode::{dopri_advance, rk4_step, AdaptiveConfig, StepStats};
use crate::scalar::{from_usize, lit, sin_cos, Real};

/// Values of `(α, β, γ, δ, ε, κ)` at one instant.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ErmakovState<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub delta: T,
    pub epsilon: T,
    pub kappa: T,
}

impl<T: Real> ErmakovState<T> {
    pub fn new(alpha: T, beta: T, gamma: T, delta: T, epsilon: T, kappa: T) -> Result<Self> {
        let s = Self {
            alpha,
            beta,
            gamma,
            delta,
            epsilon,
            kappa,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.to_array().iter().all(|x| x.is_finite()) {
            return Err(Error::Numeric("Ermakov state has non-finite entries".into()));
        }
        if self.beta == T::zero() {
            return Err(Error::Singularity {
                t_lo: f64::NAN,
                t_hi: f64::NAN,
            });
        }
        Ok(())
    }

    pub fn to_array(&self) -> [T; 6] {
        [
            self.alpha,
            self.beta,
            self.gamma,
            self.delta,
            self.epsilon,
            self.kappa,
        ]
    }

    pub fn from_array(v: [T; 6]) -> Self {
        Self {
            alpha: v[0],
            beta: v[1],
            gamma: v[2],
            delta: v[3],
            epsilon: v[4],
            kappa: v[5],
        }
    }
}

/// Right-hand side of the Ermakov system.
pub fn rhs<T: Real>(state: &ErmakovState<T>, cs: &CoefficientSet<T>) -> Result<[T; 6]> {
    if state.beta == T::zero() {
        return Err(Error::Singularity {
            t_lo: f64::NAN,
            t_hi: f64::NAN,
        });
    }
    Ok(rhs_array(&state.to_array(), cs))
}

fn rhs_array<T: Real>(y: &[T; 6], cs: &CoefficientSet<T>) -> [T; 6] {
    let [al, be, _ga, de, ep, _ka] = *y;
    let two = lit::<T>(2.0);
    let four = lit::<T>(4.0);
    let CoefficientSet { a, b, c, f, g, .. } = *cs;
    let drift = c + four * a * al;
    let be2 = be * be;
    [
        a * be2 * be2 - b - two * c * al - four * a * al * al,
        -drift * be,
        -a * be2,
        two * a * be2 * be * ep + f + two * g * al - drift * de,
        (g - two * a * de) * be,
        g * de - a * de * de + a * be2 * ep * ep,
    ]
}

/// `α = γ = δ = ε = κ = 0`, `β = √ω`; maps `q̂, p̂` onto themselves at `t = 0`.
pub fn standard_initial<T: Real>(omega: T) -> Result<ErmakovState<T>> {
    if !(omega > T::zero()) || !omega.is_finite() {
        return Err(Error::Domain(format!(
            "mode frequency must be positive, got {}",
            to_f64(omega)
        )));
    }
    Ok(ErmakovState {
        beta: omega.sqrt(),
        ..ErmakovState::default()
    })
}

/// Initial data of a traditional single-mode squeeze with
/// `τ(0) = ½ ln(β₀²/ω)` and `α = θ = φ = 0`.
pub fn traditional_squeeze_initial<T: Real>(omega: T, beta0: T) -> Result<ErmakovState<T>> {
    standard_initial(omega)?;
    if beta0 == T::zero() || !beta0.is_finite() {
        return Err(Error::Domain("β₀ must be finite and non-zero".into()));
    }
    Ok(ErmakovState {
        beta: beta0,
        ..ErmakovState::default()
    })
}

/// Exact `(α, β, γ, δ, ε)` at time `t` for the oscillator `H = (p² + ω²q²)/2`
/// started from `init` at `t = 0`; `κ` is not tracked.
///
/// The state is rebuilt from the classical flow of the Gaussian covariance
/// `(1/(2β²), α/β², (4α² + β⁴)/(2β²))` and of the means `(−ε/β, δ − 2αε/β)`.
pub fn sho_closed_form<T: Real>(omega: T, init: &ErmakovState<T>, t: T) -> Result<[T; 5]> {
    standard_initial(omega)?;
    init.validate()?;
    let two = lit::<T>(2.0);
    let ErmakovState {
        alpha,
        beta,
        gamma,
        delta,
        epsilon,
        ..
    } = *init;
    let b2 = beta * beta;
    let (sqq, sqp, spp) = (
        (two * b2).recip(),
        alpha / b2,
        (lit::<T>(4.0) * alpha * alpha + b2 * b2) / (two * b2),
    );
    let (q0, p0) = (-epsilon / beta, delta - two * alpha * epsilon / beta);
    let x = omega * t;
    let (s, c) = sin_cos(x);
    let qq = c * c * sqq + two * c * s / omega * sqp + s * s / (omega * omega) * spp;
    let qp = -omega * c * s * sqq + (c * c - s * s) * sqp + c * s / omega * spp;
    let q = c * q0 + s / omega * p0;
    let p = -omega * s * q0 + c * p0;
    let be = beta.signum() / (two * qq).sqrt();
    let al = qp * be * be;
    let ep = -be * q;
    let de = p + two * al * ep / be;
    // γ' = −1/(4 Σ_qq); the vector (√D cos x, B sin x + C cos x) turns by
    // exactly π per half period, which fixes the branch of the angle
    let (bb, cc) = (spp / (omega * omega), sqp / omega);
    let rd = (two * omega).recip();
    let pi = T::PI();
    let k = (x / pi).floor();
    let ang = |y: T| {
        let (sy, cy) = sin_cos(y);
        (bb * sy + cc * cy).atan2(rd * cy)
    };
    let mut rem = ang(x) - ang(k * pi);
    // the true increment lies in [0, π); wrap with margin for rounding
    let half = pi / two;
    while rem < -half {
        rem += two * pi;
    }
    while rem >= pi + half {
        rem -= two * pi;
    }
    let phase = k * pi + rem;
    Ok([al, be, gamma - phase / two, de, ep])
}

/// Integration scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method<T> {
    /// Classical RK4 with `substeps` equal steps per grid interval.
    Rk4 { substeps: usize },
    /// Dormand–Prince 5(4) with local error ≤ `tol` per step.
    Adaptive { tol: T },
}

/// `samples` equally spaced points on `[t0, t1]`, endpoints included.
pub fn uniform_grid<T: Real>(t0: T, t1: T, samples: usize) -> Vec<T> {
    match samples {
        0 => Vec::new(),
        1 => vec![t0],
        _ => {
            let n = from_usize::<T>(samples - 1);
            (0..samples)
                .map(|i| {
                    if i == samples - 1 {
                        t1
                    } else {
                        t0 + (t1 - t0) * from_usize::<T>(i) / n
                    }
                })
                .collect()
        }
    }
}

/// Integrated solution on a strictly increasing grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    times: Vec<T>,
    states: Vec<ErmakovState<T>>,
    derivatives: Vec<[T; 6]>,
    method: Method<T>,
    stats: StepStats<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn states(&self) -> &[ErmakovState<T>] {
        &self.states
    }

    pub fn derivatives(&self) -> &[[T; 6]] {
        &self.derivatives
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn method(&self) -> Method<T> {
        self.method
    }

    pub fn stats(&self) -> &StepStats<T> {
        &self.stats
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, &ErmakovState<T>)> + '_ {
        self.times.iter().copied().zip(self.states.iter())
    }

    /// Cubic Hermite interpolation from stored states and derivatives.
    pub fn state_at(&self, t: T) -> Result<ErmakovState<T>> {
        let n = self.times.len();
        let (lo, hi) = (self.times[0], self.times[n - 1]);
        if !(t >= lo && t <= hi) {
            return Err(Error::Domain(format!(
                "t = {} outside trajectory [{}, {}]",
                to_f64(t),
                to_f64(lo),
                to_f64(hi)
            )));
        }
        if n == 1 {
            return Ok(self.states[0]);
        }
        let k = (self.times.partition_point(|x| *x <= t).max(1) - 1).min(n - 2);
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let two = lit::<T>(2.0);
        let three = lit::<T>(3.0);
        let (s2, s3) = (s * s, s * s * s);
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = three * s2 - two * s3;
        let h11 = s3 - s2;
        let (y0, y1) = (self.states[k].to_array(), self.states[k + 1].to_array());
        let (d0, d1) = (self.derivatives[k], self.derivatives[k + 1]);
        let mut out = [T::zero(); 6];
        for i in 0..6 {
            out[i] = h00 * y0[i] + h10 * h * d0[i] + h01 * y1[i] + h11 * h * d1[i];
        }
        Ok(ErmakovState::from_array(out))
    }

    /// Writes `t,alpha,beta,gamma,delta,epsilon,kappa`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,alpha,beta,gamma,delta,epsilon,kappa")?;
        for (t, s) in self.iter() {
            write!(w, "{}", fmt_num(t))?;
            for x in s.to_array() {
                write!(w, ",{}", fmt_num(x))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn check_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain("time grid is empty".into()));
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::Domain("time grid contains non-finite values".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Integrates the Ermakov system from `init` at `grid[0]` across `grid`.
///
/// Aborts with [`Error::Singularity`] if `β` reaches zero or changes sign.
pub fn integrate<T: Real>(
    spec: &HamiltonianSpec<T>,
    init: &ErmakovState<T>,
    grid: &[T],
    method: Method<T>,
) -> Result<Trajectory<T>> {
    check_grid(grid)?;
    init.validate()?;
    if !spec.covers(grid[0], grid[grid.len() - 1]) {
        return Err(Error::Domain("time grid extends beyond the Hamiltonian window".into()));
    }
    let sign0 = init.beta.signum();
    let mut f = |t: T, y: &[T; 6]| -> Result<[T; 6]> {
        if y[1] == T::zero() {
            return Err(Error::Singularity {
                t_lo: to_f64(t),
                t_hi: to_f64(t),
            });
        }
        let cs = spec.coeffs_at(t)?;
        Ok(rhs_array(y, &cs))
    };
    let check = |lo: T, hi: T, y: &[T; 6]| -> Result<()> {
        if !(y[1] * sign0 > T::zero()) {
            return Err(Error::Singularity {
                t_lo: to_f64(lo),
                t_hi: to_f64(hi),
            });
        }
        if !y.iter().all(|x| x.is_finite()) {
            return Err(Error::Numeric(format!(
                "Ermakov state diverged in [{}, {}]",
                to_f64(lo),
                to_f64(hi)
            )));
        }
        Ok(())
    };

    let mut y = init.to_array();
    let mut states = vec![*init];
    let mut derivatives = vec![f(grid[0], &y)?];
    let mut stats = StepStats::<T>::default();
    match method {
        Method::Rk4 { substeps } => {
            if substeps == 0 {
                return Err(Error::Domain("RK4 needs at least one substep".into()));
            }
            let m = from_usize::<T>(substeps);
            for w in grid.windows(2) {
                let h = (w[1] - w[0]) / m;
                for j in 0..substeps {
                    let t = w[0] + from_usize::<T>(j) * h;
                    y = rk4_step(&mut f, t, &y, h).map_err(|e| match e {
                        Error::Singularity { .. } => Error::Singularity {
                            t_lo: to_f64(t),
                            t_hi: to_f64(t + h),
                        },
                        other => other,
                    })?;
                    check(t, t + h, &y)?;
                    stats.accepted += 1;
                }
                stats.h_min = stats.h_min.min(h);
                stats.h_max = stats.h_max.max(h);
                states.push(ErmakovState::from_array(y));
                derivatives.push(f(w[1], &y)?);
            }
        }
        Method::Adaptive { tol } => {
            if !(tol > T::zero()) {
                return Err(Error::Domain("adaptive tolerance must be positive".into()));
            }
            let cfg = AdaptiveConfig::with_tol(tol);
            let mut h = T::zero();
            let mut hook = check;
            for w in grid.windows(2) {
                y = dopri_advance(&mut f, w[0], &y, w[1], &cfg, &mut h, &mut stats, &mut hook)?;
                states.push(ErmakovState::from_array(y));
                derivatives.push(f(w[1], &y)?);
            }
        }
    }
    Ok(Trajectory {
        times: grid.to_vec(),
        states,
        derivatives,
        method,
        stats,
    })
}

/// Per-equation maximum of `|finite-difference derivative − rhs|` over the
/// interior grid points, in the order `(α, β, γ, δ, ε, κ)`.
pub fn residual<T: Real>(traj: &Trajectory<T>, spec: &HamiltonianSpec<T>) -> Result<[T; 6]> {
    if traj.len() < 3 {
        return Err(Error::Domain("residual needs at least three points".into()));
    }
    let mut out = [T::zero(); 6];
    for i in 1..traj.len() - 1 {
        let (tm, t0, tp) = (traj.times[i - 1], traj.times[i], traj.times[i + 1]);
        let (h1, h2) = (t0 - tm, tp - t0);
        // three-point derivative on a possibly non-uniform grid
        let wm = -h2 / (h1 * (h1 + h2));
        let w0 = (h2 - h1) / (h1 * h2);
        let wp = h1 / (h2 * (h1 + h2));
        let (ym, y0, yp) = (
            traj.states[i - 1].to_array(),
            traj.states[i].to_array(),
            traj.states[i + 1].to_array(),
        );
        let r = rhs(&traj.states[i], &spec.coeffs_at(t0)?)?;
        for k in 0..6 {
            let fd = wm * ym[k] + w0 * y0[k] + wp * yp[k];
            out[k] = out[k].max((fd - r[k]).abs());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sho() -> HamiltonianSpec<f64> {
        HamiltonianSpec::sho(1.0).unwrap()
    }

    #[test]
    fn rhs_sho_fixed_point() {
        let cs = sho().coeffs_at(0.0).unwrap();
        let d = rhs(&standard_initial(1.0).unwrap(), &cs).unwrap();
        assert_eq!(d, [0.0, 0.0, -0.5, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn rhs_zero_hamiltonian() {
        let s = ErmakovState::new(0.3, -1.2, 0.1, 0.4, -0.5, 2.0).unwrap();
        assert_eq!(rhs(&s, &CoefficientSet::zero()).unwrap(), [0.0; 6]);
    }

    #[test]
    fn rhs_dpa_at_origin() {
        let cs = HamiltonianSpec::dpa(1.0f64, 0.1).unwrap().coeffs_at(0.0).unwrap();
        let d = rhs(&standard_initial(1.0).unwrap(), &cs).unwrap();
        assert_eq!(d[0], 0.0);
        assert!((d[1] + 0.1).abs() < 1e-16);
        assert_eq!(d[2], -0.5);
        assert_eq!(&d[3..], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn rhs_rejects_zero_beta() {
        let s = ErmakovState {
            beta: 0.0,
            ..ErmakovState::default()
        };
        assert!(matches!(
            rhs(&s, &CoefficientSet::zero()),
            Err(Error::Singularity { .. })
        ));
    }

    #[test]
    fn standard_initial_values() {
        assert_eq!(standard_initial(1.0).unwrap().to_array(), [0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(standard_initial(4.0).unwrap().beta, 2.0);
        assert_eq!(standard_initial(2.0).unwrap().beta, 2f64.sqrt());
        assert!(matches!(standard_initial(0.0), Err(Error::Domain(_))));
        assert!(matches!(standard_initial(-3.0), Err(Error::Domain(_))));
    }

    #[test]
    fn sho_fixed_point_trajectory() {
        let grid = uniform_grid(0.0, 10.0, 101);
        for method in [Method::Rk4 { substeps: 10 }, Method::Adaptive { tol: 1e-12 }] {
            let traj = integrate(&sho(), &standard_initial(1.0).unwrap(), &grid, method).unwrap();
            for (t, s) in traj.iter() {
                assert!(s.alpha.abs() < 1e-10);
                assert!((s.beta - 1.0).abs() < 1e-10);
                assert!((s.gamma + t / 2.0).abs() < 1e-10);
                assert!(s.delta.abs() < 1e-12 && s.epsilon.abs() < 1e-12 && s.kappa.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_spec_keeps_state_constant() {
        let tab = crate::hamiltonian::CoefficientTable::new(
            vec![0.0, 5.0],
            vec![CoefficientSet::zero(); 2],
            crate::hamiltonian::Interpolation::Linear,
        )
        .unwrap();
        let spec = HamiltonianSpec::custom(1.0, tab).unwrap();
        let init = ErmakovState::new(0.2, 0.7, -0.1, 0.3, 0.9, 0.05).unwrap();
        let traj =
            integrate(&spec, &init, &uniform_grid(0.0, 5.0, 11), Method::Rk4 { substeps: 4 })
                .unwrap();
        assert!(traj.states().iter().all(|s| *s == init));
        assert_eq!(residual(&traj, &spec).unwrap(), [0.0; 6]);
    }

    #[test]
    fn residual_of_sho_fixed_point() {
        let grid = uniform_grid(0.0, 2.0, 2001);
        let traj =
            integrate(&sho(), &standard_initial(1.0).unwrap(), &grid, Method::Rk4 { substeps: 1 })
                .unwrap();
        let r = residual(&traj, &sho()).unwrap();
        assert!(r.iter().all(|x| *x <= 1e-6), "{r:?}");
    }

    #[test]
    fn residual_needs_three_points() {
        let traj = integrate(
            &sho(),
            &standard_initial(1.0).unwrap(),
            &[0.0, 1.0],
            Method::Rk4 { substeps: 2 },
        )
        .unwrap();
        assert!(residual(&traj, &sho()).is_err());
    }

    #[test]
    fn grid_validation() {
        let init = standard_initial(1.0).unwrap();
        let m = Method::Rk4 { substeps: 1 };
        assert!(integrate(&sho(), &init, &[], m).is_err());
        assert!(integrate(&sho(), &init, &[0.0, 0.0, 1.0], m).is_err());
        assert!(integrate(&sho(), &init, &[0.0, 1.0], Method::Adaptive { tol: 0.0 }).is_err());
    }

    #[test]
    fn beta_collapse_is_reported_with_bracket() {
        // β' = -4aαβ never changes sign, but one coarse RK4 step overshoots.
        let tab = crate::hamiltonian::CoefficientTable::new(
            vec![0.0, 1.0],
            vec![
                CoefficientSet {
                    a: 1.0,
                    ..CoefficientSet::zero()
                };
                2
            ],
            crate::hamiltonian::Interpolation::Linear,
        )
        .unwrap();
        let spec = HamiltonianSpec::custom(1.0, tab).unwrap();
        let init = ErmakovState::new(1.0, 1.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let err = integrate(&spec, &init, &[0.0, 0.5], Method::Rk4 { substeps: 1 }).unwrap_err();
        match err {
            Error::Singularity { t_lo, t_hi } => assert_eq!((t_lo, t_hi), (0.0, 0.5)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dense_output_is_fourth_order() {
        let spec = HamiltonianSpec::dpa(1.0, 0.3).unwrap();
        let init = ErmakovState::new(0.2, 1.3, 0.0, 0.1, -0.2, 0.0).unwrap();
        let fine = integrate(&spec, &init, &uniform_grid(0.0, 2.0, 2001), Method::Adaptive {
            tol: 1e-13,
        })
        .unwrap();
        let mut errs = Vec::new();
        for samples in [11, 21] {
            let coarse = integrate(&spec, &init, &uniform_grid(0.0, 2.0, samples), Method::Adaptive {
                tol: 1e-13,
            })
            .unwrap();
            let mut e = 0.0f64;
            for (t, s) in fine.iter() {
                let si = coarse.state_at(t).unwrap();
                let (a, b): ([f64; 6], [f64; 6]) = (si.to_array(), s.to_array());
                for (x, y) in a.iter().zip(b) {
                    e = e.max((x - y).abs());
                }
            }
            errs.push(e);
        }
        assert!(errs[0] / errs[1] > 12.0, "{errs:?}");
        assert!(fine.state_at(2.5).is_err());
    }

    #[test]
    fn sho_closed_form_matches_tight_integration() {
        let omega = 1.7f64;
        let init = ErmakovState::new(0.3, 0.8, 0.2, -0.4, 0.5, 0.0).unwrap();
        let grid = uniform_grid(0.0, 12.0, 25);
        let traj = integrate(&HamiltonianSpec::sho(omega).unwrap(), &init, &grid, Method::Adaptive { tol: 1e-13 })
            .unwrap();
        for (t, st) in traj.iter() {
            let exact = sho_closed_form(omega, &init, t).unwrap();
            let num = [st.alpha, st.beta, st.gamma, st.delta, st.epsilon];
            for i in 0..5 {
                assert!((exact[i] - num[i]).abs() < 1e-9, "t = {t}, component {i}");
            }
        }
        let std = sho_closed_form(2.0, &standard_initial(2.0).unwrap(), 0.75).unwrap();
        assert!((std[1] - 2f64.sqrt()).abs() < 1e-15 && (std[2] + 0.75).abs() < 1e-15);
    }

    #[test]
    fn trajectory_csv_header() {
        let traj = integrate(
            &sho(),
            &standard_initial(1.0).unwrap(),
            &[0.0, 0.5],
            Method::Rk4 { substeps: 2 },
        )
        .unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,alpha,beta,gamma,delta,epsilon,kappa");
        assert_eq!(lines.count(), 2);
    }
}
