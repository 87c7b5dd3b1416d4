//! The scenario pipeline: Ermakov integration, squeeze parameters,
//! amplitudes and moments per grid point, and optional oracle validation.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};
use squeezevo::amplitudes::{
    amplitudes_json, evolve_superposition, state_amplitudes, truncation_warning, write_amplitudes_csv,
    write_statistics_csv, AmplitudeVector,
};
use squeezevo::ermakov::{integrate, residual, uniform_grid, Method, Trajectory};
use squeezevo::export::fmt_num;
use squeezevo::fock_oracle::propagate_columns;
use squeezevo::hamiltonian::HamiltonianKind;
use squeezevo::heisenberg::{dpa_closed_form, heisenberg_a, number_state_moments, write_moments_csv, NumberStateMoments};
use squeezevo::matrix_elements::{displacement_matrix, oracle_defect_block, squeeze_matrix};
use squeezevo::squeeze_params::{consistency_residual, to_squeeze_parameters};
use squeezevo::{Complex64, Error, SqueezeParameters64};

use crate::config::Scenario;

/// Grid step of the verification trajectory behind the Ermakov residual.
pub const RESIDUAL_STEP: f64 = 1e-3;

/// Per-time-point results.
#[derive(Clone, Debug)]
pub struct Sample {
    pub t: f64,
    pub params: SqueezeParameters64,
    pub consistency: f64,
    pub vectors: Vec<AmplitudeVector<f64>>,
    pub moments: Vec<(usize, NumberStateMoments<f64>)>,
    /// Largest truncation the empirical rule asks for at this point, when the
    /// configured one falls short.
    pub recommended: Option<usize>,
}

/// One pass/fail comparison in the report.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
}

impl Check {
    pub fn pass(&self) -> bool {
        self.value <= self.limit
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OracleSummary {
    pub dim: usize,
    /// `max | |entry| − |oracle entry| |` over all vectors and `m ≤ M`.
    pub modulus_defect: f64,
    /// Same, for complex entries after removing one global phase per vector.
    pub phase_aligned_defect: f64,
    pub unitarity_defect: f64,
    pub edge_weight: f64,
    /// Closed-form squeeze and displacement matrices at the final time
    /// against matrix exponentials, on the `M/2 + 1` block.
    pub squeeze_matrix_defect: f64,
    pub displacement_matrix_defect: f64,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub trajectory: Trajectory<f64>,
    pub samples: Vec<Sample>,
    pub ermakov_residual: [f64; 6],
    pub dpa_closed_form_defect: Option<f64>,
    pub oracle: Option<OracleSummary>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl RunResult {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(Check::pass)
    }
}

/// Error with the scenario name attached.
#[derive(Debug)]
pub struct RunError {
    pub scenario: String,
    pub source: Error,
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "scenario {:?}: {}", self.scenario, self.source)
    }
}

impl std::error::Error for RunError {}

fn sample_at(sc: &Scenario, t: f64, st: &squeezevo::ErmakovState64) -> Result<Sample, Error> {
    let omega = sc.spec.omega();
    let m = sc.truncation;
    let params = to_squeeze_parameters(st, omega)?;
    let mut vectors = Vec::with_capacity(sc.numbers.len() + 1);
    let mut recommended: Option<usize> = None;
    for &n in &sc.numbers {
        vectors.push(state_amplitudes(&params, st.gamma, n, m)?.with_time(t));
        if let Some(r) = truncation_warning(&params, n, m) {
            recommended = Some(recommended.map_or(r, |x| x.max(r)));
        }
    }
    if let Some(c) = &sc.superposition {
        vectors.push(evolve_superposition(c, &params, st.gamma, m, sc.renormalize)?.with_time(t));
        if let Some(r) = truncation_warning(&params, c.len() - 1, m) {
            recommended = Some(recommended.map_or(r, |x| x.max(r)));
        }
    }
    let moments = sc
        .numbers
        .iter()
        .map(|&n| Ok((n, number_state_moments(st, omega, n)?)))
        .collect::<Result<_, Error>>()?;
    Ok(Sample {
        t,
        params,
        consistency: consistency_residual(&params, st, omega),
        vectors,
        moments,
        recommended,
    })
}

/// Largest `|x_m − e^{iχ} y_m|`, with `χ` taken from the largest entry of `y`.
pub fn phase_aligned_defect(x: &[Complex64], y: &[Complex64]) -> f64 {
    let Some(k) = (0..y.len()).max_by(|&i, &j| y[i].norm().total_cmp(&y[j].norm())) else {
        return 0.0;
    };
    let ratio = x[k] / y[k];
    let ph = if ratio.norm() > 0.0 { ratio / ratio.norm() } else { Complex64::new(1.0, 0.0) };
    x.iter().zip(y).map(|(a, b)| (a - ph * b).norm()).fold(0.0, f64::max)
}

fn oracle_summary(sc: &Scenario, samples: &[Sample], dim: usize, tol: f64) -> Result<OracleSummary, Error> {
    let m = sc.truncation;
    let ncols = sc.max_input() + 1;
    let cols: Vec<usize> = (0..ncols).collect();
    let prop = propagate_columns(&sc.spec, &sc.grid, dim, &cols, tol)?;
    let mut out = OracleSummary {
        dim,
        unitarity_defect: prop.unitarity_defect(),
        edge_weight: prop.edge_weight(),
        ..OracleSummary::default()
    };
    for (i, s) in samples.iter().enumerate() {
        let u = prop.at(i);
        let targets = sc
            .numbers
            .iter()
            .map(|&n| u.column(n).iter().take(m + 1).copied().collect::<Vec<_>>())
            .chain(sc.superposition.iter().map(|c| {
                let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                (0..=m)
                    .map(|r| c.iter().enumerate().map(|(n, z)| z * u[[r, n]]).sum::<Complex64>() / norm)
                    .collect()
            }));
        for (v, y) in s.vectors.iter().zip(targets) {
            for (a, b) in v.entries.iter().zip(&y) {
                out.modulus_defect = out.modulus_defect.max((a.norm() - b.norm()).abs());
            }
            out.phase_aligned_defect = out.phase_aligned_defect.max(phase_aligned_defect(&v.entries, &y));
        }
    }
    let last = samples.last().map(|s| s.params).unwrap_or(SqueezeParameters64::identity());
    let block = m / 2 + 1;
    out.squeeze_matrix_defect = oracle_defect_block(&squeeze_matrix(last.tau, last.phi, m), dim, block)?;
    out.displacement_matrix_defect = oracle_defect_block(&displacement_matrix(last.xi, m), dim, block)?;
    Ok(out)
}

/// Runs the full pipeline without touching the filesystem.
pub fn run(sc: &Scenario) -> Result<RunResult, RunError> {
    let wrap = |source| RunError {
        scenario: sc.name.clone(),
        source,
    };
    let omega = sc.spec.omega();
    let trajectory = integrate(&sc.spec, &sc.initial, &sc.grid, sc.method).map_err(wrap)?;
    // central differences need a fine grid, independent of the output grid
    let (t0, t1) = (sc.grid[0], sc.grid[sc.grid.len() - 1]);
    let fine = uniform_grid(t0, t1, (((t1 - t0) / RESIDUAL_STEP).ceil() as usize + 1).max(3));
    let fine_method = match sc.method {
        Method::Rk4 { .. } => Method::Rk4 { substeps: 1 },
        m => m,
    };
    let fine_traj = integrate(&sc.spec, &sc.initial, &fine, fine_method).map_err(wrap)?;
    let ermakov_residual = residual(&fine_traj, &sc.spec).map_err(wrap)?;
    // parallel over the grid; collect keeps the grid order
    let samples: Vec<Sample> = trajectory
        .times()
        .par_iter()
        .zip(trajectory.states().par_iter())
        .map(|(&t, st)| sample_at(sc, t, st))
        .collect::<Result<_, _>>()
        .map_err(wrap)?;

    let dpa_closed_form_defect = match sc.spec.kind() {
        HamiltonianKind::Dpa { lambda } => {
            let mut d = 0.0f64;
            for (t, st) in trajectory.iter() {
                let num = heisenberg_a(st, omega).map_err(wrap)?;
                let exact = dpa_closed_form(omega, *lambda, &sc.initial, t).map_err(wrap)?;
                d = d.max(num.max_diff(&exact));
            }
            Some(d)
        }
        _ => None,
    };
    let oracle = sc
        .oracle
        .map(|o| oracle_summary(sc, &samples, o.dim, o.tol))
        .transpose()
        .map_err(wrap)?;

    let tol = &sc.tolerances;
    let max_of = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, f64::max);
    let mut checks = vec![
        Check {
            name: "ermakov_residual",
            value: max_of(&mut ermakov_residual.iter().copied()),
            limit: tol.ermakov_residual,
        },
        Check {
            name: "consistency",
            value: max_of(&mut samples.iter().map(|s| s.consistency)),
            limit: tol.consistency,
        },
        Check {
            name: "deficit",
            value: max_of(&mut samples.iter().flat_map(|s| s.vectors.iter().map(|v| v.deficit))),
            limit: tol.deficit,
        },
    ];
    if let Some(d) = dpa_closed_form_defect {
        checks.push(Check {
            name: "dpa_closed_form",
            value: d,
            limit: tol.dpa_closed_form,
        });
    }
    if let Some(o) = &oracle {
        checks.push(Check {
            name: "oracle_amplitude",
            value: o.modulus_defect.max(o.phase_aligned_defect),
            limit: tol.oracle_amplitude,
        });
    }

    let mut warnings = Vec::new();
    if let Some(r) = samples.iter().filter_map(|s| s.recommended).max() {
        warnings.push(format!(
            "truncation M = {} is below the empirical rule M >= 4(n + sinh^2 tau + |xi|^2); suggested M = {r}",
            sc.truncation
        ));
    }
    let flagged = samples
        .iter()
        .flat_map(|s| &s.vectors)
        .filter(|v| v.flagged)
        .count();
    if flagged > 0 {
        warnings.push(format!("{flagged} amplitude vectors have normalization deficit above 1e-6"));
    }
    Ok(RunResult {
        trajectory,
        samples,
        ermakov_residual,
        dpa_closed_form_defect,
        oracle,
        checks,
        warnings,
    })
}

fn write_squeeze_params<W: Write>(mut w: W, samples: &[Sample]) -> std::io::Result<()> {
    writeln!(w, "t,theta,tau,phi,xi_re,xi_im")?;
    for s in samples {
        let p = &s.params;
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_num(s.t),
            fmt_num(p.theta),
            fmt_num(p.tau),
            fmt_num(p.phi),
            fmt_num(p.xi.re),
            fmt_num(p.xi.im)
        )?;
    }
    Ok(())
}

/// The `report.json` document.
pub fn report_json(sc: &Scenario, r: &RunResult) -> Value {
    let names = ["alpha", "beta", "gamma", "delta", "epsilon", "kappa"];
    let ermakov: serde_json::Map<String, Value> = names
        .iter()
        .zip(r.ermakov_residual)
        .map(|(n, v)| (n.to_string(), json!(v)))
        .collect();
    let max_deficit = r
        .samples
        .iter()
        .flat_map(|s| s.vectors.iter().map(|v| v.deficit))
        .fold(0.0f64, f64::max);
    let flagged = r.samples.iter().flat_map(|s| &s.vectors).filter(|v| v.flagged).count();
    let oracle = r.oracle.as_ref().map(|o| {
        json!({
            "dim": o.dim,
            "amplitude_modulus_defect": o.modulus_defect,
            "amplitude_phase_aligned_defect": o.phase_aligned_defect,
            "unitarity_defect": o.unitarity_defect,
            "edge_weight": o.edge_weight,
            "squeeze_matrix_defect": o.squeeze_matrix_defect,
            "displacement_matrix_defect": o.displacement_matrix_defect,
        })
    });
    let stats = r.trajectory.stats();
    json!({
        "scenario": sc.name,
        "method": sc.method_name(),
        "samples": sc.grid.len(),
        "truncation": sc.truncation,
        "residual_grid_step": RESIDUAL_STEP,
        "integrator": {
            "accepted_steps": stats.accepted,
            "rejected_steps": stats.rejected,
        },
        "residuals": {
            "ermakov": ermakov,
            "consistency": r.samples.iter().map(|s| s.consistency).fold(0.0f64, f64::max),
            "normalization_deficit": max_deficit,
            "flagged_vectors": flagged,
            "dpa_closed_form": r.dpa_closed_form_defect,
            "oracle": oracle,
        },
        "checks": r.checks.iter().map(|c| json!({
            "name": c.name,
            "value": c.value,
            "limit": c.limit,
            "pass": c.pass(),
        })).collect::<Vec<_>>(),
        "warnings": r.warnings,
        "pass": r.pass(),
    })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Error> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Writes every output file into `out_dir`, creating it if needed.
pub fn write_outputs(sc: &Scenario, r: &RunResult, out_dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(out_dir)?;
    r.trajectory.write_csv(create(out_dir, "trajectory.csv")?)?;
    write_squeeze_params(create(out_dir, "squeeze_params.csv")?, &r.samples)?;
    let vectors = || r.samples.iter().flat_map(|s| s.vectors.iter());
    write_statistics_csv(create(out_dir, "statistics.csv")?, vectors())?;
    write_amplitudes_csv(create(out_dir, "amplitudes.csv")?, vectors())?;
    write_moments_csv(
        create(out_dir, "moments.csv")?,
        r.samples.iter().flat_map(|s| s.moments.iter().map(move |(n, m)| (s.t, *n, *m))),
    )?;
    let mut w = create(out_dir, "amplitudes.json")?;
    writeln!(w, "{}", serde_json::to_string(&amplitudes_json(vectors()))
        .map_err(|e| Error::Io(e.to_string()))?)?;
    let mut w = create(out_dir, "report.json")?;
    writeln!(w, "{}", serde_json::to_string_pretty(&report_json(sc, r)).map_err(|e| Error::Io(e.to_string()))?)?;
    w.flush()?;
    Ok(())
}

/// Whether the scenario uses the reproducible fixed-step integrator.
pub fn is_fixed_step(sc: &Scenario) -> bool {
    matches!(sc.method, Method::Rk4 { .. })
}
