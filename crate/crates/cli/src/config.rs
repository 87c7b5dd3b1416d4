//! Scenario files: parsing, command-line overrides and validation.
//!
//! A scenario is a TOML document with the sections `[hamiltonian]`,
//! `[initial]`, `[time]`, `[photons]`, `[fock]`, `[integrator]`, `[oracle]`
//! and `[tolerances]`. See the repository README for the grammar.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use squeezevo::ermakov::{standard_initial, traditional_squeeze_initial, uniform_grid, ErmakovState, Method};
use squeezevo::hamiltonian::{CoefficientTable, HamiltonianSpec, Interpolation};
use squeezevo::{Complex64, ErmakovState64, HamiltonianSpec64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// One finding about a scenario, tied to a dotted field path.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(field: &str, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn warning(field: &str, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}: {}", self.field, self.message)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScenario {
    pub name: Option<String>,
    pub hamiltonian: Option<RawHamiltonian>,
    pub initial: Option<RawInitial>,
    pub time: Option<RawTime>,
    pub photons: Option<RawPhotons>,
    pub fock: Option<RawFock>,
    pub integrator: Option<RawIntegrator>,
    pub oracle: Option<RawOracle>,
    pub tolerances: Option<RawTolerances>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawHamiltonian {
    pub kind: Option<String>,
    pub omega: Option<f64>,
    pub lambda: Option<f64>,
    pub table: Option<PathBuf>,
    pub interpolation: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawInitial {
    pub preset: Option<String>,
    pub beta0: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub kappa: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTime {
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub samples: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPhotons {
    pub n: Option<Vec<usize>>,
    /// `[[re, im], …]` over `|0⟩, |1⟩, …`.
    pub superposition: Option<Vec<[f64; 2]>>,
    pub renormalize: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFock {
    pub truncation: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawIntegrator {
    pub method: Option<String>,
    pub tol: Option<f64>,
    pub substeps: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOracle {
    pub enabled: Option<bool>,
    pub dim: Option<usize>,
    pub tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTolerances {
    pub ermakov_residual: Option<f64>,
    pub consistency: Option<f64>,
    pub deficit: Option<f64>,
    pub dpa_closed_form: Option<f64>,
    pub oracle_amplitude: Option<f64>,
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub oracle: bool,
    pub method: Option<String>,
    pub tol: Option<f64>,
    pub truncation: Option<usize>,
}

/// Thresholds deciding the run's exit status.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub ermakov_residual: f64,
    pub consistency: f64,
    pub deficit: f64,
    pub dpa_closed_form: f64,
    pub oracle_amplitude: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ermakov_residual: 1e-5,
            consistency: 1e-10,
            deficit: 1e-6,
            dpa_closed_form: 1e-8,
            oracle_amplitude: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleConfig {
    pub dim: usize,
    pub tol: f64,
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub spec: HamiltonianSpec64,
    pub initial: ErmakovState64,
    pub grid: Vec<f64>,
    pub numbers: Vec<usize>,
    pub superposition: Option<Vec<Complex64>>,
    pub renormalize: bool,
    pub truncation: usize,
    pub method: Method<f64>,
    pub oracle: Option<OracleConfig>,
    pub tolerances: Tolerances,
}

impl Scenario {
    /// Largest input photon number, counting superposition components.
    pub fn max_input(&self) -> usize {
        let sup = self.superposition.as_ref().map_or(0, |c| c.len().saturating_sub(1));
        self.numbers.iter().copied().max().unwrap_or(0).max(sup)
    }

    pub fn method_name(&self) -> &'static str {
        match self.method {
            Method::Rk4 { .. } => "rk4",
            Method::Adaptive { .. } => "adaptive",
        }
    }
}

const DEFAULT_TOL: f64 = 1e-10;
const DEFAULT_SUBSTEPS: usize = 10;

/// Parses TOML text; syntax and type errors carry line and column.
pub fn parse(text: &str) -> Result<RawScenario, Vec<Diagnostic>> {
    toml::from_str(text).map_err(|e| {
        let at = e
            .span()
            .map(|s| {
                let before = &text[..s.start.min(text.len())];
                let line = before.matches('\n').count() + 1;
                let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                format!("line {line}, column {col}")
            })
            .unwrap_or_else(|| "scenario".into());
        vec![Diagnostic::error(&at, e.message().to_string())]
    })
}

/// Reads, parses and validates a scenario file. Relative table paths resolve
/// against the file's directory.
pub fn load(path: &Path, overrides: &Overrides) -> Result<(Scenario, Vec<Diagnostic>), Vec<Diagnostic>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| vec![Diagnostic::error(&path.display().to_string(), e.to_string())])?;
    let raw = parse(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let default_name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    build(raw, overrides, base, default_name)
}

fn required<T: Copy>(v: Option<T>, field: &str, diags: &mut Vec<Diagnostic>) -> Option<T> {
    if v.is_none() {
        diags.push(Diagnostic::error(field, "missing required field"));
    }
    v
}

fn positive(v: Option<f64>, field: &str, diags: &mut Vec<Diagnostic>) -> Option<f64> {
    match v {
        Some(x) if x > 0.0 && x.is_finite() => Some(x),
        Some(x) => {
            diags.push(Diagnostic::error(field, format!("must be positive and finite, got {x}")));
            None
        }
        None => None,
    }
}

fn hamiltonian(raw: &RawHamiltonian, base: &Path, diags: &mut Vec<Diagnostic>) -> Option<HamiltonianSpec64> {
    let omega = positive(required(raw.omega, "hamiltonian.omega", diags), "hamiltonian.omega", diags);
    let kind = raw.kind.as_deref().unwrap_or("sho");
    let omega = omega?;
    let spec = match kind {
        "sho" => HamiltonianSpec::sho(omega),
        "dpa" => {
            let lambda = required(raw.lambda, "hamiltonian.lambda", diags)?;
            HamiltonianSpec::dpa(omega, lambda)
        }
        "custom" => {
            let Some(table) = &raw.table else {
                diags.push(Diagnostic::error("hamiltonian.table", "missing required field for kind = \"custom\""));
                return None;
            };
            let interpolation = match raw.interpolation.as_deref().unwrap_or("cubic") {
                "cubic" => Interpolation::MonotoneCubic,
                "linear" => Interpolation::Linear,
                other => {
                    diags.push(Diagnostic::error(
                        "hamiltonian.interpolation",
                        format!("expected \"cubic\" or \"linear\", got {other:?}"),
                    ));
                    return None;
                }
            };
            CoefficientTable::from_csv_path(base.join(table), interpolation)
                .and_then(|t| HamiltonianSpec::custom(omega, t))
        }
        other => {
            diags.push(Diagnostic::error(
                "hamiltonian.kind",
                format!("expected \"sho\", \"dpa\" or \"custom\", got {other:?}"),
            ));
            return None;
        }
    };
    match spec {
        Ok(s) => {
            if let Some(d) = s.hermiticity_warning(1e-12) {
                diags.push(Diagnostic::warning(
                    "hamiltonian.table",
                    format!("non-hermitian coefficients, |d - c/2| up to {d:e}; the oracle will reject them"),
                ));
            }
            Some(s)
        }
        Err(e) => {
            diags.push(Diagnostic::error("hamiltonian", e.to_string()));
            None
        }
    }
}

/// Splits `traditional-squeeze(1.5)` into the preset name and its argument.
fn preset_parts(preset: &str) -> (&str, Option<&str>) {
    match preset.split_once('(') {
        Some((name, rest)) => (name.trim(), rest.strip_suffix(')').map(str::trim)),
        None => (preset.trim(), None),
    }
}

fn initial(raw: &RawInitial, omega: f64, diags: &mut Vec<Diagnostic>) -> Option<ErmakovState64> {
    let preset = raw.preset.as_deref().unwrap_or("standard");
    let (name, arg) = preset_parts(preset);
    let state = match name {
        "standard" => standard_initial(omega),
        "traditional-squeeze" => {
            let beta0 = match arg {
                Some(a) => match a.parse::<f64>() {
                    Ok(x) => Some(x),
                    Err(_) => {
                        diags.push(Diagnostic::error("initial.preset", format!("cannot parse β₀ from {a:?}")));
                        return None;
                    }
                },
                None => raw.beta0,
            };
            let beta0 = required(beta0, "initial.beta0", diags)?;
            traditional_squeeze_initial(omega, beta0)
        }
        "explicit" => {
            let beta = required(raw.beta, "initial.beta", diags)?;
            let z = |v: Option<f64>| v.unwrap_or(0.0);
            ErmakovState::new(z(raw.alpha), beta, z(raw.gamma), z(raw.delta), z(raw.epsilon), z(raw.kappa))
        }
        other => {
            diags.push(Diagnostic::error(
                "initial.preset",
                format!("expected \"standard\", \"traditional-squeeze\" or \"explicit\", got {other:?}"),
            ));
            return None;
        }
    };
    state.map_err(|e| diags.push(Diagnostic::error("initial", e.to_string()))).ok()
}

fn grid(raw: &RawTime, diags: &mut Vec<Diagnostic>) -> Option<Vec<f64>> {
    let start = raw.start.unwrap_or(0.0);
    let stop = required(raw.stop, "time.stop", diags);
    let samples = required(raw.samples, "time.samples", diags);
    let (stop, samples) = (stop?, samples?);
    if samples < 2 {
        diags.push(Diagnostic::error("time.samples", format!("need at least 2 samples, got {samples}")));
        return None;
    }
    if !start.is_finite() || !stop.is_finite() || stop <= start {
        diags.push(Diagnostic::error("time.stop", format!("must exceed time.start = {start}")));
        return None;
    }
    Some(uniform_grid(start, stop, samples))
}

fn method(raw: &RawIntegrator, overrides: &Overrides, diags: &mut Vec<Diagnostic>) -> Option<Method<f64>> {
    let name = overrides
        .method
        .as_deref()
        .or(raw.method.as_deref())
        .unwrap_or("rk4");
    match name {
        "rk4" => {
            let substeps = raw.substeps.unwrap_or(DEFAULT_SUBSTEPS);
            if substeps == 0 {
                diags.push(Diagnostic::error("integrator.substeps", "must be at least 1"));
                return None;
            }
            Some(Method::Rk4 { substeps })
        }
        "adaptive" => {
            let tol = positive(Some(overrides.tol.or(raw.tol).unwrap_or(DEFAULT_TOL)), "integrator.tol", diags)?;
            Some(Method::Adaptive { tol })
        }
        other => {
            diags.push(Diagnostic::error(
                "integrator.method",
                format!("expected \"rk4\" or \"adaptive\", got {other:?}"),
            ));
            None
        }
    }
}

fn tolerances(raw: Option<&RawTolerances>, diags: &mut Vec<Diagnostic>) -> Tolerances {
    let d = Tolerances::default();
    let Some(r) = raw else { return d };
    let mut pick = |v: Option<f64>, field: &str, default: f64| {
        positive(v, &format!("tolerances.{field}"), diags).unwrap_or(default)
    };
    Tolerances {
        ermakov_residual: pick(r.ermakov_residual, "ermakov_residual", d.ermakov_residual),
        consistency: pick(r.consistency, "consistency", d.consistency),
        deficit: pick(r.deficit, "deficit", d.deficit),
        dpa_closed_form: pick(r.dpa_closed_form, "dpa_closed_form", d.dpa_closed_form),
        oracle_amplitude: pick(r.oracle_amplitude, "oracle_amplitude", d.oracle_amplitude),
    }
}

/// Validates a parsed scenario. Returns the scenario with any warnings, or
/// every diagnostic found when at least one is an error.
pub fn build(
    raw: RawScenario,
    overrides: &Overrides,
    base: &Path,
    default_name: Option<String>,
) -> Result<(Scenario, Vec<Diagnostic>), Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let spec = match &raw.hamiltonian {
        Some(h) => hamiltonian(h, base, &mut diags),
        None => {
            diags.push(Diagnostic::error("hamiltonian.omega", "missing required field (no [hamiltonian] section)"));
            None
        }
    };
    let init = spec
        .as_ref()
        .and_then(|s| initial(raw.initial.as_ref().unwrap_or(&RawInitial::default()), s.omega(), &mut diags));
    let grid = match &raw.time {
        Some(t) => grid(t, &mut diags),
        None => {
            diags.push(Diagnostic::error("time", "missing required section"));
            None
        }
    };
    if let (Some(s), Some(g)) = (&spec, &grid) {
        if !s.covers(g[0], g[g.len() - 1]) {
            diags.push(Diagnostic::error("time", "grid extends beyond the coefficient table"));
        }
    }

    let photons = raw.photons.unwrap_or_default();
    let superposition: Option<Vec<Complex64>> = photons
        .superposition
        .map(|c| c.into_iter().map(|[re, im]| Complex64::new(re, im)).collect());
    let numbers = photons
        .n
        .unwrap_or_else(|| if superposition.is_some() { Vec::new() } else { vec![0] });
    if numbers.is_empty() && superposition.is_none() {
        diags.push(Diagnostic::error("photons.n", "no photon inputs"));
    }
    if let Some(c) = &superposition {
        let norm2: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        if c.is_empty() {
            diags.push(Diagnostic::error("photons.superposition", "empty coefficient list"));
        } else if (norm2 - 1.0).abs() > 1e-10 && !photons.renormalize.unwrap_or(false) {
            diags.push(Diagnostic::error(
                "photons.superposition",
                format!("squared norm is {norm2}, expected 1 (set photons.renormalize = true to rescale)"),
            ));
        }
    }

    let truncation = overrides
        .truncation
        .or(raw.fock.as_ref().and_then(|f| f.truncation));
    let truncation = required(truncation, "fock.truncation", &mut diags);
    let method = method(raw.integrator.as_ref().unwrap_or(&RawIntegrator::default()), overrides, &mut diags);

    let raw_oracle = raw.oracle.unwrap_or_default();
    let oracle_on = overrides.oracle || raw_oracle.enabled.unwrap_or(false);
    let tolerances = tolerances(raw.tolerances.as_ref(), &mut diags);

    let max_input = numbers
        .iter()
        .copied()
        .max()
        .unwrap_or(0)
        .max(superposition.as_ref().map_or(0, |c| c.len().saturating_sub(1)));
    let mut oracle = None;
    if let Some(m) = truncation {
        if m < max_input + 1 {
            diags.push(Diagnostic::error(
                "fock.truncation",
                format!("truncation below input photon number: M = {m} but inputs reach n = {max_input}; need M >= {}", max_input + 1),
            ));
        }
        if oracle_on {
            let dim = raw_oracle.dim.unwrap_or(2 * m.max(8));
            if dim < 2 * m {
                diags.push(Diagnostic::error(
                    "oracle.dim",
                    format!("oracle dimension {dim} is below 2M = {}; suggested oracle.dim = {}", 2 * m, 2 * m),
                ));
            } else if dim < squeezevo::fock_oracle::MIN_DIM {
                diags.push(Diagnostic::error(
                    "oracle.dim",
                    format!("oracle dimension {dim} is below {}", squeezevo::fock_oracle::MIN_DIM),
                ));
            }
            let tol = positive(Some(raw_oracle.tol.unwrap_or(DEFAULT_TOL)), "oracle.tol", &mut diags);
            if let Some(tol) = tol {
                oracle = Some(OracleConfig { dim, tol });
            }
        }
    }
    if oracle_on {
        if let Some(s) = &spec {
            if let Some(d) = s.hermiticity_warning(1e-12) {
                diags.push(Diagnostic::error(
                    "oracle.enabled",
                    format!("oracle requires a hermitian hamiltonian, |d - c/2| up to {d:e}"),
                ));
            }
        }
    }

    if diags.iter().any(Diagnostic::is_error) {
        return Err(diags);
    }
    let scenario = Scenario {
        name: raw.name.or(default_name).unwrap_or_else(|| "scenario".into()),
        spec: spec.unwrap(),
        initial: init.unwrap(),
        grid: grid.unwrap(),
        numbers,
        superposition,
        renormalize: photons.renormalize.unwrap_or(false),
        truncation: truncation.unwrap(),
        method: method.unwrap(),
        oracle,
        tolerances,
    };
    Ok((scenario, diags))
}
