//! Scenario files: TOML schema, parsing and validation into a [`Plan`].

use std::f64::consts::PI;
use std::fmt;

use cavmirror::analysis::GridSpec;
use cavmirror::catalog::CatSpec;
use cavmirror::evolution::{MultimodeConfig, MultimodeTruncation};
use cavmirror::fock::{coherent_dim, poisson_tail};
use cavmirror::{coupling_from_physical, PhysicalParams, ScaledParams, Truncation, C64};
use serde::Deserialize;

pub const SCHEMA_VERSION: u32 = 1;
/// Poisson tail allowed by the automatic truncation rule.
pub const DEFAULT_TAIL: f64 = 1e-12;
/// Truncation loss tolerated before a run fails.
pub const DEFAULT_LOSS_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Evolve,
    Damped,
    MeasureMirror,
    MeasureField,
    Multimode,
    Wigner,
    Entropy,
    Density,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Evolve => "evolve",
            Mode::Damped => "damped",
            Mode::MeasureMirror => "measure-mirror",
            Mode::MeasureField => "measure-field",
            Mode::Multimode => "multimode",
            Mode::Wigner => "wigner",
            Mode::Entropy => "entropy",
            Mode::Density => "density",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subsystem {
    #[default]
    Field,
    Mirror,
    Joint,
}

/// A complex amplitude written either as a number or as `[re, im]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Real(f64),
    Pair([f64; 2]),
}

impl Amplitude {
    pub fn value(self) -> C64 {
        match self {
            Amplitude::Real(re) => C64::new(re, 0.0),
            Amplitude::Pair([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    pub mode: Mode,
    #[serde(default)]
    pub subsystem: Option<Subsystem>,
    #[serde(default)]
    pub params: Option<ParamsSection>,
    #[serde(default)]
    pub physical: Option<PhysicalSection>,
    #[serde(default)]
    pub times: Option<TimesSection>,
    #[serde(default)]
    pub truncation: Option<TruncationSection>,
    #[serde(default)]
    pub grid: Option<GridSection>,
    #[serde(default)]
    pub measurement: Option<MeasurementSection>,
    #[serde(default)]
    pub multimode: Option<MultimodeSection>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub compare: Option<CompareSection>,
    #[serde(default)]
    pub oracle: Option<OracleSection>,
    #[serde(default)]
    pub decoherence: Option<DecoherenceSection>,
    #[serde(default)]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub k: Option<f64>,
    pub alpha: Option<Amplitude>,
    pub beta: Option<Amplitude>,
    pub gamma: Option<f64>,
    pub r: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSection {
    pub omega_0: f64,
    pub omega_m: f64,
    pub length: f64,
    pub mass: f64,
    /// Absolute mirror damping rate in s⁻¹; sets `gamma = Γ / ω_m`.
    pub gamma_absolute: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeUnit {
    #[default]
    Scaled,
    Pi,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub unit: TimeUnit,
    #[serde(default = "yes")]
    pub endpoint: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimesSection {
    #[serde(default)]
    pub values: Vec<f64>,
    #[serde(default)]
    pub over_pi: Vec<f64>,
    pub grid: Option<TimeGrid>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSection {
    pub field: Option<usize>,
    pub mirror: Option<usize>,
    /// Poisson tail for automatically chosen dimensions.
    pub tail: Option<f64>,
    /// Largest accepted truncation loss.
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub half_width: Option<f64>,
    pub points: Option<usize>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub y_min: Option<f64>,
    pub y_max: Option<f64>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub auto_widen: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSection {
    #[serde(default)]
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultimodeSection {
    pub etas: Vec<u32>,
    pub alphas: Vec<Amplitude>,
    pub k1: Option<f64>,
    pub p: Option<u32>,
    pub dims: Option<Vec<usize>>,
    pub mirror: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub k: Vec<f64>,
    #[serde(default)]
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CatName {
    Even,
    Odd,
    KerrTwo,
    KerrThree,
    KerrThreeAsPrinted,
    KerrFour,
    Zeta,
}

impl CatName {
    pub fn as_str(self) -> &'static str {
        match self {
            CatName::Even => "even",
            CatName::Odd => "odd",
            CatName::KerrTwo => "kerr-two",
            CatName::KerrThree => "kerr-three",
            CatName::KerrThreeAsPrinted => "kerr-three-as-printed",
            CatName::KerrFour => "kerr-four",
            CatName::Zeta => "zeta",
        }
    }

    /// Superposition spec, or `None` for the ζ state.
    pub fn spec(self, alpha: C64) -> Option<CatSpec> {
        match self {
            CatName::Even => Some(CatSpec::even(alpha)),
            CatName::Odd => Some(CatSpec::odd(alpha)),
            CatName::KerrTwo => Some(CatSpec::kerr_two(alpha)),
            CatName::KerrThree => Some(CatSpec::kerr_three(alpha)),
            CatName::KerrThreeAsPrinted => Some(CatSpec::kerr_three_as_printed(alpha)),
            CatName::KerrFour => Some(CatSpec::kerr_four(alpha)),
            CatName::Zeta => None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    pub cat: OneOrMany<CatName>,
}

/// A single value or a list of them.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    /// Direct integration of the Schrödinger or Lindblad equation.
    #[default]
    Integrate,
    /// Dense matrix exponential against the factorized propagator.
    Propagator,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default)]
    pub kind: OracleKind,
    pub atol: Option<f64>,
    pub rtol: Option<f64>,
    /// Extra mirror levels for the dense exponential.
    pub pad: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoherenceSection {
    /// Largest photon number in the `D(n, m)` table.
    pub n_max: Option<usize>,
    /// Cross-check every entry against direct quadrature.
    #[serde(default)]
    pub quadrature: bool,
    /// RK4 steps for the quadrature.
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
    pub prefix: Option<String>,
    pub states: Option<bool>,
    pub wigner: Option<bool>,
    pub number: Option<bool>,
}

/// A validation problem tied to a scenario field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioError {
    /// TOML syntax or schema error, already carrying line/column context.
    Parse(String),
    Invalid(Vec<FieldError>),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Parse(msg) => write!(f, "{}", msg.trim_end()),
            ScenarioError::Invalid(errors) => {
                let lines: Vec<String> = errors.iter().map(|e| e.to_string()).collect();
                write!(f, "{}", lines.join("\n"))
            }
        }
    }
}

impl std::error::Error for ScenarioError {}

/// One parameter set of a sweep, with its truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    /// File-name fragment naming the swept values; empty without a sweep.
    pub label: String,
    pub params: ScaledParams,
    pub trunc: Truncation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSettings {
    pub kind: OracleKind,
    pub atol: f64,
    pub rtol: f64,
    pub pad: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub dir: String,
    pub prefix: String,
    pub states: bool,
    pub wigner: bool,
    pub number: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultimodePlan {
    pub config: MultimodeConfig,
    pub beta: C64,
    pub trunc: MultimodeTruncation,
}

/// A validated scenario, ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub name: String,
    pub description: Option<String>,
    pub mode: Mode,
    pub subsystem: Subsystem,
    pub cases: Vec<Case>,
    pub times: Vec<f64>,
    pub xs: Vec<f64>,
    pub grid: GridSpec,
    pub auto_widen: bool,
    pub multimode: Option<MultimodePlan>,
    pub compare: Vec<CatName>,
    pub oracle: Option<OracleSettings>,
    pub decoherence_n_max: usize,
    pub decoherence_quadrature: bool,
    pub decoherence_steps: usize,
    pub physical: Option<(PhysicalParams, Option<f64>)>,
    pub outputs: Outputs,
    pub warnings: Vec<String>,
}

pub fn parse(text: &str) -> Result<ScenarioFile, ScenarioError> {
    toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
}

pub fn load(text: &str) -> Result<Plan, ScenarioError> {
    validate(&parse(text)?)
}

struct Errors(Vec<FieldError>);

impl Errors {
    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.0.push(FieldError { field: field.into(), message: message.into() });
    }

    fn check(&mut self, ok: bool, field: &str, message: impl FnOnce() -> String) {
        if !ok {
            self.push(field, message());
        }
    }
}

fn finite_nonneg(v: f64) -> bool {
    v.is_finite() && v >= 0.0
}

fn times(section: &TimesSection, errors: &mut Errors) -> Vec<f64> {
    let mut out = section.values.clone();
    out.extend(section.over_pi.iter().map(|v| v * PI));
    if let Some(g) = &section.grid {
        let unit = if g.unit == TimeUnit::Pi { PI } else { 1.0 };
        if g.points < 2 || !(g.stop > g.start) {
            errors.push("times.grid", "need points >= 2 and stop > start");
        } else {
            let intervals = if g.endpoint { g.points - 1 } else { g.points } as f64;
            let step = (g.stop - g.start) / intervals;
            out.extend((0..g.points).map(|j| (g.start + j as f64 * step) * unit));
        }
    }
    for (i, t) in out.iter().enumerate() {
        if !finite_nonneg(*t) {
            errors.push(format!("times[{i}]"), format!("must be finite and >= 0, got {t}"));
        }
    }
    out
}

fn grid(section: Option<&GridSection>, errors: &mut Errors) -> (GridSpec, bool) {
    let mut spec = GridSpec::default();
    let Some(g) = section else { return (spec, true) };
    if let Some(h) = g.half_width {
        spec = GridSpec { x_min: -h, x_max: h, y_min: -h, y_max: h, ..spec };
    }
    if let Some(n) = g.points {
        spec.nx = n;
        spec.ny = n;
    }
    spec.x_min = g.x_min.unwrap_or(spec.x_min);
    spec.x_max = g.x_max.unwrap_or(spec.x_max);
    spec.y_min = g.y_min.unwrap_or(spec.y_min);
    spec.y_max = g.y_max.unwrap_or(spec.y_max);
    spec.nx = g.nx.unwrap_or(spec.nx);
    spec.ny = g.ny.unwrap_or(spec.ny);
    if let Err(e) = spec.validate() {
        errors.push("grid", e.to_string());
    }
    (spec, g.auto_widen.unwrap_or(true))
}

fn uses_mirror_dim(mode: Mode, subsystem: Subsystem, oracle: bool) -> bool {
    match mode {
        Mode::Evolve | Mode::MeasureField => true,
        Mode::Damped => oracle,
        Mode::Wigner | Mode::Density => subsystem != Subsystem::Field,
        Mode::MeasureMirror | Mode::Entropy | Mode::Multimode => false,
    }
}

fn truncation_for(
    params: &ScaledParams,
    section: &TruncationSection,
    mode: Mode,
    subsystem: Subsystem,
    oracle: bool,
    errors: &mut Errors,
) -> Truncation {
    let tail = section.tail.unwrap_or(DEFAULT_TAIL);
    let tolerance = section.tolerance.unwrap_or(DEFAULT_LOSS_TOLERANCE);
    let auto = Truncation::for_coherent_dynamics(params.k, params.alpha, params.beta, tail);
    let field = section.field.unwrap_or(auto.field);
    let mirror = section.mirror.unwrap_or(auto.mirror);
    if section.field.is_some() {
        let lost = poisson_tail(params.alpha.norm_sqr(), field);
        if lost > tolerance {
            errors.push(
                "truncation.field",
                format!(
                    "field mode needs dim >= {} for |alpha| = {} (loss {lost:.3e} > tolerance {tolerance:.1e} at dim {field})",
                    coherent_dim(params.alpha.norm(), tolerance),
                    params.alpha.norm()
                ),
            );
        }
    }
    if section.mirror.is_some() && uses_mirror_dim(mode, subsystem, oracle) {
        let needed = Truncation::for_coherent_dynamics(params.k, params.alpha, params.beta, tolerance).mirror;
        if mirror < needed {
            errors.push(
                "truncation.mirror",
                format!("mirror mode needs dim >= {needed} (tolerance {tolerance:.1e}); got {mirror}"),
            );
        }
    }
    Truncation { field, mirror, tolerance }
}

fn fmt_label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.replace('-', "m")
}

pub fn validate(file: &ScenarioFile) -> Result<Plan, ScenarioError> {
    let mut errors = Errors(Vec::new());
    let mut warnings = Vec::new();
    let mode = file.mode;
    errors.check(file.schema_version == SCHEMA_VERSION, "schema_version", || {
        format!("unsupported version {} (this build reads {SCHEMA_VERSION})", file.schema_version)
    });
    errors.check(
        !file.name.is_empty() && file.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_'),
        "name",
        || "must be non-empty and use only ASCII letters, digits, '-' and '_'".into(),
    );

    let subsystem = file.subsystem.unwrap_or_default();
    match mode {
        Mode::Wigner => errors.check(subsystem != Subsystem::Joint, "subsystem", || {
            "Wigner functions need a single mode: use \"field\" or \"mirror\"".into()
        }),
        Mode::Density => {}
        _ if file.subsystem.is_some() => warnings.push(format!("subsystem is ignored in mode {}", mode.as_str())),
        _ => {}
    }

    // parameters
    let empty = ParamsSection::default();
    let ps = file.params.as_ref().unwrap_or(&empty);
    let mut physical = None;
    let (mut k, mut r) = (ps.k, ps.r.unwrap_or(0.0));
    let mut gamma = ps.gamma;
    if let Some(ph) = &file.physical {
        match PhysicalParams::new(ph.omega_0, ph.omega_m, ph.length, ph.mass).and_then(|p| {
            let c = coupling_from_physical(&p)?;
            Ok((p, c))
        }) {
            Ok((p, c)) => {
                if ps.k.is_some() {
                    errors.push("params.k", "conflicts with [physical], which sets k");
                }
                if ps.r.is_some() {
                    errors.push("params.r", "conflicts with [physical], which sets r");
                }
                k = Some(c.k);
                r = c.r;
                if let Some(g) = ph.gamma_absolute {
                    if ps.gamma.is_some() {
                        errors.push("params.gamma", "conflicts with physical.gamma_absolute");
                    }
                    errors.check(finite_nonneg(g), "physical.gamma_absolute", || format!("must be finite and >= 0, got {g}"));
                    gamma = Some(g / p.omega_m);
                }
                physical = Some((p, ph.gamma_absolute));
            }
            Err(e) => errors.push("physical", e.to_string()),
        }
    }
    let sweep = file.sweep.clone().unwrap_or_default();
    let needs_k = mode != Mode::Multimode;
    if needs_k && k.is_none() && sweep.k.is_empty() {
        errors.push("params.k", "missing (required unless [physical] or sweep.k is given)");
    }
    if needs_k && ps.alpha.is_none() {
        errors.push("params.alpha", "missing");
    }
    if let Some(g) = gamma {
        errors.check(finite_nonneg(g), "params.gamma", || format!("must be finite and >= 0, got {g}"));
    }
    for (i, &v) in sweep.k.iter().enumerate() {
        errors.check(finite_nonneg(v), &format!("sweep.k[{i}]"), || format!("must be finite and >= 0, got {v}"));
    }
    for (i, &v) in sweep.gamma.iter().enumerate() {
        errors.check(finite_nonneg(v), &format!("sweep.gamma[{i}]"), || format!("must be finite and >= 0, got {v}"));
    }

    let ks: Vec<Option<f64>> = if sweep.k.is_empty() { vec![k] } else { sweep.k.iter().map(|&v| Some(v)).collect() };
    let gammas: Vec<Option<f64>> =
        if sweep.gamma.is_empty() { vec![gamma] } else { sweep.gamma.iter().map(|&v| Some(v)).collect() };
    let alpha = ps.alpha.map(Amplitude::value).unwrap_or_default();
    let beta = ps.beta.map(Amplitude::value).unwrap_or_default();

    // times
    let time_list = match &file.times {
        Some(section) => times(section, &mut errors),
        None => Vec::new(),
    };
    let needs_times = !matches!(mode, Mode::Multimode) || file.times.is_some();
    if needs_times && time_list.is_empty() {
        errors.push("times", "missing: give values, over_pi or grid");
    }

    // oracle
    let oracle = file.oracle.as_ref().filter(|o| o.enabled).map(|o| OracleSettings {
        kind: o.kind,
        atol: o.atol.unwrap_or(1e-12),
        rtol: o.rtol.unwrap_or(1e-10),
        pad: o.pad.unwrap_or(60),
    });
    if let Some(o) = &oracle {
        let ok = match o.kind {
            OracleKind::Integrate => matches!(mode, Mode::Evolve | Mode::Damped),
            OracleKind::Propagator => mode == Mode::Evolve,
        };
        errors.check(ok, "oracle.kind", || format!("{:?} oracle is not available in mode {}", o.kind, mode.as_str()));
        errors.check(o.atol > 0.0 && o.rtol > 0.0, "oracle", || "atol and rtol must be > 0".into());
    }

    // cases
    let trunc_section = file.truncation.clone().unwrap_or_default();
    if let Some(t) = trunc_section.tail {
        errors.check(t > 0.0 && t < 1.0, "truncation.tail", || format!("must lie in (0, 1), got {t}"));
    }
    if let Some(t) = trunc_section.tolerance {
        errors.check(finite_nonneg(t), "truncation.tolerance", || format!("must be finite and >= 0, got {t}"));
    }
    for (name, v) in [("truncation.field", trunc_section.field), ("truncation.mirror", trunc_section.mirror)] {
        if v == Some(0) {
            errors.push(name, "must be >= 1");
        }
    }
    let mut cases = Vec::new();
    if needs_k && errors.0.is_empty() {
        for &kv in &ks {
            for &gv in &gammas {
                let kv = kv.unwrap_or(0.0);
                let gv = gv.unwrap_or(0.0);
                let params = match ScaledParams::new(kv, alpha, beta)
                    .and_then(|p| p.with_gamma(gv))
                    .and_then(|p| p.with_r(r))
                {
                    Ok(p) => p,
                    Err(e) => {
                        errors.push("params", e.to_string());
                        continue;
                    }
                };
                let mut label = Vec::new();
                if sweep.k.len() > 0 {
                    label.push(format!("k{}", fmt_label(kv)));
                }
                if sweep.gamma.len() > 0 {
                    label.push(format!("g{}", fmt_label(gv)));
                }
                let trunc = truncation_for(
                    &params,
                    &trunc_section,
                    mode,
                    subsystem,
                    oracle.is_some(),
                    &mut errors,
                );
                cases.push(Case { label: label.join("_"), params, trunc });
            }
        }
    }

    // mode-specific requirements
    let damped = cases.iter().any(|c| c.params.gamma > 0.0);
    let beta_zero = beta == C64::new(0.0, 0.0);
    match mode {
        Mode::Evolve => errors.check(!damped, "params.gamma", || "evolve is undamped; use mode = \"damped\"".into()),
        Mode::Damped => {
            errors.check(beta_zero, "params.beta", || "the damped closed form needs the mirror in vacuum (beta = 0)".into())
        }
        Mode::Entropy | Mode::MeasureField | Mode::Wigner | Mode::Density if damped => {
            errors.check(beta_zero, "params.beta", || "with gamma > 0 the closed form needs beta = 0".into())
        }
        _ => {}
    }
    if mode == Mode::MeasureMirror {
        errors.check(!damped, "params.gamma", || "measure-mirror uses the undamped closed form".into());
    }

    let xs = if !sweep.x.is_empty() {
        sweep.x.clone()
    } else {
        file.measurement.as_ref().map(|m| m.x.clone()).unwrap_or_default()
    };
    let measuring = matches!(mode, Mode::MeasureMirror | Mode::MeasureField);
    if measuring && xs.is_empty() {
        errors.push("measurement.x", "missing: list at least one outcome");
    }
    for (i, x) in xs.iter().enumerate() {
        errors.check(x.is_finite(), &format!("measurement.x[{i}]"), || "must be finite".into());
    }
    if !measuring && !xs.is_empty() {
        warnings.push(format!("measurement outcomes are ignored in mode {}", mode.as_str()));
    }

    let multimode = if mode == Mode::Multimode {
        match &file.multimode {
            None => {
                errors.push("multimode", "missing section");
                None
            }
            Some(m) => multimode_plan(m, beta, &trunc_section, &mut errors),
        }
    } else {
        if file.multimode.is_some() {
            warnings.push(format!("[multimode] is ignored in mode {}", mode.as_str()));
        }
        None
    };

    let compare = file.compare.as_ref().map(|c| c.cat.to_vec()).unwrap_or_default();
    if !compare.is_empty() {
        let ok = matches!(mode, Mode::Wigner | Mode::Density | Mode::Evolve) && subsystem == Subsystem::Field;
        errors.check(ok, "compare.cat", || "comparison needs a field state (modes evolve, wigner, density)".into());
    }

    let (grid, auto_widen) = grid(file.grid.as_ref(), &mut errors);
    let deco = file.decoherence.clone().unwrap_or_default();
    let out = file.output.clone().unwrap_or_default();
    let outputs = Outputs {
        dir: out.dir.unwrap_or_else(|| "out".into()),
        prefix: out.prefix.unwrap_or_else(|| file.name.clone()),
        states: out.states.unwrap_or(!matches!(mode, Mode::Wigner | Mode::Entropy)),
        wigner: out.wigner.unwrap_or(matches!(mode, Mode::Wigner | Mode::MeasureField)),
        number: out.number.unwrap_or(matches!(mode, Mode::MeasureMirror | Mode::Damped)),
    };
    let mirror_density = matches!(mode, Mode::Wigner | Mode::Density) && subsystem == Subsystem::Mirror;
    if damped && mirror_density && outputs.states {
        warnings.push("the damped mirror density file traces the full joint density; keep the truncation modest".into());
    }
    if mode == Mode::Entropy && (out.wigner == Some(true) || out.states == Some(true)) {
        warnings.push("entropy mode writes only (t, S) curves".into());
    }

    if !errors.0.is_empty() {
        return Err(ScenarioError::Invalid(errors.0));
    }
    Ok(Plan {
        name: file.name.clone(),
        description: file.description.clone(),
        mode,
        subsystem,
        cases,
        times: time_list,
        xs,
        grid,
        auto_widen,
        multimode,
        compare,
        oracle,
        decoherence_n_max: deco.n_max.unwrap_or(if mode == Mode::Damped && file.decoherence.is_some() { 6 } else { 0 }),
        decoherence_quadrature: deco.quadrature,
        decoherence_steps: deco.steps.unwrap_or(4000),
        physical,
        outputs,
        warnings,
    })
}

fn multimode_plan(
    m: &MultimodeSection,
    beta: C64,
    trunc: &TruncationSection,
    errors: &mut Errors,
) -> Option<MultimodePlan> {
    let alphas: Vec<C64> = m.alphas.iter().map(|a| a.value()).collect();
    let config = match (m.k1, m.p) {
        (Some(_), Some(_)) => {
            errors.push("multimode.k1", "give either k1 or p, not both");
            return None;
        }
        (None, None) => {
            errors.push("multimode.k1", "missing (or give p for the eigenstate coupling)");
            return None;
        }
        (Some(k1), None) => MultimodeConfig::new(m.etas.clone(), k1, alphas.clone()),
        (None, Some(p)) => MultimodeConfig::eigenstate(m.etas.clone(), alphas.clone(), p),
    };
    let config = match config {
        Ok(c) => c,
        Err(e) => {
            errors.push("multimode", e.to_string());
            return None;
        }
    };
    let tail = trunc.tail.unwrap_or(DEFAULT_TAIL);
    let field: Vec<usize> = match &m.dims {
        Some(d) if d.len() != alphas.len() => {
            errors.push("multimode.dims", format!("{} dims for {} modes", d.len(), alphas.len()));
            return None;
        }
        Some(d) if d.contains(&0) => {
            errors.push("multimode.dims", "must be >= 1");
            return None;
        }
        Some(d) => d.clone(),
        None => alphas.iter().map(|a| coherent_dim(a.norm(), tail)).collect(),
    };
    let s_max = config.weighted_count(&field.iter().map(|d| d - 1).collect::<Vec<_>>());
    let mirror = m.mirror.unwrap_or_else(|| coherent_dim(beta.norm() + 2.0 * config.k1 * s_max, tail));
    let tolerance = trunc.tolerance.unwrap_or(DEFAULT_LOSS_TOLERANCE);
    let total: usize = field.iter().product::<usize>().saturating_mul(mirror);
    if total > 50_000_000 {
        errors.push("multimode.dims", format!("joint dimension {total} is too large; lower dims or mirror"));
    }
    Some(MultimodePlan { config, beta, trunc: MultimodeTruncation { field, mirror, tolerance } })
}

impl Plan {
    /// Largest joint (or single-mode) dimension and the predicted peak memory
    /// in bytes.
    pub fn footprint(&self) -> (String, u64) {
        let c16 = 16u64;
        let mut peak = 0u64;
        let mut dims = String::new();
        if let Some(mm) = &self.multimode {
            let n: u64 = mm.trunc.field.iter().map(|&d| d as u64).product::<u64>() * mm.trunc.mirror as u64;
            dims = format!("fields {:?}, mirror {}", mm.trunc.field, mm.trunc.mirror);
            peak = n * c16 * 4;
        }
        let (mut f_max, mut m_max) = (0usize, 0usize);
        for c in &self.cases {
            f_max = f_max.max(c.trunc.field);
            m_max = m_max.max(c.trunc.mirror);
            let (nf, nm) = (c.trunc.field as u64, c.trunc.mirror as u64);
            let joint = nf * nm;
            let grid = (self.grid.nx * self.grid.ny) as u64 * 8;
            let bytes = match self.mode {
                Mode::Evolve => match &self.oracle {
                    Some(o) if o.kind == OracleKind::Propagator => {
                        let padded = nf * (nm + o.pad as u64);
                        padded * padded * c16 * 4
                    }
                    Some(_) => joint * c16 * 10,
                    None => joint * c16 * 2,
                },
                Mode::Damped => match &self.oracle {
                    Some(_) => joint * joint * c16 * 10,
                    None => nf * nf * c16 * 2,
                },
                Mode::MeasureMirror => nf * c16 * 4,
                // Wigner grids of mirror states use the exact coherent-branch
                // form; the Fock-basis mirror state is built only for output.
                Mode::MeasureField => {
                    let fock = match (self.outputs.states, c.params.gamma > 0.0) {
                        (false, _) => 0,
                        (true, false) => nm * c16 * 2,
                        (true, true) => nm * nm * c16 * 2,
                    };
                    nf * nf * c16 + fock + grid
                }
                Mode::Entropy => nf * 8 * 4,
                Mode::Wigner | Mode::Density => {
                    let d = match (self.subsystem, c.params.gamma > 0.0) {
                        (Subsystem::Field, _) => nf * nf,
                        (Subsystem::Mirror, _) if self.mode == Mode::Wigner && !self.outputs.states && self.compare.is_empty() => {
                            nf * nf / 2
                        }
                        (Subsystem::Mirror, false) => nm * nm,
                        _ => joint * joint,
                    };
                    d * c16 * 2 + grid
                }
                Mode::Multimode => 0,
            };
            peak = peak.max(bytes);
        }
        if !self.cases.is_empty() {
            dims = format!("field {f_max}, mirror {m_max}");
        }
        (dims, peak)
    }
}
