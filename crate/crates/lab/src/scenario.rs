//! Scenario files: TOML with a `[metric]` section, a `[run]` section tagged by
//! `kind`, and optional `[tolerances]` and `[expect]` sections.

use std::collections::BTreeMap;

use lorentz_core::catalog;
use lorentz_core::geodesic::IntegratorConfig;
use serde::Deserialize;

use crate::LabFailure;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: Option<String>,
    pub description: Option<String>,
    pub seed: Option<u64>,
    /// Output file name (relative to the output directory).
    pub output: Option<String>,
    pub metric: MetricSpec,
    pub run: RunSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub expect: BTreeMap<String, Expectation>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl MetricSpec {
    pub fn param_list(&self) -> Vec<(String, f64)> {
        self.params.iter().map(|(k, v)| (k.clone(), *v)).collect()
    }

    /// Parameter value, falling back to the catalog default.
    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied().or_else(|| {
            catalog::entry(&self.name)?
                .params
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
        })
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_step: Option<f64>,
    pub drift_bound: Option<f64>,
}

impl Tolerances {
    pub fn integrator(&self, tol_scale: f64) -> IntegratorConfig {
        let d = IntegratorConfig::default();
        IntegratorConfig {
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol) * tol_scale,
            abs_tol: self.abs_tol.unwrap_or(d.abs_tol) * tol_scale,
            max_step: self.max_step.unwrap_or(d.max_step),
            drift_bound: self.drift_bound.unwrap_or(d.drift_bound),
            ..d
        }
    }
}

/// A declared bound on a numeric report value.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub value: Option<f64>,
    pub tol: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl Expectation {
    pub fn holds(&self, x: f64) -> bool {
        let near = match (self.value, self.tol) {
            (Some(v), Some(t)) => (x - v).abs() <= t,
            _ => true,
        };
        near && self.min.is_none_or(|m| x >= m) && self.max.is_none_or(|m| x <= m)
    }

    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if let (Some(v), Some(t)) = (self.value, self.tol) {
            parts.push(format!("{v} +/- {t}"));
        }
        if let Some(m) = self.min {
            parts.push(format!(">= {m}"));
        }
        if let Some(m) = self.max {
            parts.push(format!("<= {m}"));
        }
        parts.join(", ")
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RunSpec {
    Geodesic(GeodesicRun),
    Curvature(CurvatureRun),
    Conjugate(ConjugateRun),
    Expansion(ExpansionRun),
    Singularity(SingularityRun),
    Twin(TwinRun),
    AdsLongCurve(AdsLongCurveRun),
    ScaleFactor(ScaleFactorRun),
}

impl RunSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            RunSpec::Geodesic(_) => "geodesic",
            RunSpec::Curvature(_) => "curvature",
            RunSpec::Conjugate(_) => "conjugate",
            RunSpec::Expansion(_) => "expansion",
            RunSpec::Singularity(_) => "singularity",
            RunSpec::Twin(_) => "twin",
            RunSpec::AdsLongCurve(_) => "ads-long-curve",
            RunSpec::ScaleFactor(_) => "scale-factor",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Normalize {
    /// Rescale `v` to `⟨v,v⟩ = −1`.
    Unit,
    #[default]
    None,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "from", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeodesicInit {
    /// Explicit position and velocity.
    State {
        x: Vec<f64>,
        v: Vec<f64>,
        #[serde(default)]
        normalize: Normalize,
    },
    /// Equatorial circular orbit of a Schwarzschild exterior.
    CircularOrbit { r: f64 },
    /// Unit normal of a slice through `x`.
    SliceNormal {
        slice: SliceSpec,
        x: Vec<f64>,
        #[serde(default)]
        past: bool,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicRun {
    pub init: GeodesicInit,
    pub lambda_max: Option<f64>,
    /// For circular orbits: run for this many coordinate-time periods.
    pub orbits: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    201
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum MatterKind {
    Vacuum,
    CosmologicalConstant,
    Dust,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureRun {
    pub matter: MatterKind,
    pub lambda: Option<f64>,
    /// Explicit events; otherwise `samples` random events from the chart.
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_curvature_samples")]
    pub samples: usize,
    #[serde(default)]
    pub sec_samples: usize,
}

fn default_curvature_samples() -> usize {
    100
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SliceSpec {
    FlrwTime,
    MilneTau,
    SchwarzschildR,
    Isotropic { expansion: f64 },
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum JacobiStart {
    #[default]
    Point,
    Slice,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugateRun {
    pub x: Vec<f64>,
    /// Initial directions; each is normalized to unit timelike.
    pub directions: Vec<Vec<f64>>,
    #[serde(default)]
    pub start: JacobiStart,
    /// Frame components of `K₀` (`n × n`) for slice starts.
    pub k0: Option<Vec<Vec<f64>>>,
    pub t_max: f64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

fn default_resolution() -> usize {
    2048
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionRun {
    pub slice: SliceSpec,
    pub x: Vec<f64>,
    pub t_max: f64,
    #[serde(default)]
    pub past: bool,
    #[serde(default = "default_grid")]
    pub grid: usize,
}

fn default_grid() -> usize {
    512
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingularityRun {
    pub slice: SliceSpec,
    pub x: Vec<f64>,
    pub t_max: Option<f64>,
    #[serde(default = "default_sec_samples")]
    pub sec_samples: usize,
}

fn default_sec_samples() -> usize {
    200
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwinRun {
    pub p: Vec<f64>,
    /// Target event; alternatively reached from `p` along `direction`.
    pub q: Option<Vec<f64>>,
    pub direction: Option<Vec<f64>>,
    /// Proper time along `direction` to the target.
    pub length: Option<f64>,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

fn default_amplitude() -> f64 {
    0.3
}
fn default_modes() -> usize {
    4
}
fn default_trials() -> usize {
    1000
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdsLongCurveRun {
    pub eps: f64,
    pub x0: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleFactorRun {
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Sampling window; defaults to the solver interval.
    pub t_from: Option<f64>,
    pub t_to: Option<f64>,
}

fn config(field: &str, msg: impl std::fmt::Display) -> LabFailure {
    LabFailure::Config(format!("{field}: {msg}"))
}

fn positive(field: &str, v: f64) -> Result<(), LabFailure> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config(field, format!("must be a positive number, got {v}")))
    }
}

fn finite(field: &str, xs: &[f64]) -> Result<(), LabFailure> {
    match xs.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(config(&format!("{field}[{i}]"), "must be finite")),
        None => Ok(()),
    }
}

fn dimension(field: &str, xs: &[f64], dim: usize) -> Result<(), LabFailure> {
    if xs.len() != dim {
        return Err(config(field, format!("expected {dim} components, got {}", xs.len())));
    }
    finite(field, xs)
}

impl Scenario {
    pub fn parse(src: &str) -> Result<Self, LabFailure> {
        toml::from_str(src).map_err(|e| LabFailure::Config(e.to_string().trim_end().to_string()))
    }

    /// Checks catalog names, parameter keys and run-specific fields against
    /// the spacetime dimension `dim`, without running anything.
    pub fn validate(&self) -> Result<usize, LabFailure> {
        let entry = catalog::entry(&self.metric.name).ok_or_else(|| {
            let names: Vec<&str> = catalog::ENTRIES.iter().map(|e| e.name).collect();
            config(
                "metric.name",
                format!("unknown metric name '{}' (known: {})", self.metric.name, names.join(", ")),
            )
        })?;
        for (k, v) in &self.metric.params {
            if !entry.params.iter().any(|(p, _)| p == k) {
                return Err(config(&format!("metric.params.{k}"), format!("metric '{}' has no such parameter", entry.name)));
            }
            if !v.is_finite() {
                return Err(config(&format!("metric.params.{k}"), "must be finite"));
            }
        }
        let dim = match self.metric.name.as_str() {
            "ads2" | "clifton-pohl" => 2,
            _ => self.metric.param("n").unwrap_or(0.0) as usize + 1,
        };
        let t = &self.tolerances;
        for (k, v) in [("rel_tol", t.rel_tol), ("abs_tol", t.abs_tol), ("max_step", t.max_step), ("drift_bound", t.drift_bound)] {
            if let Some(v) = v {
                positive(&format!("tolerances.{k}"), v)?;
            }
        }
        for (k, e) in &self.expect {
            let field = format!("expect.{k}");
            if e.value.is_some() != e.tol.is_some() {
                return Err(config(&field, "'value' and 'tol' must be given together"));
            }
            if e.value.is_none() && e.min.is_none() && e.max.is_none() {
                return Err(config(&field, "needs 'value' and 'tol', 'min' or 'max'"));
            }
        }
        self.validate_run(dim)?;
        Ok(dim)
    }

    fn require_metric(&self, names: &[&str]) -> Result<(), LabFailure> {
        if names.contains(&self.metric.name.as_str()) {
            Ok(())
        } else {
            Err(config(
                "metric.name",
                format!("run kind '{}' needs metric {}", self.run.kind(), names.join(" or ")),
            ))
        }
    }

    fn validate_slice(&self, field: &str, s: &SliceSpec) -> Result<(), LabFailure> {
        let need = match s {
            SliceSpec::FlrwTime => "flrw",
            SliceSpec::MilneTau => "milne",
            SliceSpec::SchwarzschildR => "schwarzschild-interior",
            SliceSpec::Isotropic { expansion } => {
                if !expansion.is_finite() {
                    return Err(config(&format!("{field}.expansion"), "must be finite"));
                }
                return Ok(());
            }
        };
        if self.metric.name != need {
            return Err(config(field, format!("this slice needs metric '{need}'")));
        }
        Ok(())
    }

    fn validate_run(&self, dim: usize) -> Result<(), LabFailure> {
        match &self.run {
            RunSpec::Geodesic(g) => {
                match &g.init {
                    GeodesicInit::State { x, v, .. } => {
                        dimension("run.init.x", x, dim)?;
                        dimension("run.init.v", v, dim)?;
                    }
                    GeodesicInit::CircularOrbit { r } => {
                        self.require_metric(&["schwarzschild-exterior"])?;
                        positive("run.init.r", *r)?;
                    }
                    GeodesicInit::SliceNormal { slice, x, .. } => {
                        self.validate_slice("run.init.slice", slice)?;
                        dimension("run.init.x", x, dim)?;
                    }
                }
                match (g.lambda_max, g.orbits) {
                    (Some(l), None) => positive("run.lambda_max", l)?,
                    (None, Some(o)) => {
                        positive("run.orbits", o)?;
                        if !matches!(g.init, GeodesicInit::CircularOrbit { .. }) {
                            return Err(config("run.orbits", "only applies to circular-orbit starts"));
                        }
                    }
                    (Some(_), Some(_)) => return Err(config("run.orbits", "give either lambda_max or orbits")),
                    (None, None) => return Err(config("run.lambda_max", "missing")),
                }
                if g.samples < 2 {
                    return Err(config("run.samples", "must be at least 2"));
                }
            }
            RunSpec::Curvature(c) => {
                match c.matter {
                    MatterKind::CosmologicalConstant => {
                        let l = c.lambda.ok_or_else(|| config("run.lambda", "required for cosmological-constant matter"))?;
                        finite("run.lambda", &[l])?;
                    }
                    MatterKind::Dust => self.require_metric(&["flrw"])?,
                    MatterKind::Vacuum => {}
                }
                if c.lambda.is_some() && c.matter != MatterKind::CosmologicalConstant {
                    return Err(config("run.lambda", "only applies to cosmological-constant matter"));
                }
                if let Some(ps) = &c.points {
                    for (i, p) in ps.iter().enumerate() {
                        dimension(&format!("run.points[{i}]"), p, dim)?;
                    }
                } else if c.samples == 0 {
                    return Err(config("run.samples", "must be positive"));
                }
            }
            RunSpec::Conjugate(c) => {
                dimension("run.x", &c.x, dim)?;
                if c.directions.is_empty() {
                    return Err(config("run.directions", "needs at least one direction"));
                }
                for (i, d) in c.directions.iter().enumerate() {
                    dimension(&format!("run.directions[{i}]"), d, dim)?;
                }
                positive("run.t_max", c.t_max)?;
                if c.resolution < 2 {
                    return Err(config("run.resolution", "must be at least 2"));
                }
                match (c.start, &c.k0) {
                    (JacobiStart::Slice, None) => return Err(config("run.k0", "required for slice starts")),
                    (JacobiStart::Point, Some(_)) => return Err(config("run.k0", "only applies to slice starts")),
                    (JacobiStart::Slice, Some(k)) => {
                        let n = dim - 1;
                        if k.len() != n || k.iter().any(|r| r.len() != n) {
                            return Err(config("run.k0", format!("must be a {n} x {n} matrix")));
                        }
                        for (i, r) in k.iter().enumerate() {
                            finite(&format!("run.k0[{i}]"), r)?;
                        }
                    }
                    _ => {}
                }
            }
            RunSpec::Expansion(e) => {
                self.validate_slice("run.slice", &e.slice)?;
                dimension("run.x", &e.x, dim)?;
                positive("run.t_max", e.t_max)?;
                if e.grid < 2 {
                    return Err(config("run.grid", "must be at least 2"));
                }
            }
            RunSpec::Singularity(s) => {
                self.validate_slice("run.slice", &s.slice)?;
                dimension("run.x", &s.x, dim)?;
                if let Some(t) = s.t_max {
                    positive("run.t_max", t)?;
                }
            }
            RunSpec::Twin(t) => {
                dimension("run.p", &t.p, dim)?;
                match (&t.q, &t.direction, t.length) {
                    (Some(q), None, None) => dimension("run.q", q, dim)?,
                    (None, Some(d), Some(l)) => {
                        dimension("run.direction", d, dim)?;
                        positive("run.length", l)?;
                    }
                    _ => return Err(config("run.q", "give either q, or direction and length")),
                }
                if !(t.amplitude >= 0.0 && t.amplitude.is_finite()) {
                    return Err(config("run.amplitude", "must be non-negative"));
                }
                if !(1..=lorentz_core::curves::MAX_MODES).contains(&t.modes) {
                    return Err(config("run.modes", format!("must be between 1 and {}", lorentz_core::curves::MAX_MODES)));
                }
                if t.trials == 0 {
                    return Err(config("run.trials", "must be positive"));
                }
            }
            RunSpec::AdsLongCurve(a) => {
                self.require_metric(&["ads2"])?;
                if self.metric.param("alpha") != Some(1.0) {
                    return Err(config("metric.params.alpha", "the long-curve construction uses alpha = 1"));
                }
                positive("run.eps", a.eps)?;
                if a.x0.is_empty() {
                    return Err(config("run.x0", "needs at least one value"));
                }
                for (i, x) in a.x0.iter().enumerate() {
                    if !(*x > 0.0 && *x < std::f64::consts::FRAC_PI_2) {
                        return Err(config(&format!("run.x0[{i}]"), "must lie in (0, pi/2)"));
                    }
                }
            }
            RunSpec::ScaleFactor(s) => {
                self.require_metric(&["flrw"])?;
                if s.samples < 2 {
                    return Err(config("run.samples", "must be at least 2"));
                }
                if let (Some(a), Some(b)) = (s.t_from, s.t_to) {
                    if !(a < b) {
                        return Err(config("run.t_to", "must exceed run.t_from"));
                    }
                }
            }
        }
        Ok(())
    }
}
