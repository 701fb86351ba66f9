//! Scenario runner for `lorentz-core`.
//!
//! A scenario file names a catalog metric and one run (geodesic, curvature,
//! conjugate, expansion, singularity, twin, ads-long-curve or scale-factor).
//! Running it yields a CSV table with a self-describing `#` header and a
//! `key = value` report, plus an exit status:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | a declared bound or built-in check failed |
//! | 3 | configuration error |
//! | 4 | numerical failure (integrator degraded or diverged) |

pub mod output;
pub mod recipes;
pub mod runner;
pub mod scenario;

use lorentz_core::exec::Execution;
use lorentz_core::LabError;

use output::{Header, Report};
use scenario::Scenario;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum LabFailure {
    Config(String),
    Numerical(String),
}

impl LabFailure {
    pub fn from_core(e: LabError) -> Self {
        match e {
            LabError::Usage(_)
            | LabError::Domain { .. }
            | LabError::Unsupported(_)
            | LabError::InvalidParameter(_)
            | LabError::InvalidConfig(_)
            | LabError::Physics(_) => LabFailure::Config(e.to_string()),
            LabError::Degenerate { .. }
            | LabError::Contract(_)
            | LabError::Incomplete { .. }
            | LabError::Shooting(_)
            | LabError::Numerical(_) => LabFailure::Numerical(e.to_string()),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            LabFailure::Config(_) => ExitCode::ConfigError,
            LabFailure::Numerical(_) => ExitCode::Numerical,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            LabFailure::Config(m) | LabFailure::Numerical(m) => m,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitCode {
    Success = 0,
    BoundFailed = 2,
    ConfigError = 3,
    Numerical = 4,
}

impl ExitCode {
    pub fn label(self) -> &'static str {
        match self {
            ExitCode::Success => "ok",
            ExitCode::BoundFailed => "bound-failed",
            ExitCode::ConfigError => "config-error",
            ExitCode::Numerical => "numerical-failure",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Takes precedence over the scenario's own seed.
    pub seed_override: Option<u64>,
    /// Used when neither the override nor the scenario gives a seed.
    pub seed_fallback: Option<u64>,
    pub tol_scale: f64,
    pub exec: Execution,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed_override: None,
            seed_fallback: None,
            tol_scale: 1.0,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub name: String,
    /// File name for the main CSV.
    pub output_name: String,
    /// `(file name, contents)`; empty when the run failed before producing data.
    pub files: Vec<(String, String)>,
    pub report: String,
    pub exit: ExitCode,
}

fn stem_of(label: &str) -> String {
    let base = label.rsplit(['/', '\\']).next().unwrap_or(label);
    base.strip_suffix(".scn").or_else(|| base.strip_suffix(".toml")).unwrap_or(base).to_string()
}

/// Parses, validates and runs one scenario given its source text; `label` is
/// the file name (or recipe name) it came from.
pub fn run_source(src: &str, label: &str, opts: &RunOptions) -> RunOutput {
    let sha = output::sha256_hex(src.as_bytes());
    let mut head = Report::default();
    head.text("lorentz_lab_version", VERSION);
    head.text("scenario_sha256", &sha);
    let fail = |mut head: Report, name: String, f: LabFailure| {
        head.text("error", f.message());
        head.text("status", f.exit_code().label());
        head.num("exit_code", f.exit_code() as i32 as f64);
        RunOutput {
            output_name: format!("{name}.csv"),
            name,
            files: Vec::new(),
            report: head.render(),
            exit: f.exit_code(),
        }
    };
    let sc = match Scenario::parse(src) {
        Ok(s) => s,
        Err(f) => return fail(head, stem_of(label), f),
    };
    let name = sc.name.clone().unwrap_or_else(|| stem_of(label));
    head.entries.insert(0, ("scenario".into(), output::Value::Text(name.clone())));
    if let Err(f) = sc.validate() {
        return fail(head, name, f);
    }
    if !(opts.tol_scale > 0.0 && opts.tol_scale.is_finite()) {
        return fail(head, name, LabFailure::Config(format!("--tol-scale: must be positive, got {}", opts.tol_scale)));
    }
    let seed = opts.seed_override.or(sc.seed).or(opts.seed_fallback).unwrap_or(1);
    head.text("run", sc.run.kind());
    head.text("metric", &sc.metric.name);
    head.num("seed", seed as f64);
    head.num("tol_scale", opts.tol_scale);
    let ctx = runner::Context {
        scenario: &sc,
        seed,
        tol_scale: opts.tol_scale,
        exec: opts.exec,
    };
    let out = match runner::execute(&ctx) {
        Ok(o) => o,
        Err(f) => return fail(head, name, f),
    };
    let mut rep = head;
    rep.entries.extend(out.report.entries.iter().cloned());
    let mut exit = ExitCode::Success;
    for c in &out.checks {
        rep.text(format!("check.{}", c.name), format!("{} ({})", if c.pass { "pass" } else { "FAIL" }, c.detail));
        if !c.pass {
            exit = ExitCode::BoundFailed;
        }
    }
    for (key, e) in &sc.expect {
        match out.report.get_num(key) {
            Some(x) => {
                let pass = e.holds(x);
                rep.text(
                    format!("expect.{key}"),
                    format!("{} ({} vs {})", if pass { "pass" } else { "FAIL" }, output::num(x), e.describe()),
                );
                if !pass {
                    exit = ExitCode::BoundFailed;
                }
            }
            None => {
                return fail(rep, name, LabFailure::Config(format!("expect.{key}: the run reports no numeric value '{key}'")));
            }
        }
    }
    if out.degraded {
        exit = ExitCode::Numerical;
    }
    rep.text("status", exit.label());
    rep.num("exit_code", exit as i32 as f64);
    let output_name = sc.output.clone().unwrap_or_else(|| format!("{name}.csv"));
    let stem = output_name.strip_suffix(".csv").unwrap_or(&output_name).to_string();
    let files = out
        .tables
        .iter()
        .map(|(suffix, t)| {
            let file = if suffix.is_empty() { output_name.clone() } else { format!("{stem}.{suffix}.csv") };
            let h = Header {
                version: VERSION,
                scenario: &name,
                kind: sc.run.kind(),
                sha256: &sha,
                seed,
                units: runner::UNITS,
            };
            (file, output::render_csv(&h, t))
        })
        .collect();
    RunOutput {
        name,
        output_name,
        files,
        report: rep.render(),
        exit,
    }
}
