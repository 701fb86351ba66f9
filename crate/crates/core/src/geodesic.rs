//! Geodesic integration with conservation monitoring and incompleteness
//! classification.
//!
//! The ODE state is `(x, v, τ)`: position, velocity and accumulated proper
//! time. A geodesic that cannot be continued is classified by *why*: it ran
//! into an edge of the chart (and whether that edge is the end of the
//! spacetime), its velocity blew up, or the step size underflowed for some
//! other reason. This is a numerical diagnosis of incompleteness, not a proof.

use std::f64::consts::FRAC_PI_2;

use crate::curvature;
use crate::error::{LabError, Result};
use crate::geometry::{self, Causal, ChartedSpacetime, EdgeKind, Side, DEFAULT_NULL_TOL};
use crate::linalg;
use crate::ode::{self, Control, DenseOutput, OdeEnd, OdeOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicState {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub lambda: f64,
    pub tau: f64,
}

impl GeodesicState {
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> Self {
        Self {
            x,
            v,
            lambda: 0.0,
            tau: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    ReachedParameterBound,
    /// Left the chart through the named constraint.
    LeftChartDomain {
        coordinate: String,
        side: Side,
        kind: EdgeKind,
    },
    VelocityBlowUp,
    StepUnderflow,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Termination::ReachedParameterBound => write!(f, "reached-parameter-bound"),
            Termination::LeftChartDomain {
                coordinate, side, ..
            } => write!(f, "left-chart-domain({coordinate},{side})"),
            Termination::VelocityBlowUp => write!(f, "velocity-blow-up"),
            Termination::StepUnderflow => write!(f, "step-underflow"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub lambda_max: f64,
    pub blowup_threshold: f64,
    pub min_step: f64,
    /// Bound on the relative drift of `⟨v,v⟩`; beyond it the result is
    /// marked degraded.
    pub drift_bound: f64,
    /// Stages must satisfy every domain constraint with at least this margin.
    pub domain_margin: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_step: 1.0,
            lambda_max: 10.0,
            blowup_threshold: 1e12,
            min_step: 1e-14,
            drift_bound: 1e-8,
            domain_margin: 0.0,
        }
    }
}

impl IntegratorConfig {
    pub fn with_lambda_max(mut self, l: f64) -> Self {
        self.lambda_max = l;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("lambda_max", self.lambda_max),
            ("blowup_threshold", self.blowup_threshold),
            ("min_step", self.min_step),
            ("drift_bound", self.drift_bound),
        ];
        for (k, v) in pos {
            if !(v > 0.0) {
                return Err(LabError::InvalidConfig(format!("{k} must be positive, got {v}")));
            }
        }
        if !(self.domain_margin >= 0.0) {
            return Err(LabError::InvalidConfig("domain_margin must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GeodesicResult {
    pub chart: String,
    pub dim: usize,
    /// States at the accepted steps, `λ` strictly increasing.
    pub samples: Vec<GeodesicState>,
    pub dense: DenseOutput,
    pub termination: Termination,
    pub character: Causal,
    pub initial_norm: f64,
    /// `max |⟨v,v⟩ − ⟨v,v⟩₀| / s` with `s` the auxiliary scale at the sample.
    pub conserved_drift: f64,
    pub degraded: bool,
    pub incompleteness_flag: bool,
    /// Extrapolated parameter at which the velocity diverges.
    pub blowup_parameter: Option<f64>,
}

impl GeodesicResult {
    pub fn lambda_end(&self) -> f64 {
        self.samples.last().map(|s| s.lambda).unwrap_or(0.0)
    }

    pub fn last(&self) -> &GeodesicState {
        self.samples.last().expect("at least the initial sample")
    }

    /// Dense-output state at `λ`.
    pub fn state_at(&self, lambda: f64) -> Option<GeodesicState> {
        if self.dense.segments.is_empty() {
            let s = &self.samples[0];
            return (lambda == s.lambda).then(|| s.clone());
        }
        let y = self.dense.eval(lambda)?;
        let d = self.dim;
        Some(GeodesicState {
            x: y[..d].to_vec(),
            v: y[d..2 * d].to_vec(),
            lambda,
            tau: y[2 * d],
        })
    }
}

#[derive(Clone, Debug)]
enum Refusal {
    Domain {
        label: String,
        side: Side,
        kind: EdgeKind,
    },
    Degenerate,
}

fn refusal_at(m: &ChartedSpacetime, x: &[f64], margin: f64) -> Option<Refusal> {
    if x.iter().any(|c| !c.is_finite()) {
        return Some(Refusal::Degenerate);
    }
    m.violated(x, margin).map(|c| Refusal::Domain {
        label: c.label.clone(),
        side: c.side,
        kind: c.kind,
    })
}

/// When the step collapses from error control alone, looks a few thousand
/// minimum steps ahead along the tangent line for a chart edge.
fn edge_ahead(m: &ChartedSpacetime, x: &[f64], v: &[f64], min_step: f64) -> Option<Refusal> {
    let mut h = min_step;
    while h <= 4096.0 * min_step {
        let probe: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + h * b).collect();
        if let Some(r) = refusal_at(m, &probe, 0.0) {
            return Some(r);
        }
        h *= 2.0;
    }
    None
}

/// `a^λ = −Γ^λ_μν v^μ v^ν`.
pub fn acceleration(gamma: &[f64], v: &[f64]) -> Vec<f64> {
    let d = v.len();
    (0..d)
        .map(|l| {
            let mut s = 0.0;
            for mu in 0..d {
                for nu in 0..d {
                    s += gamma[(l * d + mu) * d + nu] * v[mu] * v[nu];
                }
            }
            -s
        })
        .collect()
}

/// Integrates the geodesic through `s0` up to `λ = s0.lambda + cfg.lambda_max`.
pub fn integrate_geodesic(
    m: &ChartedSpacetime,
    s0: &GeodesicState,
    cfg: &IntegratorConfig,
) -> Result<GeodesicResult> {
    cfg.validate()?;
    if s0.x.len() != m.dim || s0.v.len() != m.dim {
        return Err(LabError::Usage(format!(
            "state dimension does not match chart dimension {}",
            m.dim
        )));
    }
    m.require_domain(&s0.x)?;
    let d = m.dim;
    let g0 = m.metric_at(&s0.x);
    let q0 = linalg::quad(&g0, &s0.v, &s0.v);
    let ch = geometry::classify_raw(&g0, &m.time_orientation(&s0.x), &s0.v, DEFAULT_NULL_TOL);
    let timelike = ch.causal == Causal::Timelike;
    let margin = cfg.domain_margin;

    let rhs = |_l: f64, y: &[f64], dy: &mut [f64]| -> std::result::Result<(), Refusal> {
        let (x, v) = (&y[..d], &y[d..2 * d]);
        if let Some(r) = refusal_at(m, x, margin) {
            return Err(r);
        }
        let gam = curvature::christoffel(m, x).map_err(|_| Refusal::Degenerate)?;
        let a = acceleration(&gam, v);
        if a.iter().any(|c| !c.is_finite()) {
            return Err(Refusal::Degenerate);
        }
        dy[..d].copy_from_slice(v);
        dy[d..2 * d].copy_from_slice(&a);
        dy[2 * d] = if timelike {
            let g = m.metric_at(x);
            (-linalg::quad(&g, v, v)).max(0.0).sqrt()
        } else {
            0.0
        };
        Ok(())
    };

    let mut y0 = s0.x.clone();
    y0.extend_from_slice(&s0.v);
    y0.push(s0.tau);

    let thresholds = [
        cfg.blowup_threshold * 1e-6,
        cfg.blowup_threshold * 1e-3,
        cfg.blowup_threshold,
    ];
    let mut crossings: Vec<f64> = Vec::new();
    let vmax = |y: &[f64]| y[d..2 * d].iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let monitor = |seg: &ode::Segment| -> Control<()> {
        let end = seg.end();
        let peak = vmax(&end);
        while crossings.len() < thresholds.len() && peak > thresholds[crossings.len()] {
            let th = thresholds[crossings.len()];
            let t = if vmax(seg.start()) > th {
                seg.t0
            } else {
                ode::locate_crossing(seg, |y| vmax(y) - th, 0.0).unwrap_or(seg.t1())
            };
            crossings.push(t);
        }
        if crossings.len() == thresholds.len() {
            Control::Stop(())
        } else {
            Control::Continue
        }
    };

    let opts = OdeOptions {
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        max_step: cfg.max_step,
        min_step: cfg.min_step,
        initial_step: None,
        max_steps: 5_000_000,
    };
    let run = ode::dopri5(rhs, s0.lambda, &y0, s0.lambda + cfg.lambda_max, &opts, monitor);

    let termination = match &run.end {
        OdeEnd::Reached => Termination::ReachedParameterBound,
        OdeEnd::Stopped(()) => Termination::VelocityBlowUp,
        OdeEnd::Underflow(Some(Refusal::Domain { label, side, kind })) => {
            Termination::LeftChartDomain {
                coordinate: label.clone(),
                side: *side,
                kind: *kind,
            }
        }
        OdeEnd::Underflow(None) => match edge_ahead(m, &run.y_final[..d], &run.y_final[d..2 * d], cfg.min_step) {
            Some(Refusal::Domain { label, side, kind }) => Termination::LeftChartDomain {
                coordinate: label,
                side,
                kind,
            },
            _ => Termination::StepUnderflow,
        },
        OdeEnd::Underflow(_) | OdeEnd::TooManySteps => Termination::StepUnderflow,
        OdeEnd::Rejected(_) => {
            return Err(LabError::Domain {
                chart: m.name.clone(),
                coords: s0.x.clone(),
            })
        }
    };
    let incompleteness_flag = match &termination {
        Termination::ReachedParameterBound => false,
        Termination::LeftChartDomain { kind, .. } => *kind == EdgeKind::Inextendible,
        Termination::VelocityBlowUp | Termination::StepUnderflow => true,
    };

    let mut samples = vec![s0.clone()];
    let mut drift: f64 = 0.0;
    for seg in &run.dense.segments {
        let y = seg.end();
        let st = GeodesicState {
            x: y[..d].to_vec(),
            v: y[d..2 * d].to_vec(),
            lambda: seg.t1(),
            tau: y[2 * d],
        };
        let g = m.metric_at(&st.x);
        let q = linalg::quad(&g, &st.v, &st.v);
        let s = geometry::auxiliary_scale(&g, &st.v).max(f64::MIN_POSITIVE);
        drift = drift.max((q - q0).abs() / s);
        samples.push(st);
    }

    let blowup_parameter = (termination == Termination::VelocityBlowUp).then(|| {
        let (l1, l2, l3) = (crossings[0], crossings[1], crossings[2]);
        let (d1, d2) = (l2 - l1, l3 - l2);
        let denom = d2 - d1;
        if denom != 0.0 && d1 > 0.0 && d2 > 0.0 && d2 < d1 {
            l3 - d2 * d2 / denom
        } else {
            l3
        }
    });

    Ok(GeodesicResult {
        chart: m.name.clone(),
        dim: d,
        samples,
        dense: run.dense,
        termination,
        character: ch.causal,
        initial_norm: q0,
        conserved_drift: drift,
        degraded: drift > cfg.drift_bound,
        incompleteness_flag,
        blowup_parameter,
    })
}

/// Proper time `∫|⟨ċ,ċ⟩|^{1/2} dλ` between two parameters, read from the
/// integrated proper-time component.
pub fn proper_time_between(result: &GeodesicResult, l1: f64, l2: f64) -> Result<f64> {
    if result.character != Causal::Timelike {
        return Err(LabError::Contract(format!(
            "proper time requested along a {:?} geodesic",
            result.character
        )));
    }
    if !(l1 < l2) {
        return Err(LabError::Usage(format!("need l1 < l2, got {l1}, {l2}")));
    }
    let a = result
        .state_at(l1)
        .ok_or_else(|| LabError::Usage(format!("parameter {l1} outside the integrated range")))?;
    let b = result
        .state_at(l2)
        .ok_or_else(|| LabError::Usage(format!("parameter {l2} outside the integrated range")))?;
    Ok(b.tau - a.tau)
}

/// Initial state of the timelike circular orbit of radius `r` in the
/// Schwarzschild exterior, on the equator, with `dφ/dt` from the
/// circular-orbit condition and `⟨v,v⟩ = −1`.
pub fn circular_orbit_init(n: usize, rs: f64, r: f64) -> Result<GeodesicState> {
    if n < 3 {
        return Err(LabError::InvalidParameter("circular orbits need n >= 3".into()));
    }
    if !(rs > 0.0) || !(r > rs) {
        return Err(LabError::InvalidParameter(format!(
            "need 0 < r_s < r, got r_s = {rs}, r = {r}"
        )));
    }
    let w = angular_velocity(n, rs, r);
    let f = 1.0 - (rs / r).powi(n as i32 - 2);
    let denom = f - r * r * w * w;
    if !(denom > 0.0) {
        return Err(LabError::Physics(format!(
            "no timelike circular orbit at r = {r}: f - r^2 (dphi/dt)^2 = {denom}"
        )));
    }
    let ut = 1.0 / denom.sqrt();
    let dim = n + 1;
    let mut x = vec![FRAC_PI_2; dim];
    x[0] = 0.0;
    x[1] = r;
    x[dim - 1] = 0.0;
    let mut v = vec![0.0; dim];
    v[0] = ut;
    v[dim - 1] = ut * w;
    Ok(GeodesicState::new(x, v))
}

/// `dφ/dt = ((n−2) r_s^{n−2} / (2 rⁿ))^{1/2}`.
pub fn angular_velocity(n: usize, rs: f64, r: f64) -> f64 {
    ((n as f64 - 2.0) * rs.powi(n as i32 - 2) / (2.0 * r.powi(n as i32))).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn minkowski_straight_line() {
        let m = catalog::minkowski(1).unwrap();
        let s0 = GeodesicState::new(vec![0.0, 0.0], vec![1.0, 0.5]);
        let r = integrate_geodesic(&m, &s0, &IntegratorConfig::default().with_lambda_max(2.0))
            .unwrap();
        assert_eq!(r.termination, Termination::ReachedParameterBound);
        let end = r.last();
        assert!((end.x[0] - 2.0).abs() < 1e-14 && (end.x[1] - 1.0).abs() < 1e-14);
        assert!(r.conserved_drift < 1e-12);
        assert!(!r.incompleteness_flag);
    }

    #[test]
    fn proper_time_examples() {
        let m = catalog::minkowski(3).unwrap();
        let cfg = IntegratorConfig::default().with_lambda_max(2.0);
        let r = integrate_geodesic(&m, &GeodesicState::new(vec![0.0; 4], vec![1.0, 0.0, 0.0, 0.0]), &cfg)
            .unwrap();
        assert!((proper_time_between(&r, 0.0, 2.0).unwrap() - 2.0).abs() < 1e-12);
        let r = integrate_geodesic(&m, &GeodesicState::new(vec![0.0; 4], vec![2.0, 0.0, 0.0, 0.0]), &cfg)
            .unwrap();
        assert!((proper_time_between(&r, 0.0, 1.0).unwrap() - 2.0).abs() < 1e-12);
        let null = integrate_geodesic(&m, &GeodesicState::new(vec![0.0; 4], vec![1.0, 1.0, 0.0, 0.0]), &cfg)
            .unwrap();
        assert!(matches!(
            proper_time_between(&null, 0.0, 1.0),
            Err(LabError::Contract(_))
        ));
    }

    #[test]
    fn circular_orbit_angular_velocity() {
        let s = circular_orbit_init(3, 1.0, 6.0).unwrap();
        assert!((s.v[3] / s.v[0] - 1.0 / 432f64.sqrt()).abs() < 1e-15);
        assert!(matches!(
            circular_orbit_init(3, 1.0, 1.4),
            Err(LabError::Physics(_))
        ));
    }

    #[test]
    fn invalid_config_rejected() {
        let m = catalog::minkowski(1).unwrap();
        let cfg = IntegratorConfig {
            rel_tol: 0.0,
            ..Default::default()
        };
        let s0 = GeodesicState::new(vec![0.0, 0.0], vec![1.0, 0.0]);
        assert!(matches!(
            integrate_geodesic(&m, &s0, &cfg),
            Err(LabError::InvalidConfig(_))
        ));
        let cp = catalog::clifton_pohl();
        let s0 = GeodesicState::new(vec![0.0, 0.0], vec![1.0, 0.0]);
        assert!(matches!(
            integrate_geodesic(&cp, &s0, &IntegratorConfig::default()),
            Err(LabError::Domain { .. })
        ));
    }

    #[test]
    fn clifton_pohl_blow_up() {
        let m = catalog::clifton_pohl();
        let s0 = GeodesicState::new(vec![0.0, 1.0], vec![0.0, 1.0]);
        let r = integrate_geodesic(&m, &s0, &IntegratorConfig::default()).unwrap();
        assert_eq!(r.termination, Termination::VelocityBlowUp);
        assert!(r.incompleteness_flag);
        let lb = r.blowup_parameter.unwrap();
        assert!((lb - 1.0).abs() < 1e-6, "{lb}");
        // v(λ) = 1/(1−λ)
        let s = r.state_at(0.9).unwrap();
        assert!((s.x[1] - 10.0).abs() < 1e-8);
        assert!(s.x[0].abs() < 1e-15);
    }
}
