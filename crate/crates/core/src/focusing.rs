//! Congruence expansion, the Raychaudhuri identity, the Riccati comparison
//! bound, FLRW scale factors and end-to-end singularity scenarios.

use std::sync::Arc;

use crate::catalog::ScaleFactor;
use crate::curvature::{self, SecVerdict};
use crate::dual::Dual;
use crate::error::{LabError, Result};
use crate::exec::Execution;
use crate::geodesic::{self, GeodesicState, IntegratorConfig, Termination};
use crate::geometry::ChartedSpacetime;
use crate::jacobi::{self, ConjugateReport, JacobiMode, Slice};
use crate::linalg;
use crate::ode::{self, Control, DenseOutput, OdeEnd, OdeOptions};

// --- scale factor --------------------------------------------------------------

/// Solution of `ȧ²/2 − α/a^{n−2} = −k/2`, integrated in its second-order form
/// `ä = −(n−2)α/a^{n−1}` (smooth through turning points) in both directions
/// from `t₀`. Within `10⁻⁶ a₀` of a zero of `a` the leading-order branch
/// `a^{n/2} = (n/2)(2α)^{1/2} |t − t_*|` takes over.
#[derive(Clone, Debug)]
pub struct ScaleFactorSolution {
    pub n: usize,
    pub k: i32,
    pub alpha: f64,
    pub t0: f64,
    pub a0: f64,
    pub t_bang: Option<f64>,
    pub t_crunch: Option<f64>,
    forward: DenseOutput,
    backward: DenseOutput,
    t_lo: f64,
    t_hi: f64,
}

struct Branch {
    end: Option<f64>,
    dense: DenseOutput,
    reach: f64,
}

fn integrate_branch(n: usize, alpha: f64, a0: f64, adot0: f64, t0: f64, t1: f64) -> Result<Branch> {
    let c = (n as f64 - 2.0) * alpha;
    let nexp = n as i32 - 1;
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| -> std::result::Result<(), ()> {
        if !(y[0] > 0.0) {
            return Err(());
        }
        dy[0] = y[1];
        dy[1] = -c / y[0].powi(nexp);
        Ok(())
    };
    let floor = 1e-6 * a0;
    let monitor = |seg: &ode::Segment| -> Control<()> {
        if seg.end()[0] < floor {
            Control::Stop(())
        } else {
            Control::Continue
        }
    };
    let opts = OdeOptions {
        rel_tol: 1e-13,
        abs_tol: 1e-15,
        max_step: 0.05 * (1.0 + (t1 - t0).abs()),
        ..OdeOptions::default()
    };
    let run = ode::dopri5(rhs, t0, &[a0, adot0], t1, &opts, monitor);
    let lead = (n as f64 / 2.0) * (2.0 * alpha).sqrt();
    let dir = (t1 - t0).signum();
    match run.end {
        OdeEnd::Reached => Ok(Branch {
            end: None,
            dense: run.dense,
            reach: run.t_final,
        }),
        OdeEnd::Stopped(()) | OdeEnd::Underflow(_) => {
            let a = run.y_final[0].max(0.0);
            let zero = run.t_final + dir * a.powf(n as f64 / 2.0) / lead;
            Ok(Branch {
                end: Some(zero),
                dense: run.dense,
                reach: run.t_final,
            })
        }
        _ => Err(LabError::Numerical(
            "scale factor integration failed".into(),
        )),
    }
}

/// Solves the FLRW energy equation with `a(t₀) = a₀` and the sign of `ȧ(t₀)`
/// given by `expanding`, over `(t_lo, t_hi) ∋ t₀`.
pub fn solve_scale_factor(
    n: usize,
    k: i32,
    alpha: f64,
    a0: f64,
    expanding: bool,
    t0: f64,
    range: (f64, f64),
) -> Result<ScaleFactorSolution> {
    if n < 2 || !(-1..=1).contains(&k) {
        return Err(LabError::InvalidParameter("scale factor needs n >= 2, k in {-1,0,1}".into()));
    }
    if !(a0 > 0.0) || !(alpha >= 0.0) {
        return Err(LabError::InvalidParameter("need a0 > 0 and alpha >= 0".into()));
    }
    if !(range.0 < t0 && t0 < range.1) {
        return Err(LabError::InvalidParameter(format!(
            "t0 = {t0} must lie inside ({}, {})",
            range.0, range.1
        )));
    }
    let e = 2.0 * alpha / a0.powi(n as i32 - 2) - k as f64;
    if e < 0.0 {
        return Err(LabError::Physics(format!(
            "inconsistent initial data: alpha/a0^(n-2) - k/2 = {} < 0",
            e / 2.0
        )));
    }
    let adot0 = if expanding { e.sqrt() } else { -e.sqrt() };
    let fwd = integrate_branch(n, alpha, a0, adot0, t0, range.1)?;
    let bwd = integrate_branch(n, alpha, a0, adot0, t0, range.0)?;
    Ok(ScaleFactorSolution {
        n,
        k,
        alpha,
        t0,
        a0,
        t_bang: bwd.end,
        t_crunch: fwd.end,
        t_lo: bwd.end.unwrap_or(bwd.reach),
        t_hi: fwd.end.unwrap_or(fwd.reach),
        forward: fwd.dense,
        backward: bwd.dense,
    })
}

impl ScaleFactorSolution {
    fn leading_order(&self, s: f64, order: usize) -> f64 {
        // a = C s^p with s the distance to the zero, p = 2/n
        let nf = self.n as f64;
        let p = 2.0 / nf;
        let c = ((nf / 2.0) * (2.0 * self.alpha).sqrt()).powf(p);
        let mut coef = c;
        for j in 0..order {
            coef *= p - j as f64;
        }
        coef * s.powf(p - order as f64)
    }

    /// `ȧ²/2 − α/a^{n−2} + k/2`, divided by `max(1, α/a^{n−2})`.
    pub fn energy_residual(&self, t: f64) -> f64 {
        let a = self.derivative(t, 0);
        let ad = self.derivative(t, 1);
        let pot = self.alpha / a.powi(self.n as i32 - 2);
        (0.5 * ad * ad - pot + 0.5 * self.k as f64).abs() / pot.max(1.0)
    }

    /// Time and value of the largest `a`, located where `ȧ` changes sign on
    /// the dense output (for recollapsing models).
    pub fn max_scale(&self) -> (f64, f64) {
        let mut best = (self.t0, self.a0);
        for seg in self.forward.segments.iter().chain(&self.backward.segments) {
            let (ta, tb) = if seg.h > 0.0 { (seg.t0, seg.t1()) } else { (seg.t1(), seg.t0) };
            let (da, db) = (seg.eval(ta)[1], seg.eval(tb)[1]);
            let cand = if da >= 0.0 && db <= 0.0 {
                let (mut lo, mut hi) = (ta, tb);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if seg.eval(mid)[1] > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let t = 0.5 * (lo + hi);
                (t, seg.eval(t)[0])
            } else {
                let e = seg.end();
                (seg.t1(), e[0])
            };
            if cand.1 > best.1 {
                best = cand;
            }
        }
        best
    }
}

impl ScaleFactor for ScaleFactorSolution {
    fn derivative(&self, t: f64, order: usize) -> f64 {
        let nf = self.n as f64;
        let from_state = |a: f64, ad: f64| -> f64 {
            match order {
                0 => a,
                1 => ad,
                2 => -(nf - 2.0) * self.alpha / a.powi(self.n as i32 - 1),
                3 => (nf - 2.0) * (nf - 1.0) * self.alpha * ad / a.powi(self.n as i32),
                _ => f64::NAN,
            }
        };
        let dense = if t >= self.t0 { &self.forward } else { &self.backward };
        if let Some(y) = dense.eval(t) {
            return from_state(y[0], y[1]);
        }
        if let (Some(tb), Some(te)) = (self.t_bang, self.backward.t_end()) {
            if t > tb && t < te {
                return self.leading_order(t - tb, order);
            }
        }
        if let (Some(tc), Some(te)) = (self.t_crunch, self.forward.t_end()) {
            if t < tc && t > te {
                let sign = if order % 2 == 1 { -1.0 } else { 1.0 };
                return sign * self.leading_order(tc - t, order);
            }
        }
        f64::NAN
    }

    fn interval(&self) -> (f64, f64) {
        (self.t_lo, self.t_hi)
    }

    fn singular_ends(&self) -> (bool, bool) {
        (self.t_bang.is_some(), self.t_crunch.is_some())
    }
}

// --- expansion -------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ExpansionConfig {
    pub t_max: f64,
    /// Follow the past-directed normal (the shape operator changes sign).
    pub past: bool,
    pub grid: usize,
    pub conjugate_resolution: usize,
    /// Trace is truncated once `|θ|` exceeds this.
    pub theta_cap: f64,
    pub integrator: IntegratorConfig,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        Self {
            t_max: 5.0,
            past: false,
            grid: 512,
            conjugate_resolution: 2048,
            theta_cap: 1e8,
            integrator: IntegratorConfig::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CongruenceTrace {
    pub n: usize,
    pub past: bool,
    pub t: Vec<f64>,
    /// `θ = tr K`.
    pub theta: Vec<f64>,
    /// `θ = (ln det A)′`, computed independently.
    pub theta_logdet: Vec<f64>,
    /// `θ′ = tr(Ä A⁻¹) − tr K²` with `Ä` from the Jacobi equation.
    pub theta_prime: Vec<f64>,
    pub tr_k2: Vec<f64>,
    pub ric_xx: Vec<f64>,
    /// `K(t)`, frame components, `n × n`.
    pub k: Vec<Vec<f64>>,
    pub theta0: f64,
    pub conjugate: ConjugateReport,
    pub geodesic_termination: Termination,
    pub geodesic_end: f64,
    pub incomplete: bool,
    /// `max |R^ρ_σμν|` over the grid.
    pub max_riemann: f64,
}

/// Expansion of the normal congruence of `slice` along the geodesic through
/// `x0`, from a slice-mode Jacobi bundle.
pub fn evolve_expansion(
    m: &ChartedSpacetime,
    slice: &dyn Slice,
    x0: &[f64],
    cfg: &ExpansionConfig,
) -> Result<CongruenceTrace> {
    let sign = if cfg.past { -1.0 } else { 1.0 };
    let nrm: Vec<f64> = slice.normal(m, x0)?.into_iter().map(|c| sign * c).collect();
    let k: Vec<f64> = slice.shape_operator(m, x0)?.into_iter().map(|c| sign * c).collect();
    let icfg = cfg.integrator.clone().with_lambda_max(cfg.t_max);
    let geo = geodesic::integrate_geodesic(m, &GeodesicState::new(x0.to_vec(), nrm), &icfg)?;
    let bundle = jacobi::propagate_jacobi(m, &geo, JacobiMode::FromSliceCoordinates(k), &icfg)?;
    let conj = jacobi::first_conjugate(&bundle, cfg.t_max, cfg.conjugate_resolution);
    let n = bundle.n;
    let mut t_lim = cfg.t_max.min(bundle.t_end);
    if let Some(ts) = conj.t_star {
        t_lim = t_lim.min(ts);
    }
    let mut tr = CongruenceTrace {
        n,
        past: cfg.past,
        t: Vec::new(),
        theta: Vec::new(),
        theta_logdet: Vec::new(),
        theta_prime: Vec::new(),
        tr_k2: Vec::new(),
        ric_xx: Vec::new(),
        k: Vec::new(),
        theta0: linalg::trace(&bundle.k0, n),
        conjugate: conj,
        geodesic_termination: geo.termination.clone(),
        geodesic_end: geo.lambda_end() - geo.samples[0].lambda,
        incomplete: geo.incompleteness_flag,
        max_riemann: 0.0,
    };
    let grid = cfg.grid.max(2);
    for i in 0..grid {
        let t = t_lim * i as f64 / grid as f64;
        let Some(p) = bundle.at(t) else { break };
        let kk = p.shape_operator(n);
        let theta = linalg::trace(&kk, n);
        if !theta.is_finite() || theta.abs() > cfg.theta_cap {
            break;
        }
        let ad: Vec<Dual<f64>> = p.a.iter().zip(&p.a_dot).map(|(&a, &b)| Dual::new(a, b)).collect();
        let dd = linalg::det(&ad, n);
        let riem = curvature::riemann(m, &p.x)?;
        let g = m.metric_at(&p.x);
        let tidal = jacobi::tidal_matrix(&g, &riem, &p.v, &regram(&g, &p.v, &p.frame));
        let k2 = linalg::trace(&linalg::mat_mul(&kk, &kk, n), n);
        let ric = curvature::ricci(m, &p.x)?;
        tr.max_riemann = tr.max_riemann.max(linalg::max_abs(&riem));
        tr.t.push(t);
        tr.theta.push(theta);
        tr.theta_logdet.push(dd.eps / dd.re);
        tr.theta_prime.push(-linalg::trace(&tidal, n) - k2);
        tr.tr_k2.push(k2);
        tr.ric_xx.push(linalg::quad(&ric, &p.v, &p.v));
        tr.k.push(kk);
    }
    Ok(tr)
}

/// Gram–Schmidt on the transported frame against `g`, with `v` projected out
/// first, so that round-off in the transport does not leak into `tr 𝓡`.
fn regram(g: &[f64], v: &[f64], frame: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let vv = linalg::quad(g, v, v);
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(frame.len());
    for e in frame {
        let mut w = e.clone();
        let c = linalg::quad(g, v, &w) / vv;
        for (wi, vi) in w.iter_mut().zip(v) {
            *wi -= c * vi;
        }
        for f in &out {
            let c = linalg::quad(g, f, &w);
            for (wi, fi) in w.iter_mut().zip(f) {
                *wi -= c * fi;
            }
        }
        let nrm = linalg::quad(g, &w, &w).sqrt();
        w.iter_mut().for_each(|c| *c /= nrm);
        out.push(w);
    }
    out
}

/// `max |θ′ + tr K² + Ric(ċ,ċ)|` over the trace.
pub fn raychaudhuri_residual(trace: &CongruenceTrace) -> f64 {
    (0..trace.t.len())
        .map(|i| (trace.theta_prime[i] + trace.tr_k2[i] + trace.ric_xx[i]).abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RiccatiCheck {
    /// SEC held along the trace and `θ₀ < 0`.
    pub applicable: bool,
    pub bound: f64,
    /// `min (1/θ − 1/θ₀ − t/n)`; non-negative up to tolerance when the
    /// comparison holds.
    pub min_slack: f64,
    pub comparison_holds: bool,
    pub t_star: Option<f64>,
    pub blows_up_by_bound: bool,
}

/// Checks `1/θ(t) ≥ 1/θ₀ + t/n` along the trace and that the congruence
/// focuses by `n/|θ₀|`.
pub fn riccati_bound_check(trace: &CongruenceTrace, theta0: f64, tol: f64) -> RiccatiCheck {
    let nf = trace.n as f64;
    let bound = nf / theta0.abs();
    let sec_ok = trace.ric_xx.iter().all(|&r| r >= -1e-8);
    let applicable = theta0 < 0.0 && sec_ok;
    let mut min_slack = f64::INFINITY;
    for (t, th) in trace.t.iter().zip(&trace.theta) {
        let slack = 1.0 / th - 1.0 / theta0 - t / nf;
        min_slack = min_slack.min(slack);
    }
    let t_star = match (trace.conjugate.t_star, trace.incomplete) {
        (Some(a), true) => Some(a.min(trace.geodesic_end)),
        (Some(a), false) => Some(a),
        (None, true) => Some(trace.geodesic_end),
        (None, false) => None,
    };
    RiccatiCheck {
        applicable,
        bound,
        min_slack,
        comparison_holds: min_slack >= -tol,
        t_star,
        blows_up_by_bound: t_star.is_some_and(|t| t <= bound + 1e-6),
    }
}

// --- scenarios -----------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    /// How far to follow the normal geodesic; defaults to twice the bound.
    pub t_max: Option<f64>,
    pub sec_samples: usize,
    pub seed: u64,
    pub exec: Execution,
    pub expansion: ExpansionConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            t_max: None,
            sec_samples: 200,
            seed: 1,
            exec: Execution::default(),
            expansion: ExpansionConfig::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FocusingReport {
    /// Expansion of the slice for its future normal.
    pub theta0: f64,
    /// The run follows the past-directed normal (`θ₀ > 0`).
    pub past: bool,
    pub sec: SecVerdict,
    pub bound: f64,
    pub conjugate_time: Option<f64>,
    pub termination: Termination,
    /// Proper time at which the normal geodesic stopped.
    pub termination_time: f64,
    pub incomplete: bool,
    /// First of conjugate point and geodesic end (when incomplete).
    pub t_star: Option<f64>,
    pub satisfied: bool,
    pub raychaudhuri_residual: f64,
    pub riccati: RiccatiCheck,
    pub max_riemann: f64,
}

/// SEC sampling, expansion, Riccati comparison and geodesic termination for
/// the normal congruence of `slice` through `x0`, run towards the side on
/// which the congruence converges.
pub fn singularity_scenario(
    m: &ChartedSpacetime,
    slice: &dyn Slice,
    x0: &[f64],
    cfg: &ScenarioConfig,
) -> Result<FocusingReport> {
    let theta0 = slice.expansion(m, x0)?;
    if !(theta0.abs() > 1e-12) {
        return Err(LabError::Physics(format!(
            "slice expansion {theta0} is not bounded away from zero"
        )));
    }
    let past = theta0 > 0.0;
    let n = m.n();
    let bound = n as f64 / theta0.abs();
    let sec = curvature::sec_sample(m, None, cfg.sec_samples, cfg.seed, cfg.exec)?;
    let ecfg = ExpansionConfig {
        t_max: cfg.t_max.unwrap_or(2.0 * bound + 1.0),
        past,
        ..cfg.expansion.clone()
    };
    let trace = evolve_expansion(m, slice, x0, &ecfg)?;
    let riccati = riccati_bound_check(&trace, -theta0.abs(), 1e-9);
    let t_star = riccati.t_star;
    Ok(FocusingReport {
        theta0,
        past,
        satisfied: t_star.is_some_and(|t| t <= bound + 1e-6),
        sec,
        bound,
        conjugate_time: trace.conjugate.t_star,
        termination: trace.geodesic_termination.clone(),
        termination_time: trace.geodesic_end,
        incomplete: trace.incomplete,
        t_star,
        raychaudhuri_residual: raychaudhuri_residual(&trace),
        riccati,
        max_riemann: trace.max_riemann,
    })
}

/// FLRW dust model with the scale factor solved from `a(t₀) = a₀`.
pub fn flrw_from_solver(
    n: usize,
    k: i32,
    alpha: f64,
    a0: f64,
    expanding: bool,
    t0: f64,
    range: (f64, f64),
) -> Result<(ChartedSpacetime, Arc<ScaleFactorSolution>)> {
    let sol = Arc::new(solve_scale_factor(n, k, alpha, a0, expanding, t0, range)?);
    let m = crate::catalog::flrw(n, k, alpha, sol.clone())?;
    Ok((m, sol))
}
