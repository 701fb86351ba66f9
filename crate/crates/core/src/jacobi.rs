//! Jacobi fields along timelike geodesics, conjugate points, exponential maps,
//! time slices and the closed-form AdS₂ geodesics.
//!
//! Jacobi fields are carried in a parallel orthonormal frame `e₁…e_n`
//! orthogonal to `ċ`. With `A` the matrix whose columns are the fields, the
//! Jacobi equation reads `Ä = −𝓡A`, `𝓡_ij = ⟨R(e_j, ċ)ċ, e_i⟩`, and
//! `tr 𝓡 = Ric(ċ, ċ)`. Position, velocity, frame, `A` and `Ȧ` are integrated
//! as one system so every quantity shares the step control and dense output.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::catalog::ScaleFactor;
use crate::curvature;
use crate::dual::{Dual, Real, D1, D2};
use crate::error::{LabError, Result};
use crate::geodesic::{self, GeodesicResult, GeodesicState, IntegratorConfig, Termination};
use crate::geometry::{self, ChartedSpacetime, Event};
use crate::linalg;
use crate::ode::{self, Control, DenseOutput, OdeEnd, OdeOptions};

/// Initial data of the Jacobi matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum JacobiMode {
    /// `A(0) = 0`, `Ȧ(0) = I`: variations through geodesics from one point.
    FromPoint,
    /// `A(0) = I`, `Ȧ(0) = K₀`: the normal congruence of a slice with shape
    /// operator `K₀` (frame components, `n × n`, row-major).
    FromSlice(Vec<f64>),
    /// As [`JacobiMode::FromSlice`] but with `K₀` given as a mixed coordinate
    /// tensor `K^μ_ν` (`dim × dim`); converted to the frame at the start.
    FromSliceCoordinates(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct JacobiBundle {
    pub base: GeodesicResult,
    pub mode: JacobiMode,
    /// `Ȧ(0)` in frame components (`K₀` for slices, `I` from a point).
    pub k0: Vec<f64>,
    pub n: usize,
    pub dim: usize,
    pub t0: f64,
    pub dense: DenseOutput,
    /// Parameter up to which the bundle was propagated (relative to `t0`).
    pub t_end: f64,
    /// `max ‖ȦᵀA − AᵀȦ − C₀‖∞` over the accepted steps.
    pub wronskian_drift: f64,
}

/// The bundle evaluated at one parameter.
#[derive(Clone, Debug)]
pub struct JacobiPoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    /// Frame vectors, one row of `dim` components per vector.
    pub frame: Vec<Vec<f64>>,
    pub a: Vec<f64>,
    pub a_dot: Vec<f64>,
}

impl JacobiPoint {
    /// `K = Ȧ A⁻¹`.
    pub fn shape_operator(&self, n: usize) -> Vec<f64> {
        let (inv, _) = linalg::invert(&self.a, n);
        linalg::mat_mul(&self.a_dot, &inv, n)
    }

    pub fn det_a(&self, n: usize) -> f64 {
        linalg::det(&self.a, n)
    }
}

struct Layout {
    d: usize,
    n: usize,
}

impl Layout {
    fn x(&self) -> std::ops::Range<usize> {
        0..self.d
    }
    fn v(&self) -> std::ops::Range<usize> {
        self.d..2 * self.d
    }
    fn frame(&self, k: usize) -> std::ops::Range<usize> {
        let s = 2 * self.d + k * self.d;
        s..s + self.d
    }
    fn a(&self) -> std::ops::Range<usize> {
        let s = 2 * self.d + self.n * self.d;
        s..s + self.n * self.n
    }
    fn a_dot(&self) -> std::ops::Range<usize> {
        let s = 2 * self.d + self.n * self.d + self.n * self.n;
        s..s + self.n * self.n
    }
    fn len(&self) -> usize {
        2 * self.d + self.n * self.d + 2 * self.n * self.n
    }
}

/// `𝓡_ij = ⟨R(e_j, ċ)ċ, e_i⟩` from the Riemann tensor at a point.
pub fn tidal_matrix(g: &[f64], riem: &[f64], v: &[f64], frame: &[Vec<f64>]) -> Vec<f64> {
    let d = v.len();
    let n = frame.len();
    // w_j^ρ = R^ρ_σμν v^σ e_j^μ v^ν
    let w: Vec<Vec<f64>> = frame
        .iter()
        .map(|e| {
            (0..d)
                .map(|rho| {
                    let mut s = 0.0;
                    for sig in 0..d {
                        if v[sig] == 0.0 {
                            continue;
                        }
                        for mu in 0..d {
                            if e[mu] == 0.0 {
                                continue;
                            }
                            for nu in 0..d {
                                s += riem[((rho * d + sig) * d + mu) * d + nu] * v[sig] * e[mu] * v[nu];
                            }
                        }
                    }
                    s
                })
                .collect()
        })
        .collect();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = linalg::quad(g, &frame[i], &w[j]);
        }
    }
    out
}

/// Frame components `⟨K e_j, e_i⟩` of a mixed tensor `K^μ_ν`.
pub fn frame_components(g: &[f64], k: &[f64], frame: &[Vec<f64>]) -> Vec<f64> {
    let n = frame.len();
    let ke: Vec<Vec<f64>> = frame.iter().map(|e| linalg::mat_vec(k, e)).collect();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = linalg::quad(g, &frame[i], &ke[j]);
        }
    }
    out
}

fn wronskian(a: &[f64], ad: &[f64], n: usize) -> Vec<f64> {
    let l = linalg::mat_mul(&linalg::transpose(ad, n), a, n);
    let r = linalg::mat_mul(&linalg::transpose(a, n), ad, n);
    l.iter().zip(&r).map(|(x, y)| x - y).collect()
}

/// Propagates Jacobi fields along `geodesic` over its whole parameter range.
pub fn propagate_jacobi(
    m: &ChartedSpacetime,
    geodesic: &GeodesicResult,
    mode: JacobiMode,
    cfg: &IntegratorConfig,
) -> Result<JacobiBundle> {
    if geodesic.degraded {
        return Err(LabError::Contract(format!(
            "cannot propagate Jacobi fields along a degraded geodesic (drift {:e})",
            geodesic.conserved_drift
        )));
    }
    if geodesic.character != geometry::Causal::Timelike || (geodesic.initial_norm + 1.0).abs() > 1e-8 {
        return Err(LabError::Contract(format!(
            "Jacobi propagation needs a unit timelike geodesic (<v,v> = {})",
            geodesic.initial_norm
        )));
    }
    let d = m.dim;
    let n = d - 1;
    let lay = Layout { d, n };
    let s0 = &geodesic.samples[0];
    let g0 = m.metric_at(&s0.x);
    let full = geometry::orthonormal_frame(&g0, &s0.v)?;
    let frame0: Vec<Vec<f64>> = full[1..].to_vec();

    let mut ident = vec![0.0; n * n];
    for i in 0..n {
        ident[i * n + i] = 1.0;
    }
    let (a0, k0) = match &mode {
        JacobiMode::FromPoint => (vec![0.0; n * n], ident.clone()),
        JacobiMode::FromSlice(k) => {
            if k.len() != n * n {
                return Err(LabError::Usage(format!("K0 must be {n}x{n}")));
            }
            (ident.clone(), k.clone())
        }
        JacobiMode::FromSliceCoordinates(k) => {
            if k.len() != d * d {
                return Err(LabError::Usage(format!("K must be {d}x{d}")));
            }
            (ident.clone(), frame_components(&g0, k, &frame0))
        }
    };
    let mut y0 = vec![0.0; lay.len()];
    y0[lay.x()].copy_from_slice(&s0.x);
    y0[lay.v()].copy_from_slice(&s0.v);
    for (k, e) in frame0.iter().enumerate() {
        y0[lay.frame(k)].copy_from_slice(e);
    }
    y0[lay.a()].copy_from_slice(&a0);
    y0[lay.a_dot()].copy_from_slice(&k0);

    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| -> std::result::Result<(), ()> {
        let x = &y[lay.x()];
        let v = &y[lay.v()];
        if !m.contains(x, cfg.domain_margin) {
            return Err(());
        }
        let gam = curvature::christoffel(m, x).map_err(|_| ())?;
        let riem = curvature::riemann(m, x).map_err(|_| ())?;
        let g = m.metric_at(x);
        let frame: Vec<Vec<f64>> = (0..n).map(|k| y[lay.frame(k)].to_vec()).collect();
        dy[lay.x()].copy_from_slice(v);
        dy[lay.v()].copy_from_slice(&geodesic::acceleration(&gam, v));
        for (k, e) in frame.iter().enumerate() {
            let r = lay.frame(k);
            for l in 0..d {
                let mut s = 0.0;
                for mu in 0..d {
                    for nu in 0..d {
                        s += gam[(l * d + mu) * d + nu] * v[mu] * e[nu];
                    }
                }
                dy[r.start + l] = -s;
            }
        }
        let tidal = tidal_matrix(&g, &riem, v, &frame);
        let a = &y[lay.a()];
        let acc = linalg::mat_mul(&tidal, a, n);
        let ad = y[lay.a_dot()].to_vec();
        dy[lay.a()].copy_from_slice(&ad);
        for (o, c) in dy[lay.a_dot()].iter_mut().zip(&acc) {
            *o = -c;
        }
        if dy.iter().any(|c| !c.is_finite()) {
            return Err(());
        }
        Ok(())
    };

    let w0 = wronskian(&a0, &k0, n);
    let mut wdrift: f64 = 0.0;
    let monitor = |seg: &ode::Segment| -> Control<()> {
        let y = seg.end();
        let w = wronskian(&y[lay.a()], &y[lay.a_dot()], n);
        let dev = w.iter().zip(&w0).fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        wdrift = wdrift.max(dev);
        Control::Continue
    };
    let opts = OdeOptions {
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        max_step: cfg.max_step,
        min_step: cfg.min_step,
        initial_step: None,
        max_steps: 5_000_000,
    };
    let t0 = s0.lambda;
    let run = ode::dopri5(rhs, t0, &y0, geodesic.lambda_end(), &opts, monitor);
    if let OdeEnd::Rejected(()) = run.end {
        return Err(LabError::Numerical(
            "Jacobi system refused its initial state".into(),
        ));
    }
    Ok(JacobiBundle {
        base: geodesic.clone(),
        mode,
        k0,
        n,
        dim: d,
        t0,
        t_end: run.t_final - t0,
        dense: run.dense,
        wronskian_drift: wdrift,
    })
}

impl JacobiBundle {
    /// Bundle at parameter `t` (measured from the start of the geodesic).
    pub fn at(&self, t: f64) -> Option<JacobiPoint> {
        let lay = Layout {
            d: self.dim,
            n: self.n,
        };
        let y = if t == 0.0 && self.dense.segments.is_empty() {
            return None;
        } else {
            self.dense.eval(self.t0 + t)?
        };
        Some(JacobiPoint {
            t,
            x: y[lay.x()].to_vec(),
            v: y[lay.v()].to_vec(),
            frame: (0..self.n).map(|k| y[lay.frame(k)].to_vec()).collect(),
            a: y[lay.a()].to_vec(),
            a_dot: y[lay.a_dot()].to_vec(),
        })
    }

    pub fn det_at(&self, t: f64) -> Option<f64> {
        self.at(t).map(|p| p.det_a(self.n))
    }

    /// `𝓡(t)` recomputed from the curvature engine at the bundle's point.
    pub fn tidal_at(&self, m: &ChartedSpacetime, t: f64) -> Result<Vec<f64>> {
        let p = self
            .at(t)
            .ok_or_else(|| LabError::Usage(format!("t = {t} outside the bundle")))?;
        let riem = curvature::riemann(m, &p.x)?;
        Ok(tidal_matrix(&m.metric_at(&p.x), &riem, &p.v, &p.frame))
    }
}

#[derive(Clone, Debug)]
pub struct ConjugateReport {
    pub t_star: Option<f64>,
    /// `(t, det A(t))` on the scan grid.
    pub det_trace: Vec<(f64, f64)>,
    pub refinement: f64,
    /// A near-zero local minimum of `|det A|` without a sign change was seen.
    pub grazing: bool,
    /// Upper end of the scan (the bundle may end before the requested `t_max`).
    pub scanned_to: f64,
}

/// First zero of `det A` on `(0, t_max]`: sign-change scan on `resolution`
/// intervals, then bisection to a bracket of `1e-10`.
pub fn first_conjugate(bundle: &JacobiBundle, t_max: f64, resolution: usize) -> ConjugateReport {
    let t_hi = t_max.min(bundle.t_end);
    let steps = resolution.max(2);
    let dt = t_hi / steps as f64;
    let det = |t: f64| bundle.det_at(t).unwrap_or(f64::NAN);
    let mut trace = Vec::with_capacity(steps + 1);
    let start = match bundle.mode {
        JacobiMode::FromPoint => 1,
        _ => 0,
    };
    let mut prev: Option<(f64, f64)> = None;
    let mut t_star = None;
    let mut refinement = 0.0;
    let mut peak: f64 = 0.0;
    let mut grazing = false;
    for k in start..=steps {
        let t = if k == steps { t_hi } else { k as f64 * dt };
        let v = det(t);
        if !v.is_finite() {
            break;
        }
        trace.push((t, v));
        peak = peak.max(v.abs());
        if let Some((tp, vp)) = prev {
            if v == 0.0 || vp.signum() != v.signum() {
                let (mut a, mut b) = (tp, t);
                let sa = vp.signum();
                if v == 0.0 {
                    a = t;
                    b = t;
                }
                while b - a > 1e-10 {
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b {
                        break;
                    }
                    let dm = det(mid);
                    if dm != 0.0 && dm.signum() == sa {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                refinement = b - a;
                t_star = Some(0.5 * (a + b));
                break;
            }
        }
        prev = Some((t, v));
    }
    if t_star.is_none() && trace.len() >= 3 {
        let tol = 1e-8 * peak.max(f64::MIN_POSITIVE);
        for w in trace.windows(3) {
            let (a, b, c) = (w[0].1.abs(), w[1].1.abs(), w[2].1.abs());
            if b < tol && b <= a && b <= c {
                grazing = true;
                break;
            }
        }
    }
    ConjugateReport {
        t_star,
        det_trace: trace,
        refinement,
        grazing,
        scanned_to: t_hi,
    }
}

/// `exp_p(t·v)`: the point at parameter `t` along the geodesic from `p` with
/// initial velocity `v`.
pub fn exp_map<'a>(
    m: &'a ChartedSpacetime,
    p: &[f64],
    v: &[f64],
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<Event<'a>> {
    if !(t >= 0.0) {
        return Err(LabError::Usage("exp_map needs t >= 0".into()));
    }
    let cfg = IntegratorConfig {
        lambda_max: t,
        max_step: cfg.max_step.min(t.max(1e-300)),
        ..cfg.clone()
    };
    if t == 0.0 {
        return Event::new(m, p.to_vec());
    }
    let r = geodesic::integrate_geodesic(m, &GeodesicState::new(p.to_vec(), v.to_vec()), &cfg)?;
    if r.termination != Termination::ReachedParameterBound {
        return Err(LabError::Incomplete {
            requested: t,
            reached: r.lambda_end(),
            result: Box::new(r),
        });
    }
    Event::new(m, r.last().x.clone())
}

/// `exp(t, x)` from a slice: follows the unit normal (future, or past if
/// `past`) from `x` for proper time `t`.
pub fn exp_from_slice<'a>(
    m: &'a ChartedSpacetime,
    slice: &dyn Slice,
    x: &[f64],
    t: f64,
    past: bool,
    cfg: &IntegratorConfig,
) -> Result<Event<'a>> {
    let mut nrm = slice.normal(m, x)?;
    if past {
        nrm.iter_mut().for_each(|c| *c = -*c);
    }
    exp_map(m, x, &nrm, t, cfg)
}

// --- slices ------------------------------------------------------------------

/// A spacelike hypersurface through a point, known through its future unit
/// normal and shape operator there.
pub trait Slice: Send + Sync {
    fn name(&self) -> String;
    /// Future unit normal `N` at `x`.
    fn normal(&self, m: &ChartedSpacetime, x: &[f64]) -> Result<Vec<f64>>;
    /// Shape operator `K^μ_ν = ∇_ν N^μ` of the slice through `x` (mixed,
    /// `dim × dim`).
    fn shape_operator(&self, m: &ChartedSpacetime, x: &[f64]) -> Result<Vec<f64>>;
    /// Expansion `θ = tr K` for the future normal.
    fn expansion(&self, m: &ChartedSpacetime, x: &[f64]) -> Result<f64> {
        Ok(linalg::trace(&self.shape_operator(m, x)?, m.dim))
    }
}

/// Level sets `t = const` of an FLRW model.
pub struct FlrwSlice {
    pub scale: Arc<dyn ScaleFactor>,
}

impl Slice for FlrwSlice {
    fn name(&self) -> String {
        "flrw-time".into()
    }
    fn normal(&self, m: &ChartedSpacetime, _x: &[f64]) -> Result<Vec<f64>> {
        let mut nrm = vec![0.0; m.dim];
        nrm[0] = 1.0;
        Ok(nrm)
    }
    fn shape_operator(&self, m: &ChartedSpacetime, x: &[f64]) -> Result<Vec<f64>> {
        m.require_domain(x)?;
        let h = self.scale.derivative(x[0], 1) / self.scale.derivative(x[0], 0);
        let d = m.dim;
        let mut k = vec![0.0; d * d];
        for i in 1..d {
            k[i * d + i] = h;
        }
        Ok(k)
    }
}

/// Hyperboloids `τ = const` of the Milne universe.
pub struct MilneSlice;

impl Slice for MilneSlice {
    fn name(&self) -> String {
        "milne-tau".into()
    }
    fn normal(&self, m: &ChartedSpacetime, x: &[f64]) -> Result<Vec<f64>> {
        m.require_domain(x)?;
        let tau = crate::catalog::milne_tau(x);
        Ok(x.iter().map(|c| c / tau).collect())
    }
    fn shape_operator(&self, m: &ChartedSpacetime, x: &[f64]) -> Result<Vec<f64>> {
        m.require_domain(x)?;
        let tau = crate::catalog::milne_tau(x);
        let d = m.dim;
        let g = m.metric_at(x);
        let nu: Vec<f64> = x.iter().map(|c| c / tau).collect();
        let nl = linalg::mat_vec(&g, &nu);
        let mut k = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                let delta = if i == j { 1.0 } else { 0.0 };
                k[i * d + j] = (delta + nu[i] * nl[j]) / tau;
            }
        }
        Ok(k)
    }
}

/// A slice known only through its initial data at one event: normal along
/// the time orientation and isotropic shape operator `K = (θ/n)(δ + N N♭)`.
/// In Minkowski space these are the hyperboloids centred on the event where
/// the normal congruence refocuses (`θ < 0`) or from which it emanates.
pub struct IsotropicSlice {
    pub expansion: f64,
}

impl Slice for IsotropicSlice {
    fn name(&self) -> String {
        "isotropic".into()
    }
    fn normal(&self, m: &ChartedSpacetime, x: &[f64]) -> Result<Vec<f64>> {
        m.require_domain(x)?;
        geometry::normalize_timelike(&m.metric_at(x), &m.time_orientation(x))
    }
    fn shape_operator(&self, m: &ChartedSpacetime, x: &[f64]) -> Result<Vec<f64>> {
        let nu = self.normal(m, x)?;
        let nl = linalg::mat_vec(&m.metric_at(x), &nu);
        let d = m.dim;
        let c = self.expansion / m.n() as f64;
        let mut k = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                let delta = if i == j { 1.0 } else { 0.0 };
                k[i * d + j] = c * (delta + nu[i] * nl[j]);
            }
        }
        Ok(k)
    }
}

/// Slices `r = const` of the Schwarzschild interior, where `r` is a time
/// coordinate decreasing to the future.
pub struct SchwarzschildInteriorSlice {
    pub n: usize,
    pub rs: f64,
}

impl SchwarzschildInteriorSlice {
    fn lapse(&self, r: f64) -> f64 {
        ((self.rs / r).powi(self.n as i32 - 2) - 1.0).sqrt()
    }

    /// `θ(r) = −(n−1)L/r + (n−2) r_s^{n−2} / (2 r^{n−1} L)`, `L = ((r_s/r)^{n−2} − 1)^{1/2}`.
    pub fn closed_form_expansion(&self, r: f64) -> f64 {
        let l = self.lapse(r);
        let nf = self.n as f64;
        -(nf - 1.0) * l / r + (nf - 2.0) * self.rs.powi(self.n as i32 - 2) / (2.0 * r.powi(self.n as i32 - 1) * l)
    }
}

impl Slice for SchwarzschildInteriorSlice {
    fn name(&self) -> String {
        "schwarzschild-r".into()
    }
    fn normal(&self, m: &ChartedSpacetime, x: &[f64]) -> Result<Vec<f64>> {
        m.require_domain(x)?;
        let mut nrm = vec![0.0; m.dim];
        nrm[1] = -self.lapse(x[1]);
        Ok(nrm)
    }
    fn shape_operator(&self, m: &ChartedSpacetime, x: &[f64]) -> Result<Vec<f64>> {
        m.require_domain(x)?;
        let r = x[1];
        let l = self.lapse(r);
        let d = m.dim;
        let mut k = vec![0.0; d * d];
        k[0] = (self.n as f64 - 2.0) * self.rs.powi(self.n as i32 - 2)
            / (2.0 * r.powi(self.n as i32 - 1) * l);
        for i in 2..d {
            k[i * d + i] = -l / r;
        }
        Ok(k)
    }
}

/// A scalar function written against [`Real`], increasing towards the future.
pub trait TimeFunction: Send + Sync {
    fn eval<S: Real>(&self, x: &[S]) -> S;
}

/// Level sets of a time function; normal and shape operator by dual numbers.
pub struct LevelSetSlice<F: TimeFunction>(pub F);

impl<F: TimeFunction> LevelSetSlice<F> {
    /// Future unit normal `−∇f / |∇f|` at a `D1` point.
    fn normal_d1(&self, m: &ChartedSpacetime, x: &[D1]) -> Result<Vec<D1>> {
        let d = x.len();
        let grad: Vec<D1> = (0..d)
            .map(|k| {
                let xk: Vec<D2> = x
                    .iter()
                    .enumerate()
                    .map(|(i, &xi)| Dual::new(xi, D1::cst(if i == k { 1.0 } else { 0.0 })))
                    .collect();
                self.0.eval(&xk).eps
            })
            .collect();
        let g = m.metric.eval_d1(x);
        let (ginv, ratio) = linalg::invert(&g, d);
        if !(ratio > curvature::DEGENERACY_RATIO) {
            return Err(LabError::Degenerate {
                coords: x.iter().map(|c| c.re).collect(),
                ratio,
            });
        }
        let up: Vec<D1> = (0..d)
            .map(|i| {
                let mut s = D1::zero();
                for j in 0..d {
                    s += ginv[i * d + j] * grad[j];
                }
                s
            })
            .collect();
        let mut q = D1::zero();
        for i in 0..d {
            q += up[i] * grad[i];
        }
        if !(q.re < 0.0) {
            return Err(LabError::Contract(
                "time function gradient is not timelike".into(),
            ));
        }
        let s = (-q).sqrt().recip();
        Ok(up.into_iter().map(|c| -c * s).collect())
    }
}

impl<F: TimeFunction> Slice for LevelSetSlice<F> {
    fn name(&self) -> String {
        "level-set".into()
    }
    fn normal(&self, m: &ChartedSpacetime, x: &[f64]) -> Result<Vec<f64>> {
        m.require_domain(x)?;
        let xd: Vec<D1> = x.iter().map(|&c| D1::cst(c)).collect();
        Ok(self.normal_d1(m, &xd)?.into_iter().map(|c| c.re).collect())
    }
    fn shape_operator(&self, m: &ChartedSpacetime, x: &[f64]) -> Result<Vec<f64>> {
        m.require_domain(x)?;
        let d = m.dim;
        let gam = curvature::christoffel(m, x)?;
        let mut k = vec![0.0; d * d];
        let mut nrm = Vec::new();
        for nu in 0..d {
            let nd = self.normal_d1(m, &crate::dual::seed(x, nu))?;
            if nu == 0 {
                nrm = nd.iter().map(|c| c.re).collect();
            }
            for mu in 0..d {
                k[mu * d + nu] = nd[mu].eps;
            }
        }
        for mu in 0..d {
            for nu in 0..d {
                let mut s = 0.0;
                for l in 0..d {
                    s += gam[(mu * d + nu) * d + l] * nrm[l];
                }
                k[mu * d + nu] += s;
            }
        }
        Ok(k)
    }
}

// --- AdS₂ closed-form geodesics ---------------------------------------------

/// A geodesic of AdS₂ obtained from the embedding `u² + v² − w² = α²` in
/// `ℝ^{2,1}` (metric `−du² − dv² + dw²`): it is the intersection of the
/// hyperboloid with the plane spanned by the position `P` and the velocity `V`.
#[derive(Clone, Debug)]
pub struct Ads2Geodesic {
    pub alpha: f64,
    pub p: [f64; 3],
    pub v: [f64; 3],
    /// `⟨V, V⟩` in the ambient metric (sign gives the causal character).
    pub q: f64,
    t0: f64,
}

fn ambient(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    -a[0] * b[0] - a[1] * b[1] + a[2] * b[2]
}

impl Ads2Geodesic {
    fn point(&self, s: f64) -> [f64; 3] {
        let (c, sn) = if self.q < 0.0 {
            let w = (-self.q).sqrt() / self.alpha;
            ((w * s).cos(), (w * s).sin() / w)
        } else if self.q > 0.0 {
            let w = self.q.sqrt() / self.alpha;
            ((w * s).cosh(), (w * s).sinh() / w)
        } else {
            (1.0, s)
        };
        [
            self.p[0] * c + self.v[0] * sn,
            self.p[1] * c + self.v[1] * sn,
            self.p[2] * c + self.v[2] * sn,
        ]
    }

    /// Chart coordinates `(t, x)` at affine parameter `s` (same
    /// normalization as the initial velocity).
    pub fn eval(&self, s: f64) -> [f64; 2] {
        // follow the phase of u + iv continuously from s = 0
        let w = self.q.abs().sqrt() / self.alpha;
        let steps = ((s.abs() * (w + 1.0)) * 32.0).ceil() as usize + 8;
        let mut t = self.t0;
        let mut prev = {
            let e = self.point(0.0);
            e[1].atan2(e[0])
        };
        for k in 1..=steps {
            let e = self.point(s * k as f64 / steps as f64);
            let ang = e[1].atan2(e[0]);
            let mut dphi = ang - prev;
            while dphi > PI {
                dphi -= 2.0 * PI;
            }
            while dphi < -PI {
                dphi += 2.0 * PI;
            }
            t += dphi;
            prev = ang;
        }
        let e = self.point(s);
        [t, (e[2] / self.alpha).atan()]
    }
}

/// Closed-form geodesic of AdS₂ through `p = (t, x)` with velocity `v`.
pub fn ads2_geodesic_oracle(alpha: f64, p: [f64; 2], v: [f64; 2]) -> Result<Ads2Geodesic> {
    if v == [0.0, 0.0] {
        return Err(LabError::Usage("ads2 oracle needs a nonzero velocity".into()));
    }
    let (t, x) = (p[0], p[1]);
    let (ct, st, cx, sx) = (t.cos(), t.sin(), x.cos(), x.sin());
    let pe = [alpha * ct / cx, alpha * st / cx, alpha * sx / cx];
    let jt = [-alpha * st / cx, alpha * ct / cx, 0.0];
    let jx = [
        alpha * ct * sx / (cx * cx),
        alpha * st * sx / (cx * cx),
        alpha / (cx * cx),
    ];
    let ve = [
        jt[0] * v[0] + jx[0] * v[1],
        jt[1] * v[0] + jx[1] * v[1],
        jt[2] * v[0] + jx[2] * v[1],
    ];
    let q = ambient(&ve, &ve);
    Ok(Ads2Geodesic {
        alpha,
        p: pe,
        v: ve,
        q,
        t0: t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn unit_geodesic(m: &ChartedSpacetime, x: Vec<f64>, v: Vec<f64>, l: f64) -> GeodesicResult {
        let g = m.metric_at(&x);
        let v = geometry::normalize_timelike(&g, &v).unwrap();
        geodesic::integrate_geodesic(m, &GeodesicState::new(x, v), &IntegratorConfig::default().with_lambda_max(l))
            .unwrap()
    }

    #[test]
    fn minkowski_from_point_is_linear() {
        let m = catalog::minkowski(3).unwrap();
        let geo = unit_geodesic(&m, vec![0.0; 4], vec![1.0, 0.2, 0.0, 0.1], 3.0);
        let b = propagate_jacobi(&m, &geo, JacobiMode::FromPoint, &IntegratorConfig::default()).unwrap();
        let p = b.at(2.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 2.0 } else { 0.0 };
                assert!((p.a[i * 3 + j] - e).abs() < 1e-12);
            }
        }
        assert!(first_conjugate(&b, 3.0, 2048).t_star.is_none());
    }

    #[test]
    fn marginal_slice_focuses_at_one() {
        let m = catalog::minkowski(3).unwrap();
        let geo = unit_geodesic(&m, vec![0.0; 4], vec![1.0, 0.0, 0.0, 0.0], 2.0);
        let k0 = vec![-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0];
        let b = propagate_jacobi(&m, &geo, JacobiMode::FromSlice(k0), &IntegratorConfig::default()).unwrap();
        let r = first_conjugate(&b, 2.0, 2048);
        assert!((r.t_star.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ads2_refocuses_at_pi() {
        let m = catalog::ads2(1.0).unwrap();
        let geo = unit_geodesic(&m, vec![0.0, 0.0], vec![1.0, 0.0], 4.0);
        let b = propagate_jacobi(&m, &geo, JacobiMode::FromPoint, &IntegratorConfig::default()).unwrap();
        let r = first_conjugate(&b, 4.0, 2048);
        assert!((r.t_star.unwrap() - PI).abs() < 1e-4);
        assert!(b.wronskian_drift < 1e-8);
    }

    #[test]
    fn ads2_oracle_central_geodesic() {
        let o = ads2_geodesic_oracle(1.0, [0.0, 0.0], [1.0, 0.0]).unwrap();
        for &s in &[0.5, 2.0, 4.0] {
            let [t, x] = o.eval(s);
            assert!((t - s).abs() < 1e-12 && x.abs() < 1e-12);
        }
    }

    #[test]
    fn level_set_slice_matches_milne_closed_form() {
        struct Tau;
        impl TimeFunction for Tau {
            fn eval<S: Real>(&self, x: &[S]) -> S {
                let mut s = x[0] * x[0];
                for c in &x[1..] {
                    s -= *c * *c;
                }
                s.sqrt()
            }
        }
        let m = catalog::milne(3).unwrap();
        let x = [2.0, 0.3, -0.5, 0.7];
        let a = LevelSetSlice(Tau).shape_operator(&m, &x).unwrap();
        let b = MilneSlice.shape_operator(&m, &x).unwrap();
        for i in 0..16 {
            assert!((a[i] - b[i]).abs() < 1e-12, "{i}: {} {}", a[i], b[i]);
        }
        let na = LevelSetSlice(Tau).normal(&m, &x).unwrap();
        let nb = MilneSlice.normal(&m, &x).unwrap();
        for i in 0..4 {
            assert!((na[i] - nb[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn schwarzschild_slice_expansion_formula() {
        let m = catalog::schwarzschild(3, 1.0, catalog::Region::Interior).unwrap();
        let s = SchwarzschildInteriorSlice { n: 3, rs: 1.0 };
        let x = [0.0, 0.1, 1.2, 0.4];
        assert!((s.expansion(&m, &x).unwrap() + 130.0 / 3.0).abs() < 1e-12);
        struct MinusR;
        impl TimeFunction for MinusR {
            fn eval<S: Real>(&self, x: &[S]) -> S {
                -x[1]
            }
        }
        let k = LevelSetSlice(MinusR).shape_operator(&m, &x).unwrap();
        let k2 = s.shape_operator(&m, &x).unwrap();
        for i in 0..16 {
            assert!((k[i] - k2[i]).abs() < 1e-9 * (1.0 + k2[i].abs()), "{i}");
        }
    }

    #[test]
    fn exp_map_incomplete_in_schwarzschild_interior() {
        let m = catalog::schwarzschild(3, 1.0, catalog::Region::Interior).unwrap();
        let s = SchwarzschildInteriorSlice { n: 3, rs: 1.0 };
        let x = [0.0, 0.999, 1.0, 0.0];
        let e = exp_from_slice(&m, &s, &x, 2.0, false, &IntegratorConfig::default());
        match e {
            Err(LabError::Incomplete { reached, result, .. }) => {
                assert!(reached < PI / 2.0);
                assert!(result.incompleteness_flag);
            }
            other => panic!("expected incompleteness, got {other:?}"),
        }
    }
}
