//! Proper time of arbitrary timelike curves, endpoint-fixed variations of a
//! geodesic, the `W_p` sign test and the long causal curves of AdS₂.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{LabError, Result};
use crate::exec::{self, Execution};
use crate::geodesic::{self, GeodesicResult, GeodesicState, IntegratorConfig, Termination};
use crate::geometry::{self, CausalCharacter, ChartedSpacetime, DEFAULT_NULL_TOL};
use crate::linalg;

/// A parametrized curve in chart coordinates.
pub trait Curve: Sync {
    fn domain(&self) -> (f64, f64);
    /// Point and tangent at `s`.
    fn eval(&self, s: f64) -> (Vec<f64>, Vec<f64>);
    /// Parameters, including both ends, between which the curve is smooth.
    fn pieces(&self) -> Vec<f64> {
        let (a, b) = self.domain();
        vec![a, b]
    }
}

/// A curve known at a grid of parameters through its points and tangents,
/// interpolated by cubic Hermite segments.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledCurve {
    params: Vec<f64>,
    points: Vec<Vec<f64>>,
    tangents: Vec<Vec<f64>>,
}

impl SampledCurve {
    pub fn new(params: Vec<f64>, points: Vec<Vec<f64>>, tangents: Vec<Vec<f64>>) -> Result<Self> {
        if params.len() < 2 || points.len() != params.len() || tangents.len() != params.len() {
            return Err(LabError::Usage(
                "a sampled curve needs at least two nodes with one point and tangent each".into(),
            ));
        }
        if params.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(LabError::Usage("curve parameters must be strictly increasing".into()));
        }
        let d = points[0].len();
        let ok = points.iter().chain(&tangents).all(|p| p.len() == d && p.iter().all(|c| c.is_finite()));
        if d == 0 || !ok {
            return Err(LabError::Usage("curve nodes must be finite and of one dimension".into()));
        }
        Ok(Self {
            params,
            points,
            tangents,
        })
    }

    /// Samples `f(s) = (c(s), ċ(s))` at `params`.
    pub fn from_fn(params: Vec<f64>, f: impl Fn(f64) -> (Vec<f64>, Vec<f64>)) -> Result<Self> {
        let (points, tangents) = params.iter().map(|&s| f(s)).unzip();
        Self::new(params, points, tangents)
    }

    /// Interpolates bare points with a natural cubic spline per coordinate.
    pub fn from_points(params: Vec<f64>, points: Vec<Vec<f64>>) -> Result<Self> {
        if params.len() < 2 || points.len() != params.len() {
            return Err(LabError::Usage("need at least two nodes, one point each".into()));
        }
        let d = points[0].len();
        let k = params.len();
        let mut tangents = vec![vec![0.0; d]; k];
        for mu in 0..d {
            let y: Vec<f64> = points.iter().map(|p| p.get(mu).copied().unwrap_or(f64::NAN)).collect();
            let m2 = natural_second_derivatives(&params, &y);
            for i in 0..k {
                let (j, h) = if i + 1 < k { (i, params[i + 1] - params[i]) } else { (i - 1, params[i] - params[i - 1]) };
                let slope = (y[j + 1] - y[j]) / h;
                tangents[i][mu] = if i + 1 < k {
                    slope - h * (2.0 * m2[i] + m2[i + 1]) / 6.0
                } else {
                    slope + h * (m2[j] + 2.0 * m2[i]) / 6.0
                };
            }
        }
        Self::new(params, points, tangents)
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    fn segment_of(&self, s: f64) -> usize {
        let k = self.params.len();
        self.params.partition_point(|&p| p <= s).clamp(1, k - 1) - 1
    }

    fn eval_in(&self, i: usize, s: f64) -> (Vec<f64>, Vec<f64>) {
        let (s0, s1) = (self.params[i], self.params[i + 1]);
        let h = s1 - s0;
        let u = (s - s0) / h;
        let (u2, u3) = (u * u, u * u * u);
        let (h00, h10, h01, h11) = (2.0 * u3 - 3.0 * u2 + 1.0, u3 - 2.0 * u2 + u, -2.0 * u3 + 3.0 * u2, u3 - u2);
        let (d00, d10, d01, d11) = (6.0 * u2 - 6.0 * u, 3.0 * u2 - 4.0 * u + 1.0, -6.0 * u2 + 6.0 * u, 3.0 * u2 - 2.0 * u);
        let (p0, p1, m0, m1) = (&self.points[i], &self.points[i + 1], &self.tangents[i], &self.tangents[i + 1]);
        let d = p0.len();
        let mut x = vec![0.0; d];
        let mut v = vec![0.0; d];
        for mu in 0..d {
            x[mu] = h00 * p0[mu] + h10 * h * m0[mu] + h01 * p1[mu] + h11 * h * m1[mu];
            v[mu] = (d00 * p0[mu] + d01 * p1[mu]) / h + d10 * m0[mu] + d11 * m1[mu];
        }
        (x, v)
    }

    /// Causal character of the tangent at the midpoint of every segment.
    pub fn causal_check(&self, m: &ChartedSpacetime) -> Vec<CausalCharacter> {
        (0..self.params.len() - 1)
            .map(|i| {
                let s = 0.5 * (self.params[i] + self.params[i + 1]);
                let (x, v) = self.eval_in(i, s);
                geometry::classify_raw(&m.metric_at(&x), &m.time_orientation(&x), &v, DEFAULT_NULL_TOL)
            })
            .collect()
    }

    /// The same curve traced as `u ↦ c(φ(u))`, resampled at `params`;
    /// `phi` returns `(φ(u), φ′(u))`.
    pub fn reparametrized(&self, params: Vec<f64>, phi: impl Fn(f64) -> (f64, f64)) -> Result<Self> {
        Self::from_fn(params, |u| {
            let (s, ds) = phi(u);
            let (x, v) = self.eval(s);
            (x, v.into_iter().map(|c| c * ds).collect())
        })
    }
}

impl Curve for SampledCurve {
    fn domain(&self) -> (f64, f64) {
        (self.params[0], *self.params.last().unwrap())
    }

    fn eval(&self, s: f64) -> (Vec<f64>, Vec<f64>) {
        let (lo, hi) = self.domain();
        let s = s.clamp(lo, hi);
        self.eval_in(self.segment_of(s), s)
    }

    fn pieces(&self) -> Vec<f64> {
        self.params.clone()
    }
}

fn natural_second_derivatives(s: &[f64], y: &[f64]) -> Vec<f64> {
    let k = s.len();
    let mut m2 = vec![0.0; k];
    if k < 3 {
        return m2;
    }
    // Thomas algorithm on the interior equations.
    let mut c = vec![0.0; k];
    let mut r = vec![0.0; k];
    for i in 1..k - 1 {
        let (h0, h1) = (s[i] - s[i - 1], s[i + 1] - s[i]);
        let a = h0 / 6.0;
        let b = (h0 + h1) / 3.0;
        let cc = h1 / 6.0;
        let rhs = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        let den = b - a * c[i - 1];
        c[i] = cc / den;
        r[i] = (rhs - a * r[i - 1]) / den;
    }
    for i in (1..k - 1).rev() {
        m2[i] = r[i] - c[i] * m2[i + 1];
    }
    m2
}

/// `τ(c) = ∫ |ċ| ds` by adaptive quadrature on every smooth piece. The curve
/// must be timelike wherever the integrand is sampled.
pub fn curve_proper_time<C: Curve + ?Sized>(m: &ChartedSpacetime, c: &C) -> Result<f64> {
    let pieces = c.pieces();
    let mut total = 0.0;
    for w in pieces.windows(2) {
        let (a, b) = (w[0], w[1]);
        // Stay strictly inside the piece so that piecewise curves evaluate
        // the right branch at the joins.
        let (ia, ib) = (a + (b - a) * 1e-14, b - (b - a) * 1e-14);
        for s in [ia, ib] {
            speed_at(m, c, s)?;
        }
        let scale = speed_at(m, c, 0.5 * (a + b))?;
        let bad = std::cell::Cell::new(None::<f64>);
        let out = quadrature::double_exponential::integrate(
            |s| match speed_at(m, c, s.clamp(ia, ib)) {
                Ok(w) => w,
                Err(_) => {
                    if bad.get().is_none_or(|b| s < b) {
                        bad.set(Some(s));
                    }
                    0.0
                }
            },
            a,
            b,
            1e-12 * (b - a) * scale.max(1e-300),
        );
        if let Some(s) = bad.get() {
            return Err(not_timelike(s));
        }
        total += out.integral;
    }
    Ok(total)
}

fn not_timelike(s: f64) -> LabError {
    LabError::Contract(format!("curve is not timelike at parameter {s}"))
}

fn speed_at<C: Curve + ?Sized>(m: &ChartedSpacetime, c: &C, s: f64) -> Result<f64> {
    let (x, v) = c.eval(s);
    if !m.contains(&x, 0.0) {
        return Err(not_timelike(s));
    }
    let g = m.metric_at(&x);
    let q = linalg::quad(&g, &v, &v);
    if !(q < -DEFAULT_NULL_TOL * geometry::auxiliary_scale(&g, &v)) {
        return Err(not_timelike(s));
    }
    Ok((-q).sqrt())
}

// --- shooting ----------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ShootingConfig {
    pub integrator: IntegratorConfig,
    /// Endpoint residual (max-norm, coordinate units) that counts as a hit.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::default(),
            tol: 1e-10,
            max_iter: 60,
        }
    }
}

fn endpoint(m: &ChartedSpacetime, p: &[f64], v: &[f64], icfg: &IntegratorConfig) -> Option<(Vec<f64>, GeodesicResult)> {
    let r = geodesic::integrate_geodesic(m, &GeodesicState::new(p.to_vec(), v.to_vec()), icfg).ok()?;
    (r.termination == Termination::ReachedParameterBound).then(|| (r.last().x.clone(), r))
}

/// The geodesic `λ ∈ [0, 1] ↦ exp_p(λv)` ending at `q`, found by damped
/// Newton iteration on `v` with a finite-difference Jacobian.
pub fn shoot(m: &ChartedSpacetime, p: &[f64], q: &[f64], cfg: &ShootingConfig) -> Result<GeodesicResult> {
    m.require_domain(p)?;
    m.require_domain(q)?;
    let d = m.dim;
    let icfg = cfg.integrator.clone().with_lambda_max(1.0);
    let mut v: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
    let miss = |x: &[f64]| x.iter().zip(q).map(|(a, b)| a - b).collect::<Vec<f64>>();
    let Some((mut x, mut run)) = endpoint(m, p, &v, &icfg) else {
        return Err(LabError::Shooting("the straight-line guess leaves the chart".into()));
    };
    let mut f = miss(&x);
    for _ in 0..cfg.max_iter {
        let res = linalg::max_abs(&f);
        if res < cfg.tol {
            return Ok(run);
        }
        let scale = linalg::max_abs(&v).max(1.0);
        let h = 1e-6 * scale;
        let mut jac = nalgebra::DMatrix::<f64>::zeros(d, d);
        for k in 0..d {
            let mut vp = v.clone();
            let mut vm = v.clone();
            vp[k] += h;
            vm[k] -= h;
            let (Some((xp, _)), Some((xm, _))) = (endpoint(m, p, &vp, &icfg), endpoint(m, p, &vm, &icfg)) else {
                return Err(LabError::Shooting(format!("geodesics near v = {v:?} leave the chart")));
            };
            for i in 0..d {
                jac[(i, k)] = (xp[i] - xm[i]) / (2.0 * h);
            }
        }
        let rhs = nalgebra::DVector::from_iterator(d, f.iter().map(|c| -c));
        let Some(step) = jac.lu().solve(&rhs) else {
            return Err(LabError::Shooting(format!("singular exponential map at v = {v:?}")));
        };
        let mut lam = 1.0;
        let mut improved = false;
        while lam > 1e-6 {
            let vt: Vec<f64> = v.iter().zip(step.iter()).map(|(a, b)| a + lam * b).collect();
            if let Some((xt, rt)) = endpoint(m, p, &vt, &icfg) {
                let ft = miss(&xt);
                if linalg::max_abs(&ft) < res {
                    v = vt;
                    x = xt;
                    f = ft;
                    run = rt;
                    improved = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        if !improved {
            return Err(LabError::Shooting(format!(
                "stalled with endpoint residual {res:e} at x = {x:?}"
            )));
        }
    }
    if linalg::max_abs(&f) < cfg.tol {
        return Ok(run);
    }
    Err(LabError::Shooting(format!(
        "no convergence after {} iterations (residual {:e})",
        cfg.max_iter,
        linalg::max_abs(&f)
    )))
}

/// `W_p(q) = Σ η_ab x^a x^b` for the normal coordinates of `q` about `p`.
pub fn w_function(m: &ChartedSpacetime, p: &[f64], q: &[f64], cfg: &ShootingConfig) -> Result<f64> {
    let geo = shoot(m, p, q, cfg).map_err(|e| match e {
        LabError::Shooting(msg) => LabError::Shooting(format!("{q:?} is outside the normal neighborhood of {p:?}: {msg}")),
        other => other,
    })?;
    let v = &geo.samples[0].v;
    let g = m.metric_at(p);
    let frame = geometry::orthonormal_frame(&g, &m.time_orientation(p))?;
    let mut w = 0.0;
    for (a, e) in frame.iter().enumerate() {
        let eta = if a == 0 { -1.0 } else { 1.0 };
        let xa = eta * linalg::quad(&g, v, e);
        w += eta * xa * xa;
    }
    Ok(w)
}

// --- variations --------------------------------------------------------------

pub const MAX_MODES: usize = 8;

/// Endpoint-fixed random perturbations of a geodesic on `λ ∈ [0, 1]`:
/// `c(s) = γ(φ(s)) + Σ_k a_k sin(kπs)` with `φ(s) = s + β sin(πs)/π`.
#[derive(Clone, Debug)]
pub struct VariationFamily {
    pub base: GeodesicResult,
    pub amplitude: f64,
    pub modes: usize,
    pub seed: u64,
    /// Hermite nodes per generated curve.
    pub nodes: usize,
}

/// One draw from a family.
#[derive(Clone, Debug, PartialEq)]
pub struct Perturbation {
    /// `coeffs[k][μ]` multiplies `sin((k+1)πs)` in coordinate `μ`.
    pub coeffs: Vec<Vec<f64>>,
    pub beta: f64,
}

impl VariationFamily {
    pub fn new(base: GeodesicResult, amplitude: f64, modes: usize, seed: u64) -> Result<Self> {
        if !(1..=MAX_MODES).contains(&modes) {
            return Err(LabError::InvalidParameter(format!("mode count {modes} outside 1..={MAX_MODES}")));
        }
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(LabError::InvalidParameter(format!("amplitude {amplitude}")));
        }
        if base.lambda_end() != 1.0 || base.samples[0].lambda != 0.0 {
            return Err(LabError::Contract("variation base must run over λ ∈ [0, 1]".into()));
        }
        Ok(Self {
            base,
            amplitude,
            modes,
            seed,
            nodes: 257,
        })
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng, amplitude: f64) -> Perturbation {
        let d = self.base.dim;
        let coeffs = (0..self.modes)
            .map(|_| (0..d).map(|_| amplitude * rng.random_range(-1.0..=1.0)).collect())
            .collect();
        Perturbation {
            coeffs,
            beta: rng.random_range(-0.5..=0.5),
        }
    }

    pub fn varied<'a>(&'a self, pert: &'a Perturbation) -> VariedCurve<'a> {
        VariedCurve { family: self, pert }
    }

    /// A drawn curve sampled at `nodes` parameters.
    pub fn curve(&self, pert: &Perturbation) -> Result<SampledCurve> {
        let k = self.nodes.max(2);
        let params: Vec<f64> = (0..k).map(|i| i as f64 / (k - 1) as f64).collect();
        let c = self.varied(pert);
        SampledCurve::from_fn(params, |s| c.eval(s))
    }

    /// Proper time of a drawn curve, or `None` when it is not timelike.
    pub fn proper_time(&self, m: &ChartedSpacetime, pert: &Perturbation) -> Result<Option<f64>> {
        match curve_proper_time(m, &self.varied(pert)) {
            Ok(t) => Ok(Some(t)),
            Err(LabError::Contract(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Halves the amplitude until fewer than half of a pilot batch is
    /// rejected as non-timelike.
    pub fn effective_amplitude(&self, m: &ChartedSpacetime, exec: Execution) -> Result<(f64, f64)> {
        const PILOT: usize = 64;
        let mut amp = self.amplitude;
        for _ in 0..60 {
            let ok = exec::map_indexed(exec, PILOT, |i| {
                let mut rng = exec::item_rng(self.seed ^ PILOT_SALT, i as u64);
                self.proper_time(m, &self.draw(&mut rng, amp)).map(|t| t.is_some())
            });
            let accepted = ok.into_iter().collect::<Result<Vec<bool>>>()?.into_iter().filter(|&b| b).count();
            let rate = 1.0 - accepted as f64 / PILOT as f64;
            if rate < 0.5 {
                return Ok((amp, rate));
            }
            amp *= 0.5;
        }
        Err(LabError::Contract("no timelike variations found; region not convex enough".into()))
    }
}

/// One member of a [`VariationFamily`], evaluated exactly.
pub struct VariedCurve<'a> {
    family: &'a VariationFamily,
    pert: &'a Perturbation,
}

impl Curve for VariedCurve<'_> {
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    fn eval(&self, s: f64) -> (Vec<f64>, Vec<f64>) {
        let s = s.clamp(0.0, 1.0);
        let beta = self.pert.beta;
        let edge = s == 0.0 || s == 1.0;
        let phi = if edge { s } else { s + beta * (PI * s).sin() / PI };
        let dphi = 1.0 + beta * (PI * s).cos();
        let st = self.family.base.state_at(phi).expect("φ maps [0,1] onto itself");
        let mut x = st.x;
        let mut v: Vec<f64> = st.v.iter().map(|c| c * dphi).collect();
        for (k, row) in self.pert.coeffs.iter().enumerate() {
            let w = (k + 1) as f64 * PI;
            let (sn, cs) = (w * s).sin_cos();
            for mu in 0..x.len() {
                if !edge {
                    x[mu] += row[mu] * sn;
                }
                v[mu] += row[mu] * w * cs;
            }
        }
        (x, v)
    }

    fn pieces(&self) -> Vec<f64> {
        let k = 2 * self.family.modes;
        (0..=k).map(|i| i as f64 / k as f64).collect()
    }
}

const PILOT_SALT: u64 = 0x5eed_0f_7e57;

#[derive(Clone, Debug)]
pub struct TwinConfig {
    pub amplitude: f64,
    pub modes: usize,
    pub seed: u64,
    pub trials: usize,
    pub nodes: usize,
    pub exec: Execution,
    pub shooting: ShootingConfig,
}

impl Default for TwinConfig {
    fn default() -> Self {
        Self {
            amplitude: 0.3,
            modes: 4,
            seed: 1,
            trials: 1000,
            nodes: 257,
            exec: Execution::default(),
            shooting: ShootingConfig::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TwinReport {
    pub tau_geodesic: f64,
    pub tau_max_perturbed: f64,
    /// `τ_geodesic − τ_max_perturbed`.
    pub margin: f64,
    pub amplitude: f64,
    pub pilot_rejection: f64,
    /// Redraws over all trials.
    pub redraws: usize,
    pub taus: Vec<f64>,
}

/// Draws `trials` endpoint-fixed timelike curves from `p` to `q` and compares
/// their proper times with the geodesic's.
pub fn twin_trial(m: &ChartedSpacetime, p: &[f64], q: &[f64], cfg: &TwinConfig) -> Result<TwinReport> {
    let base = shoot(m, p, q, &cfg.shooting)?;
    let mut fam = VariationFamily::new(base, cfg.amplitude, cfg.modes, cfg.seed)?;
    fam.nodes = cfg.nodes;
    twin_trial_family(m, &fam, cfg.trials, cfg.exec)
}

pub fn twin_trial_family(m: &ChartedSpacetime, fam: &VariationFamily, trials: usize, exec: Execution) -> Result<TwinReport> {
    let straight = Perturbation {
        coeffs: vec![vec![0.0; fam.base.dim]; fam.modes],
        beta: 0.0,
    };
    let tau_geodesic = fam
        .proper_time(m, &straight)?
        .ok_or_else(|| LabError::Contract("base geodesic is not timelike".into()))?;
    let (amp, pilot_rejection) = fam.effective_amplitude(m, exec)?;
    let results = exec::map_indexed(exec, trials, |i| -> Result<(f64, usize)> {
        let mut rng = exec::item_rng(fam.seed, i as u64);
        for redraw in 0..100 {
            if let Some(t) = fam.proper_time(m, &fam.draw(&mut rng, amp))? {
                return Ok((t, redraw));
            }
        }
        Err(LabError::Contract(format!(
            "trial {i}: over 99% of draws rejected; region not convex enough"
        )))
    });
    let mut taus = Vec::with_capacity(trials);
    let mut redraws = 0;
    for r in results {
        let (t, k) = r?;
        taus.push(t);
        redraws += k;
    }
    let tau_max_perturbed = taus.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(TwinReport {
        tau_geodesic,
        tau_max_perturbed,
        margin: tau_geodesic - tau_max_perturbed,
        amplitude: amp,
        pilot_rejection,
        redraws,
        taus,
    })
}

// --- AdS₂ -------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct AdsLongCurve {
    pub curve: SampledCurve,
    pub tau: f64,
    /// `ε / cos x₀`.
    pub lower_bound: f64,
    /// Proper time of the geodesic `x = 0` between the same endpoints.
    pub central_geodesic_tau: f64,
    pub corner_width: f64,
}

/// Timelike curve in AdS₂ (`α = 1`) from `(0, 0)` to `(π + ε, 0)` that runs
/// out almost at light speed to `x = x₀`, waits there and comes back. The
/// corners are rounded by a linear ramp of `dx/dt` over a width `δ`.
pub fn ads_long_causal_curve(eps: f64, x0: f64) -> Result<AdsLongCurve> {
    if !(x0 > 0.0 && x0 < PI / 2.0) {
        return Err(LabError::InvalidParameter(format!("x0 = {x0} outside (0, π/2)")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(LabError::InvalidParameter(format!("epsilon = {eps} must be positive")));
    }
    let m = crate::catalog::ads2(1.0)?;
    let total = PI + eps;
    let delta = 1e-3f64.min(eps / 4.0);
    let slope = 1.0 - 1e-3 * eps / total;
    let t1 = x0 / slope;
    let t2 = total - t1;
    let rate = move |t: f64| -> f64 {
        let ramp = |c: f64, from: f64, to: f64| from + (to - from) * ((t - (c - delta / 2.0)) / delta);
        if t < t1 - delta / 2.0 {
            slope
        } else if t < t1 + delta / 2.0 {
            ramp(t1, slope, 0.0)
        } else if t < t2 - delta / 2.0 {
            0.0
        } else if t < t2 + delta / 2.0 {
            ramp(t2, 0.0, -slope)
        } else {
            -slope
        }
    };
    let pos = move |t: f64| -> f64 {
        let ramp_area = |c: f64, from: f64, to: f64| {
            let u = (t - (c - delta / 2.0)).clamp(0.0, delta);
            from * u + (to - from) * u * u / (2.0 * delta)
        };
        if t <= t1 - delta / 2.0 {
            slope * t
        } else if t <= t1 + delta / 2.0 {
            slope * (t1 - delta / 2.0) + ramp_area(t1, slope, 0.0)
        } else if t <= t2 - delta / 2.0 {
            x0
        } else if t <= t2 + delta / 2.0 {
            x0 + ramp_area(t2, 0.0, -slope)
        } else {
            (slope * (total - t)).max(0.0)
        }
    };
    let pieces = [0.0, t1 - delta / 2.0, t1 + delta / 2.0, t2 - delta / 2.0, t2 + delta / 2.0, total];
    let mut params = vec![0.0];
    for w in pieces.windows(2) {
        let k = 64;
        for j in 1..=k {
            params.push(w[0] + (w[1] - w[0]) * j as f64 / k as f64);
        }
    }
    *params.last_mut().unwrap() = total;
    let curve = SampledCurve::from_fn(params, |t| (vec![t, pos(t)], vec![1.0, rate(t)]))?;
    let tau = curve_proper_time(&m, &curve)?;
    Ok(AdsLongCurve {
        curve,
        tau,
        lower_bound: eps / x0.cos(),
        central_geodesic_tau: total,
        corner_width: delta,
    })
}
