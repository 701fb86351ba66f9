//! Christoffel symbols, Riemann/Ricci/scalar curvature, Einstein-equation
//! residuals and strong-energy-condition sampling, all computed from the
//! metric evaluator alone.
//!
//! First derivatives of `g` come from dual numbers; the derivatives of Γ needed
//! for the Riemann tensor come from nested duals. No step sizes anywhere.
//!
//! Index layouts (all dense, row-major):
//! - Γ^λ_μν at `(λ·d + μ)·d + ν`
//! - R^ρ_σμν at `((ρ·d + σ)·d + μ)·d + ν`

use std::sync::Arc;

use crate::catalog::ScaleFactor;
use crate::dual::{seed, Dual, Real, D1};
use crate::error::{LabError, Result};
use crate::exec::{self, Execution};
use crate::geometry::{self, ChartedSpacetime, ScalarFieldFn, VectorFieldFn};
use crate::linalg;

/// Pivot ratio below which the metric is treated as degenerate.
pub const DEGENERACY_RATIO: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct CurvatureAtEvent {
    pub dim: usize,
    pub gamma: Vec<f64>,
    pub riemann: Vec<f64>,
    pub ricci: Vec<f64>,
    pub scalar: f64,
}

impl CurvatureAtEvent {
    pub fn riemann_at(&self, rho: usize, sigma: usize, mu: usize, nu: usize) -> f64 {
        let d = self.dim;
        self.riemann[((rho * d + sigma) * d + mu) * d + nu]
    }
}

/// `(g, ∂g)` at `x` with `∂g[k·d² + i·d + j] = ∂_k g_ij`.
fn metric_and_gradient(m: &ChartedSpacetime, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let d = m.dim;
    let mut g = Vec::new();
    let mut dg = vec![0.0; d * d * d];
    for k in 0..d {
        let vals = m.metric.eval_d1(&seed(x, k));
        if k == 0 {
            g = vals.iter().map(|v| v.re).collect();
        }
        for (i, v) in vals.iter().enumerate() {
            dg[k * d * d + i] = v.eps;
        }
    }
    (g, dg)
}

/// Same as [`metric_and_gradient`] but at a dual point, so that the result
/// carries one more derivative.
fn metric_and_gradient_d1(m: &ChartedSpacetime, x: &[D1]) -> (Vec<D1>, Vec<D1>) {
    let d = m.dim;
    let mut g = Vec::new();
    let mut dg = vec![D1::cst(0.0); d * d * d];
    for k in 0..d {
        let xk: Vec<Dual<D1>> = x
            .iter()
            .enumerate()
            .map(|(i, &xi)| Dual::new(xi, D1::cst(if i == k { 1.0 } else { 0.0 })))
            .collect();
        let vals = m.metric.eval_d2(&xk);
        if k == 0 {
            g = vals.iter().map(|v| v.re).collect();
        }
        for (i, v) in vals.iter().enumerate() {
            dg[k * d * d + i] = v.eps;
        }
    }
    (g, dg)
}

fn symmetrize<S: Real>(g: &mut [S], d: usize) {
    for i in 0..d {
        for j in i + 1..d {
            let s = (g[i * d + j] + g[j * d + i]) * 0.5;
            g[i * d + j] = s;
            g[j * d + i] = s;
        }
    }
}

/// Γ from `g` and `∂g`, generic over the scalar so it can be differentiated.
fn christoffel_from_parts<S: Real>(
    d: usize,
    mut g: Vec<S>,
    mut dg: Vec<S>,
    x: &[f64],
) -> Result<Vec<S>> {
    symmetrize(&mut g, d);
    for k in 0..d {
        symmetrize(&mut dg[k * d * d..(k + 1) * d * d], d);
    }
    let (ginv, ratio) = linalg::invert(&g, d);
    if !(ratio > DEGENERACY_RATIO) {
        return Err(LabError::Degenerate {
            coords: x.to_vec(),
            ratio,
        });
    }
    // lowered: Γ_ρμν = ½(∂_μ g_ρν + ∂_ν g_ρμ − ∂_ρ g_μν)
    let mut low = vec![S::zero(); d * d * d];
    for r in 0..d {
        for mu in 0..d {
            for nu in mu..d {
                let v = (dg[mu * d * d + r * d + nu] + dg[nu * d * d + r * d + mu]
                    - dg[r * d * d + mu * d + nu])
                    * 0.5;
                low[(r * d + mu) * d + nu] = v;
                low[(r * d + nu) * d + mu] = v;
            }
        }
    }
    let mut gam = vec![S::zero(); d * d * d];
    for l in 0..d {
        for mu in 0..d {
            for nu in mu..d {
                let mut s = S::zero();
                for r in 0..d {
                    s += ginv[l * d + r] * low[(r * d + mu) * d + nu];
                }
                gam[(l * d + mu) * d + nu] = s;
                gam[(l * d + nu) * d + mu] = s;
            }
        }
    }
    Ok(gam)
}

/// Christoffel symbols by dual-number differentiation of the metric,
/// ignoring any closed form.
pub fn christoffel_differentiated(m: &ChartedSpacetime, x: &[f64]) -> Result<Vec<f64>> {
    m.require_domain(x)?;
    let (g, dg) = metric_and_gradient(m, x);
    christoffel_from_parts(m.dim, g, dg, x)
}

/// Christoffel symbols at `x`: the catalog closed form when present,
/// otherwise [`christoffel_differentiated`].
pub fn christoffel(m: &ChartedSpacetime, x: &[f64]) -> Result<Vec<f64>> {
    match &m.christoffel_closed_form {
        Some(f) => {
            m.require_domain(x)?;
            Ok(f(x))
        }
        None => christoffel_differentiated(m, x),
    }
}

/// Γ and its coordinate derivatives `∂_k Γ` (`dgam[k·d³ + idx]`).
fn christoffel_with_gradient(m: &ChartedSpacetime, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = m.dim;
    let d3 = d * d * d;
    let mut gam = Vec::new();
    let mut dgam = vec![0.0; d * d3];
    for k in 0..d {
        let xk = seed(x, k);
        let (g, dg) = metric_and_gradient_d1(m, &xk);
        let gk = christoffel_from_parts(d, g, dg, x)?;
        if k == 0 {
            gam = gk.iter().map(|v| v.re).collect();
        }
        for (i, v) in gk.iter().enumerate() {
            dgam[k * d3 + i] = v.eps;
        }
    }
    Ok((gam, dgam))
}

fn riemann_from(d: usize, gam: &[f64], dgam: &[f64]) -> Vec<f64> {
    let d3 = d * d * d;
    let g = |l: usize, m: usize, n: usize| gam[(l * d + m) * d + n];
    let dg = |k: usize, l: usize, m: usize, n: usize| dgam[k * d3 + (l * d + m) * d + n];
    let mut r = vec![0.0; d * d3];
    for rho in 0..d {
        for sig in 0..d {
            for mu in 0..d {
                for nu in mu + 1..d {
                    let mut v = dg(mu, rho, nu, sig) - dg(nu, rho, mu, sig);
                    for l in 0..d {
                        v += g(rho, mu, l) * g(l, nu, sig) - g(rho, nu, l) * g(l, mu, sig);
                    }
                    r[((rho * d + sig) * d + mu) * d + nu] = v;
                    r[((rho * d + sig) * d + nu) * d + mu] = -v;
                }
            }
        }
    }
    r
}

/// Riemann tensor `R^ρ_σμν = ∂_μΓ^ρ_νσ − ∂_νΓ^ρ_μσ + Γ^ρ_μλΓ^λ_νσ − Γ^ρ_νλΓ^λ_μσ`.
pub fn riemann(m: &ChartedSpacetime, x: &[f64]) -> Result<Vec<f64>> {
    m.require_domain(x)?;
    let (gam, dgam) = christoffel_with_gradient(m, x)?;
    Ok(riemann_from(m.dim, &gam, &dgam))
}

fn ricci_from(d: usize, riem: &[f64]) -> Vec<f64> {
    let mut ric = vec![0.0; d * d];
    for s in 0..d {
        for n in 0..d {
            let mut v = 0.0;
            for mu in 0..d {
                v += riem[((mu * d + s) * d + mu) * d + n];
            }
            ric[s * d + n] = v;
        }
    }
    ric
}

fn scalar_from(d: usize, g: &[f64], ric: &[f64]) -> f64 {
    let (ginv, _) = linalg::invert(g, d);
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            s += ginv[i * d + j] * ric[i * d + j];
        }
    }
    s
}

/// `Ric_σν = R^μ_σμν`.
pub fn ricci(m: &ChartedSpacetime, x: &[f64]) -> Result<Vec<f64>> {
    Ok(ricci_from(m.dim, &riemann(m, x)?))
}

/// `S = g^σν Ric_σν`.
pub fn scalar(m: &ChartedSpacetime, x: &[f64]) -> Result<f64> {
    let ric = ricci(m, x)?;
    Ok(scalar_from(m.dim, &m.metric_at(x), &ric))
}

/// Everything at once (one pass through the nested duals).
pub fn curvature(m: &ChartedSpacetime, x: &[f64]) -> Result<CurvatureAtEvent> {
    m.require_domain(x)?;
    let d = m.dim;
    let (gam, dgam) = christoffel_with_gradient(m, x)?;
    let riemann = riemann_from(d, &gam, &dgam);
    let ricci = ricci_from(d, &riemann);
    let scalar = scalar_from(d, &m.metric_at(x), &ricci);
    Ok(CurvatureAtEvent {
        dim: d,
        gamma: gam,
        riemann,
        ricci,
        scalar,
    })
}

/// Energy-momentum content of a spacetime.
#[derive(Clone)]
pub enum MatterModel {
    Vacuum,
    /// `T = −Λ g`.
    CosmologicalConstant(f64),
    /// Pressureless perfect fluid, `T = ρ U♭ ⊗ U♭`.
    Dust {
        rho: ScalarFieldFn,
        velocity: VectorFieldFn,
    },
}

impl std::fmt::Debug for MatterModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MatterModel::Vacuum => write!(f, "Vacuum"),
            MatterModel::CosmologicalConstant(l) => write!(f, "CosmologicalConstant({l})"),
            MatterModel::Dust { .. } => write!(f, "Dust"),
        }
    }
}

impl MatterModel {
    /// FLRW dust: `ρ = n(n−1)α/aⁿ`, `U = ∂/∂t`.
    pub fn flrw_dust(n: usize, alpha: f64, scale: Arc<dyn ScaleFactor>) -> Self {
        let dim = n + 1;
        let c = (n * (n - 1)) as f64 * alpha;
        MatterModel::Dust {
            rho: Arc::new(move |x: &[f64]| c / scale.derivative(x[0], 0).powi(n as i32)),
            velocity: Arc::new(move |_x: &[f64]| {
                let mut u = vec![0.0; dim];
                u[0] = 1.0;
                u
            }),
        }
    }

    /// `T_μν` at `x` given the metric there.
    pub fn energy_momentum(&self, g: &[f64], x: &[f64]) -> Vec<f64> {
        let d = x.len();
        match self {
            MatterModel::Vacuum => vec![0.0; d * d],
            MatterModel::CosmologicalConstant(l) => g.iter().map(|v| -l * v).collect(),
            MatterModel::Dust { rho, velocity } => {
                let u = velocity(x);
                let ul = linalg::mat_vec(g, &u);
                let r = rho(x);
                let mut t = vec![0.0; d * d];
                for i in 0..d {
                    for j in 0..d {
                        t[i * d + j] = r * ul[i] * ul[j];
                    }
                }
                t
            }
        }
    }

    /// Checks `⟨U,U⟩ = −1` for dust (to 1e-10).
    pub fn check_at(&self, g: &[f64], x: &[f64]) -> Result<()> {
        if let MatterModel::Dust { velocity, .. } = self {
            let u = velocity(x);
            let q = linalg::quad(g, &u, &u);
            if (q + 1.0).abs() > 1e-10 {
                return Err(LabError::Contract(format!(
                    "dust velocity not unit timelike at {x:?}: <U,U> = {q}"
                )));
            }
        }
        Ok(())
    }
}

/// `‖Ric − (S/2) g − T‖∞`.
pub fn einstein_residual(m: &ChartedSpacetime, x: &[f64], matter: &MatterModel) -> Result<f64> {
    let c = curvature(m, x)?;
    let g = m.metric_at(x);
    matter.check_at(&g, x)?;
    let t = matter.energy_momentum(&g, x);
    Ok((0..g.len())
        .map(|i| (c.ricci[i] - 0.5 * c.scalar * g[i] - t[i]).abs())
        .fold(0.0, f64::max))
}

/// `‖Ric − T + (tr T/(n−1)) g‖∞`, the trace-reversed form of the Einstein
/// equation. Needs `n ≥ 2`.
pub fn ricci_form_residual(m: &ChartedSpacetime, x: &[f64], matter: &MatterModel) -> Result<f64> {
    let n = m.n();
    if n < 2 {
        return Err(LabError::Unsupported(
            "trace-reversed Einstein equation needs n >= 2 (Ric - S/2 g vanishes identically in 2 dimensions)"
                .into(),
        ));
    }
    let ric = ricci(m, x)?;
    let g = m.metric_at(x);
    matter.check_at(&g, x)?;
    let t = matter.energy_momentum(&g, x);
    let d = m.dim;
    let (ginv, _) = linalg::invert(&g, d);
    let tr: f64 = (0..d * d).map(|i| ginv[i] * t[i]).sum();
    let k = tr / (n as f64 - 1.0);
    Ok((0..d * d)
        .map(|i| (ric[i] - t[i] + k * g[i]).abs())
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq)]
pub enum SecVerdict {
    Holds {
        samples: usize,
        /// Smallest `Ric(V,V)` encountered.
        min_ric: f64,
    },
    Violated {
        event: Vec<f64>,
        vector: Vec<f64>,
        ric_vv: f64,
    },
}

impl SecVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, SecVerdict::Holds { .. })
    }
}

/// A random future timelike vector at `x`: the unit time orientation boosted
/// by spatial frame components drawn from the unit ball.
pub fn random_timelike<R: rand::Rng + ?Sized>(
    m: &ChartedSpacetime,
    x: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    let g = m.metric_at(x);
    let frame = geometry::orthonormal_frame(&g, &m.time_orientation(x))?;
    loop {
        let c: Vec<f64> = (1..m.dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut v = frame[0].clone();
        for (ci, e) in c.iter().zip(&frame[1..]) {
            for (vi, ei) in v.iter_mut().zip(e) {
                *vi += ci * ei;
            }
        }
        if linalg::quad(&g, &v, &v) < 0.0 {
            return Ok(v);
        }
    }
}

/// Samples `Ric(V,V)` over random events (drawn from the chart's sample box
/// or from `sampler`) and random timelike `V`. Reports the lowest-index
/// violation, if any, so the verdict does not depend on execution order.
pub fn sec_sample(
    m: &ChartedSpacetime,
    sampler: Option<&(dyn Fn(&mut rand_chacha::ChaCha8Rng) -> Vec<f64> + Sync)>,
    count: usize,
    seed: u64,
    exec: Execution,
) -> Result<SecVerdict> {
    if count == 0 {
        return Err(LabError::Usage("sec_sample needs at least one sample".into()));
    }
    let results = exec::map_indexed(exec, count, |i| -> Result<(Vec<f64>, Vec<f64>, f64, f64)> {
        let mut rng = exec::item_rng(seed, i as u64);
        let x = match sampler {
            Some(f) => f(&mut rng),
            None => m.sample_point(&mut rng),
        };
        let v = random_timelike(m, &x, &mut rng)?;
        let ric = ricci(m, &x)?;
        let val = linalg::quad(&ric, &v, &v);
        let scale = geometry::auxiliary_scale(&ric, &v);
        Ok((x, v, val, scale))
    });
    let mut min_ric = f64::INFINITY;
    for r in results {
        let (x, v, val, scale) = r?;
        if val < -1e-8 * (1.0 + scale) {
            return Ok(SecVerdict::Violated {
                event: x,
                vector: v,
                ric_vv: val,
            });
        }
        min_ric = min_ric.min(val);
    }
    Ok(SecVerdict::Holds {
        samples: count,
        min_ric,
    })
}
