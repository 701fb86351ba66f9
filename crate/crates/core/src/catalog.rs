//! Constructors for the named spacetimes.
//!
//! Spherically symmetric factors use hyperspherical angles
//! `(θ₁, …, θ_{m-1}, φ)` on `S^m`, with round metric
//! `dθ₁² + sin²θ₁ dθ₂² + … + (Π sin²θ_j) dφ²`. The equatorial great circle sits
//! at `θ_i = π/2`, and because it is totally geodesic the circular-orbit and
//! radial computations can live there while the chart keeps every dimension
//! (curvature and Jacobi fields need all of them).
//!
//! Closed-form Christoffel symbols are built from hand-written gradients of the
//! diagonal metric entries. They share no code with the dual-number engine and
//! serve as its oracle.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use crate::dual::Real;
use crate::error::{LabError, Result};
use crate::geometry::{ChartedSpacetime, Constraint, EdgeKind, MetricFormula, Side};

/// Scale factor `a(t)` of an FLRW model, known through its derivatives.
pub trait ScaleFactor: Send + Sync {
    /// `order`-th derivative of `a` at `t` (orders 0 to 3 are required).
    fn derivative(&self, t: f64, order: usize) -> f64;
    /// Open interval on which `a > 0`.
    fn interval(&self) -> (f64, f64);
    /// Whether `a → 0` at the lower / upper end of [`interval`](Self::interval).
    fn singular_ends(&self) -> (bool, bool) {
        (false, false)
    }
}

/// `a ≡ c`.
pub struct ConstantScale(pub f64);

impl ScaleFactor for ConstantScale {
    fn derivative(&self, _t: f64, order: usize) -> f64 {
        if order == 0 {
            self.0
        } else {
            0.0
        }
    }
    fn interval(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

/// Scale factor given by closed-form derivative closures.
pub struct ClosedFormScale {
    derivs: Vec<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
    interval: (f64, f64),
    singular: (bool, bool),
}

impl ClosedFormScale {
    pub fn new(
        derivs: Vec<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
        interval: (f64, f64),
        singular: (bool, bool),
    ) -> Self {
        Self {
            derivs,
            interval,
            singular,
        }
    }

    /// Flat dust with `α`, `n`: `a(t) = (n²α/2)^{1/n} t^{2/n}`, big bang at 0.
    pub fn flat_dust(n: usize, alpha: f64) -> Self {
        let nf = n as f64;
        let c = (nf * nf * alpha / 2.0).powf(1.0 / nf);
        let p = 2.0 / nf;
        let mk = move |k: usize| -> Box<dyn Fn(f64) -> f64 + Send + Sync> {
            Box::new(move |t: f64| {
                let mut coef = c;
                for j in 0..k {
                    coef *= p - j as f64;
                }
                coef * t.powf(p - k as f64)
            })
        };
        Self::new(vec![mk(0), mk(1), mk(2), mk(3)], (0.0, f64::INFINITY), (true, false))
    }
}

impl ScaleFactor for ClosedFormScale {
    fn derivative(&self, t: f64, order: usize) -> f64 {
        self.derivs.get(order).map(|f| f(t)).unwrap_or(f64::NAN)
    }
    fn interval(&self) -> (f64, f64) {
        self.interval
    }
    fn singular_ends(&self) -> (bool, bool) {
        self.singular
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Exterior,
    Interior,
}

fn sphere_diag<S: Real>(angles: &[S]) -> Vec<S> {
    let mut out = Vec::with_capacity(angles.len());
    let mut prod = S::one();
    for a in angles {
        out.push(prod);
        let s = a.sin();
        prod = prod * s * s;
    }
    out
}

/// `∂h_k/∂θ_i` for the round-sphere factors, `out[i][k]`.
fn sphere_diag_grad(angles: &[f64]) -> Vec<Vec<f64>> {
    let h = sphere_diag(angles);
    let m = angles.len();
    let mut out = vec![vec![0.0; m]; m];
    for i in 0..m {
        let cot = angles[i].cos() / angles[i].sin();
        for k in i + 1..m {
            out[i][k] = 2.0 * cot * h[k];
        }
    }
    out
}

fn diag_matrix<S: Real>(d: &[S]) -> Vec<S> {
    let n = d.len();
    let mut g = vec![S::zero(); n * n];
    for i in 0..n {
        g[i * n + i] = d[i];
    }
    g
}

/// Christoffel symbols of a diagonal metric from its entries and their
/// gradients `grad[k][i] = ∂_k g_ii`.
pub fn diagonal_christoffel(diag: &[f64], grad: &[Vec<f64>]) -> Vec<f64> {
    let d = diag.len();
    let mut gam = vec![0.0; d * d * d];
    let idx = |l: usize, m: usize, n: usize| l * d * d + m * d + n;
    for l in 0..d {
        for m in 0..d {
            let v = grad[m][l] / (2.0 * diag[l]);
            gam[idx(l, l, m)] = v;
            gam[idx(l, m, l)] = v;
        }
        for m in 0..d {
            if m != l {
                gam[idx(l, m, m)] = -grad[l][m] / (2.0 * diag[l]);
            }
        }
    }
    gam
}

fn angle_constraints(names: &[String], first: usize, count: usize) -> Vec<Constraint> {
    // all polar angles but the last (φ) live in (0, π)
    let mut out = Vec::new();
    for k in 0..count.saturating_sub(1) {
        let c = first + k;
        out.push(Constraint::lower(names[c].clone(), c, 0.0, EdgeKind::Artificial));
        out.push(Constraint::upper(names[c].clone(), c, PI, EdgeKind::Artificial));
    }
    out
}

fn angle_names(count: usize) -> Vec<String> {
    (0..count)
        .map(|k| {
            if k + 1 == count {
                "phi".to_string()
            } else if count == 2 {
                "theta".to_string()
            } else {
                format!("theta{}", k + 1)
            }
        })
        .collect()
}

fn angle_box(count: usize) -> Vec<(f64, f64)> {
    (0..count)
        .map(|k| if k + 1 == count { (-PI, PI) } else { (0.3, PI - 0.3) })
        .collect()
}

fn zero_christoffel(dim: usize) -> crate::geometry::ChristoffelFn {
    Arc::new(move |_x: &[f64]| vec![0.0; dim * dim * dim])
}

// --- Minkowski -------------------------------------------------------------

struct MinkowskiMetric {
    dim: usize,
}

impl MetricFormula for MinkowskiMetric {
    fn components<S: Real>(&self, _x: &[S]) -> Vec<S> {
        let mut d = vec![S::one(); self.dim];
        d[0] = -S::one();
        diag_matrix(&d)
    }
}

/// Flat `ℝ^{n+1}` with `diag(−1, 1, …, 1)`.
pub fn minkowski(n: usize) -> Result<ChartedSpacetime> {
    if n < 1 {
        return Err(LabError::InvalidParameter("minkowski needs n >= 1".into()));
    }
    let dim = n + 1;
    Ok(ChartedSpacetime {
        name: "minkowski".into(),
        dim,
        coord_names: (0..dim).map(|i| format!("x{i}")).collect(),
        metric: Arc::new(MinkowskiMetric { dim }),
        domain: Vec::new(),
        christoffel_closed_form: Some(zero_christoffel(dim)),
        time_orient_field: Arc::new(move |_x: &[f64]| {
            let mut t = vec![0.0; dim];
            t[0] = 1.0;
            t
        }),
        sample_box: (0..dim).map(|_| (-5.0, 5.0)).collect(),
        params: vec![("n".into(), n as f64)],
        note: "flat space, no gravitation".into(),
    })
}

// --- Schwarzschild -----------------------------------------------------------

struct SchwarzschildMetric {
    n: usize,
    rs: f64,
}

impl SchwarzschildMetric {
    /// `1 − (r_s/r)^{n−2}` written as `(r − r_s) Σ r^k r_s^{n−3−k} / r^{n−2}`,
    /// which keeps full relative accuracy next to the horizon.
    fn f<S: Real>(&self, r: S) -> S {
        let m = self.n - 3;
        let mut sum = S::zero();
        let mut rk = S::one();
        for k in 0..=m {
            sum = sum + rk * self.rs.powi((m - k) as i32);
            rk = rk * r;
        }
        (r + (-self.rs)) * sum / rk
    }
}

impl MetricFormula for SchwarzschildMetric {
    fn components<S: Real>(&self, x: &[S]) -> Vec<S> {
        let r = x[1];
        let f = self.f(r);
        let h = sphere_diag(&x[2..]);
        let mut d = Vec::with_capacity(x.len());
        d.push(-f);
        d.push(f.recip());
        for hk in h {
            d.push(r * r * hk);
        }
        diag_matrix(&d)
    }
}

/// Schwarzschild solution in `n+1` dimensions, `f(r) = 1 − (r_s/r)^{n−2}`,
/// coordinates `(t, r, θ…, φ)`.
pub fn schwarzschild(n: usize, rs: f64, region: Region) -> Result<ChartedSpacetime> {
    if n < 3 {
        return Err(LabError::InvalidParameter(
            "schwarzschild needs n >= 3 (for n = 2 the lapse 1 - (r_s/r)^0 vanishes)".into(),
        ));
    }
    if !(rs > 0.0) {
        return Err(LabError::InvalidParameter("schwarzschild needs r_s > 0".into()));
    }
    let dim = n + 1;
    let nang = n - 1;
    let mut coord_names = vec!["t".to_string(), "r".to_string()];
    coord_names.extend(angle_names(nang));
    let mut domain = match region {
        Region::Exterior => vec![Constraint::lower("r", 1, rs, EdgeKind::Artificial)],
        Region::Interior => vec![
            Constraint::lower("r", 1, 0.0, EdgeKind::Inextendible),
            Constraint::upper("r", 1, rs, EdgeKind::Artificial),
        ],
    };
    domain.extend(angle_constraints(&coord_names, 2, nang));
    let mut sample_box = match region {
        Region::Exterior => vec![(-10.0, 10.0), (1.2 * rs, 20.0 * rs)],
        Region::Interior => vec![(-10.0, 10.0), (0.05 * rs, 0.95 * rs)],
    };
    sample_box.extend(angle_box(nang));

    let nn = n as i32;
    let closed = move |x: &[f64]| -> Vec<f64> {
        let r = x[1];
        let q = (rs / r).powi(nn - 2);
        let f = SchwarzschildMetric { n: nn as usize, rs }.f(r);
        let fp = (nn - 2) as f64 * q / r;
        let h = sphere_diag(&x[2..]);
        let hg = sphere_diag_grad(&x[2..]);
        let mut diag = vec![-f, 1.0 / f];
        diag.extend(h.iter().map(|hk| r * r * hk));
        let mut grad = vec![vec![0.0; dim]; dim];
        grad[1][0] = -fp;
        grad[1][1] = -fp / (f * f);
        for (k, hk) in h.iter().enumerate() {
            grad[1][2 + k] = 2.0 * r * hk;
        }
        for i in 0..nang {
            for k in 0..nang {
                grad[2 + i][2 + k] = r * r * hg[i][k];
            }
        }
        diagonal_christoffel(&diag, &grad)
    };
    let time_orient: crate::geometry::VectorFieldFn = match region {
        Region::Exterior => Arc::new(move |_x: &[f64]| {
            let mut t = vec![0.0; dim];
            t[0] = 1.0;
            t
        }),
        Region::Interior => Arc::new(move |_x: &[f64]| {
            let mut t = vec![0.0; dim];
            t[1] = -1.0;
            t
        }),
    };
    Ok(ChartedSpacetime {
        name: "schwarzschild".into(),
        dim,
        coord_names,
        metric: Arc::new(SchwarzschildMetric { n, rs }),
        domain,
        christoffel_closed_form: Some(Arc::new(closed)),
        time_orient_field: time_orient,
        sample_box,
        params: vec![
            ("n".into(), n as f64),
            ("r_s".into(), rs),
            (
                "interior".into(),
                if region == Region::Interior { 1.0 } else { 0.0 },
            ),
        ],
        note: match region {
            Region::Exterior => "Schwarzschild exterior r > r_s (vacuum)".into(),
            Region::Interior => {
                "Schwarzschild interior 0 < r < r_s; r is a time coordinate, future is decreasing r"
                    .into()
            }
        },
    })
}

// --- de Sitter ---------------------------------------------------------------

struct DeSitterMetric {
    alpha: f64,
}

impl MetricFormula for DeSitterMetric {
    fn components<S: Real>(&self, x: &[S]) -> Vec<S> {
        let a2 = self.alpha * self.alpha;
        let c = x[0].cosh();
        let w = c * c * a2;
        let mut d = vec![S::cst(-a2)];
        d.extend(sphere_diag(&x[1..]).into_iter().map(|h| h * w));
        diag_matrix(&d)
    }
}

/// de Sitter space `α²(−dt² + cosh²t h_{S^n})`, `Λ = n(n−1)/(2α²)`.
pub fn de_sitter(n: usize, alpha: f64) -> Result<ChartedSpacetime> {
    if n < 1 || !(alpha > 0.0) {
        return Err(LabError::InvalidParameter("de_sitter needs n >= 1, alpha > 0".into()));
    }
    let dim = n + 1;
    let mut coord_names = vec!["t".to_string()];
    coord_names.extend(angle_names(n));
    let domain = angle_constraints(&coord_names, 1, n);
    let mut sample_box = vec![(-2.0, 2.0)];
    sample_box.extend(angle_box(n));
    let a2 = alpha * alpha;
    let closed = move |x: &[f64]| -> Vec<f64> {
        let (c, s) = (x[0].cosh(), x[0].sinh());
        let h = sphere_diag(&x[1..]);
        let hg = sphere_diag_grad(&x[1..]);
        let mut diag = vec![-a2];
        diag.extend(h.iter().map(|hk| a2 * c * c * hk));
        let mut grad = vec![vec![0.0; dim]; dim];
        for (k, hk) in h.iter().enumerate() {
            grad[0][1 + k] = 2.0 * a2 * c * s * hk;
        }
        for i in 0..n {
            for k in 0..n {
                grad[1 + i][1 + k] = a2 * c * c * hg[i][k];
            }
        }
        diagonal_christoffel(&diag, &grad)
    };
    Ok(ChartedSpacetime {
        name: "de_sitter".into(),
        dim,
        coord_names,
        metric: Arc::new(DeSitterMetric { alpha }),
        domain,
        christoffel_closed_form: Some(Arc::new(closed)),
        time_orient_field: Arc::new(move |_x: &[f64]| {
            let mut t = vec![0.0; dim];
            t[0] = 1.0;
            t
        }),
        sample_box,
        params: vec![("n".into(), n as f64), ("alpha".into(), alpha)],
        note: "de Sitter: spatial spheres contract to radius alpha at t = 0 and re-expand".into(),
    })
}

/// Cosmological constant carried by de Sitter (`+`) and anti-de Sitter (`−`):
/// `|Λ| = n(n−1)/(2α²)`.
pub fn lambda_for(n: usize, alpha: f64) -> f64 {
    (n * (n - 1)) as f64 / (2.0 * alpha * alpha)
}

// --- anti-de Sitter ------------------------------------------------------------

struct AdsMetric {
    alpha: f64,
}

impl MetricFormula for AdsMetric {
    fn components<S: Real>(&self, x: &[S]) -> Vec<S> {
        let c = x[1].cos();
        let w = (c * c).recip() * (self.alpha * self.alpha);
        let s = x[1].sin();
        let mut d = vec![-w, w];
        d.extend(sphere_diag(&x[2..]).into_iter().map(|h| h * w * s * s));
        diag_matrix(&d)
    }
}

/// Anti-de Sitter space on its universal cover, conformal chart
/// `(α²/cos²x)(−dt² + dx² + sin²x h_{S^{n−1}})`, `t ∈ ℝ`.
///
/// This is the static universe with hyperbolic spatial sections. For `n = 1`
/// the chart is [`ads2`] with `x ∈ (−π/2, π/2)`.
pub fn anti_de_sitter(n: usize, alpha: f64) -> Result<ChartedSpacetime> {
    if n < 1 || !(alpha > 0.0) {
        return Err(LabError::InvalidParameter(
            "anti_de_sitter needs n >= 1, alpha > 0".into(),
        ));
    }
    let dim = n + 1;
    let nang = n - 1;
    let mut coord_names = vec!["t".to_string(), "x".to_string()];
    coord_names.extend(angle_names(nang));
    let mut domain = vec![Constraint::upper("x", 1, FRAC_PI_2, EdgeKind::Inextendible)];
    if n == 1 {
        domain.push(Constraint::lower("x", 1, -FRAC_PI_2, EdgeKind::Inextendible));
    } else {
        domain.push(Constraint::lower("x", 1, 0.0, EdgeKind::Artificial));
    }
    domain.extend(angle_constraints(&coord_names, 2, nang));
    let mut sample_box = vec![
        (-5.0, 5.0),
        if n == 1 { (-1.4, 1.4) } else { (0.1, 1.4) },
    ];
    sample_box.extend(angle_box(nang));
    let a2 = alpha * alpha;
    let closed = move |x: &[f64]| -> Vec<f64> {
        let (c, s) = (x[1].cos(), x[1].sin());
        let w = a2 / (c * c);
        let dw = 2.0 * a2 * s / (c * c * c);
        let h = sphere_diag(&x[2..]);
        let hg = sphere_diag_grad(&x[2..]);
        let mut diag = vec![-w, w];
        diag.extend(h.iter().map(|hk| w * s * s * hk));
        let mut grad = vec![vec![0.0; dim]; dim];
        grad[1][0] = -dw;
        grad[1][1] = dw;
        for (k, hk) in h.iter().enumerate() {
            grad[1][2 + k] = (dw * s * s + w * 2.0 * s * c) * hk;
        }
        for i in 0..nang {
            for k in 0..nang {
                grad[2 + i][2 + k] = w * s * s * hg[i][k];
            }
        }
        diagonal_christoffel(&diag, &grad)
    };
    Ok(ChartedSpacetime {
        name: if n == 1 { "ads2".into() } else { "anti_de_sitter".into() },
        dim,
        coord_names,
        metric: Arc::new(AdsMetric { alpha }),
        domain,
        christoffel_closed_form: Some(Arc::new(closed)),
        time_orient_field: Arc::new(move |_x: &[f64]| {
            let mut t = vec![0.0; dim];
            t[0] = 1.0;
            t
        }),
        sample_box,
        params: vec![("n".into(), n as f64), ("alpha".into(), alpha)],
        note: "anti-de Sitter universal cover: static universe with hyperbolic spatial sections"
            .into(),
    })
}

/// Two-dimensional anti-de Sitter space, `(α²/cos²x)(−dt² + dx²)`, `x ∈ (−π/2, π/2)`.
pub fn ads2(alpha: f64) -> Result<ChartedSpacetime> {
    anti_de_sitter(1, alpha)
}

// --- FLRW --------------------------------------------------------------------

struct FlrwMetric {
    n: usize,
    k: i32,
    scale: Arc<dyn ScaleFactor>,
}

impl MetricFormula for FlrwMetric {
    fn components<S: Real>(&self, x: &[S]) -> Vec<S> {
        let sf = &self.scale;
        let a = x[0].taylor(&|t, k| sf.derivative(t, k), 0);
        let a2 = a * a;
        let mut d = vec![-S::one()];
        if self.k == 0 || self.n == 1 {
            d.extend((0..self.n).map(|_| a2));
        } else {
            let chi = x[1];
            let s = if self.k > 0 { chi.sin() } else { chi.sinh() };
            d.push(a2);
            d.extend(sphere_diag(&x[2..]).into_iter().map(|h| h * a2 * s * s));
        }
        diag_matrix(&d)
    }
}

/// FLRW model `−dt² + a²(t) h_k`. For `k = 0` the spatial chart is Cartesian;
/// for `k = ±1` it is `(χ, θ…, φ)` with `dχ² + sin²χ h` or `dχ² + sinh²χ h`.
pub fn flrw(n: usize, k: i32, alpha: f64, scale: Arc<dyn ScaleFactor>) -> Result<ChartedSpacetime> {
    if n < 1 || !(-1..=1).contains(&k) {
        return Err(LabError::InvalidParameter("flrw needs n >= 1, k in {-1,0,1}".into()));
    }
    let dim = n + 1;
    let (t_lo, t_hi) = scale.interval();
    let (sing_lo, sing_hi) = scale.singular_ends();
    let curved = k != 0 && n > 1;
    let mut coord_names = vec!["t".to_string()];
    if curved {
        coord_names.push("chi".into());
        coord_names.extend(angle_names(n - 1));
    } else {
        coord_names.extend((1..=n).map(|i| format!("x{i}")));
    }
    let mut domain = Vec::new();
    let kind = |s: bool| if s { EdgeKind::Inextendible } else { EdgeKind::Artificial };
    if t_lo.is_finite() {
        domain.push(Constraint::lower("t", 0, t_lo, kind(sing_lo)));
    }
    if t_hi.is_finite() {
        domain.push(Constraint::upper("t", 0, t_hi, kind(sing_hi)));
    }
    if curved {
        domain.push(Constraint::lower("chi", 1, 0.0, EdgeKind::Artificial));
        if k > 0 {
            domain.push(Constraint::upper("chi", 1, PI, EdgeKind::Artificial));
        }
        domain.extend(angle_constraints(&coord_names, 2, n - 1));
    }
    let lo = if t_lo.is_finite() { t_lo + 0.05 * (1.0 + t_lo.abs()) } else { -2.0 };
    let hi = if t_hi.is_finite() { t_hi - 0.05 * (1.0 + t_hi.abs()) } else { lo + 4.0 };
    let mut sample_box = vec![(lo, hi)];
    if curved {
        sample_box.push((0.3, if k > 0 { PI - 0.3 } else { 2.0 }));
        sample_box.extend(angle_box(n - 1));
    } else {
        sample_box.extend((0..n).map(|_| (-3.0, 3.0)));
    }
    let sf = scale.clone();
    let closed = move |x: &[f64]| -> Vec<f64> {
        let a = sf.derivative(x[0], 0);
        let ad = sf.derivative(x[0], 1);
        let mut diag = vec![-1.0];
        let mut grad = vec![vec![0.0; dim]; dim];
        if !curved {
            for i in 1..dim {
                diag.push(a * a);
                grad[0][i] = 2.0 * a * ad;
            }
        } else {
            let chi = x[1];
            let (s, c) = if k > 0 { (chi.sin(), chi.cos()) } else { (chi.sinh(), chi.cosh()) };
            let h = sphere_diag(&x[2..]);
            let hg = sphere_diag_grad(&x[2..]);
            diag.push(a * a);
            grad[0][1] = 2.0 * a * ad;
            for (j, hk) in h.iter().enumerate() {
                diag.push(a * a * s * s * hk);
                grad[0][2 + j] = 2.0 * a * ad * s * s * hk;
                grad[1][2 + j] = a * a * 2.0 * s * c * hk;
            }
            for i in 0..n - 1 {
                for j in 0..n - 1 {
                    grad[2 + i][2 + j] = a * a * s * s * hg[i][j];
                }
            }
        }
        diagonal_christoffel(&diag, &grad)
    };
    Ok(ChartedSpacetime {
        name: "flrw".into(),
        dim,
        coord_names,
        metric: Arc::new(FlrwMetric { n, k, scale }),
        domain,
        christoffel_closed_form: Some(Arc::new(closed)),
        time_orient_field: Arc::new(move |_x: &[f64]| {
            let mut t = vec![0.0; dim];
            t[0] = 1.0;
            t
        }),
        sample_box,
        params: vec![("n".into(), n as f64), ("k".into(), k as f64), ("alpha".into(), alpha)],
        note: "FLRW dust model; rho = n(n-1) alpha / a^n, U = d/dt".into(),
    })
}

// --- Clifton-Pohl ------------------------------------------------------------

struct CliftonPohlMetric;

impl MetricFormula for CliftonPohlMetric {
    fn components<S: Real>(&self, x: &[S]) -> Vec<S> {
        let h = (x[0] * x[0] + x[1] * x[1]).recip();
        vec![S::zero(), h, h, S::zero()]
    }
}

/// `(du⊗dv + dv⊗du)/(u² + v²)` on `ℝ² ∖ {0}` (the covering chart of the
/// Clifton-Pohl torus).
pub fn clifton_pohl() -> ChartedSpacetime {
    let closed = |x: &[f64]| -> Vec<f64> {
        let (u, v) = (x[0], x[1]);
        let rho = u * u + v * v;
        // Γ^u_uu, Γ^v_vv; all others vanish
        let mut g = vec![0.0; 8];
        g[0] = -2.0 * u / rho;
        g[7] = -2.0 * v / rho;
        g
    };
    ChartedSpacetime {
        name: "clifton_pohl".into(),
        dim: 2,
        coord_names: vec!["u".into(), "v".into()],
        metric: Arc::new(CliftonPohlMetric),
        domain: vec![Constraint::new("origin", Side::Lower, EdgeKind::Inextendible, |x| {
            (x[0] * x[0] + x[1] * x[1]).sqrt()
        })],
        christoffel_closed_form: Some(Arc::new(closed)),
        time_orient_field: Arc::new(|_x: &[f64]| vec![-1.0, 1.0]),
        sample_box: vec![(-3.0, 3.0), (-3.0, 3.0)],
        params: Vec::new(),
        note: "covering chart of the Clifton-Pohl torus".into(),
    }
}

// --- Milne -------------------------------------------------------------------

/// Proper time from the origin, `τ = ((x⁰)² − Σ(xⁱ)²)^{1/2}`; negative
/// outside the future light cone (signed distance for the domain check).
pub fn milne_tau(x: &[f64]) -> f64 {
    let r = x[1..].iter().map(|c| c * c).sum::<f64>().sqrt();
    let s = (x[0] - r) * (x[0] + r);
    if x[0] > 0.0 && s > 0.0 {
        s.sqrt()
    } else if x[0] > 0.0 {
        -(-s).sqrt()
    } else {
        x[0] - r
    }
}

/// The Milne universe: the chronological future of the origin in Minkowski
/// space, in Minkowski coordinates. Its time function is [`milne_tau`].
pub fn milne(n: usize) -> Result<ChartedSpacetime> {
    let mut m = minkowski(n)?;
    m.name = "milne".into();
    m.domain = vec![Constraint::new("tau", Side::Lower, EdgeKind::Inextendible, milne_tau)];
    let mut b = vec![(0.5, 3.0)];
    b.extend((0..n).map(|_| (-1.0, 1.0)));
    m.sample_box = b;
    m.note = "Milne universe x0 > 0, <x,x> < 0; slices tau = const are hyperbolic spaces".into();
    Ok(m)
}

// --- registry ----------------------------------------------------------------

/// A named constructor with its numeric parameters and their defaults.
#[derive(Clone, Copy, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub params: &'static [(&'static str, f64)],
    pub note: &'static str,
}

pub const ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        name: "minkowski",
        params: &[("n", 3.0)],
        note: "flat spacetime",
    },
    CatalogEntry {
        name: "schwarzschild-exterior",
        params: &[("n", 3.0), ("rs", 1.0)],
        note: "static vacuum outside the horizon, r > rs",
    },
    CatalogEntry {
        name: "schwarzschild-interior",
        params: &[("n", 3.0), ("rs", 1.0)],
        note: "vacuum inside the horizon, 0 < r < rs, r is the time coordinate",
    },
    CatalogEntry {
        name: "de-sitter",
        params: &[("n", 3.0), ("alpha", 1.0)],
        note: "positive cosmological constant, global chart",
    },
    CatalogEntry {
        name: "anti-de-sitter",
        params: &[("n", 3.0), ("alpha", 1.0)],
        note: "negative cosmological constant, static conformal chart of the universal cover",
    },
    CatalogEntry {
        name: "ads2",
        params: &[("alpha", 1.0)],
        note: "two-dimensional anti-de Sitter strip, x in (-pi/2, pi/2)",
    },
    CatalogEntry {
        name: "flrw",
        params: &[
            ("n", 3.0),
            ("k", 0.0),
            ("alpha", 1.0),
            ("a0", 1.650963624447314),
            ("t0", 1.0),
            ("direction", 1.0),
            ("t_lo", -1.0),
            ("t_hi", 20.0),
        ],
        note: "dust FLRW with the scale factor solved from a(t0) = a0; direction +1 expands, -1 contracts",
    },
    CatalogEntry {
        name: "clifton-pohl",
        params: &[],
        note: "covering chart of the Clifton-Pohl torus",
    },
    CatalogEntry {
        name: "milne",
        params: &[("n", 3.0)],
        note: "interior of the future light cone of the origin in Minkowski space",
    },
];

pub fn entry(name: &str) -> Option<&'static CatalogEntry> {
    ENTRIES.iter().find(|e| e.name == name)
}

/// A constructed catalog spacetime, with the scale factor when it has one.
#[derive(Clone)]
pub struct Built {
    pub spacetime: ChartedSpacetime,
    pub scale: Option<Arc<dyn ScaleFactor>>,
}

fn count(v: f64, key: &str) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v < 1e6 {
        Ok(v as usize)
    } else {
        Err(LabError::InvalidParameter(format!("{key} = {v} must be a non-negative integer")))
    }
}

/// Builds `name` from `params`, filling in defaults. Unknown names and
/// parameter keys are rejected.
pub fn build(name: &str, params: &[(String, f64)]) -> Result<Built> {
    let e = entry(name).ok_or_else(|| LabError::InvalidParameter(format!("unknown metric name '{name}'")))?;
    for (k, _) in params {
        if !e.params.iter().any(|(p, _)| p == k) {
            return Err(LabError::InvalidParameter(format!("metric '{name}' has no parameter '{k}'")));
        }
    }
    let get = |key: &str| {
        params
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
            .or_else(|| e.params.iter().find(|(p, _)| *p == key).map(|(_, v)| *v))
            .expect("declared parameter")
    };
    let plain = |m: ChartedSpacetime| Built { spacetime: m, scale: None };
    Ok(match name {
        "minkowski" => plain(minkowski(count(get("n"), "n")?)?),
        "schwarzschild-exterior" => plain(schwarzschild(count(get("n"), "n")?, get("rs"), Region::Exterior)?),
        "schwarzschild-interior" => plain(schwarzschild(count(get("n"), "n")?, get("rs"), Region::Interior)?),
        "de-sitter" => plain(de_sitter(count(get("n"), "n")?, get("alpha"))?),
        "anti-de-sitter" => plain(anti_de_sitter(count(get("n"), "n")?, get("alpha"))?),
        "ads2" => plain(ads2(get("alpha"))?),
        "clifton-pohl" => plain(clifton_pohl()),
        "milne" => plain(milne(count(get("n"), "n")?)?),
        "flrw" => {
            let k = get("k");
            if ![-1.0, 0.0, 1.0].contains(&k) {
                return Err(LabError::InvalidParameter(format!("k = {k} must be -1, 0 or 1")));
            }
            let dir = get("direction");
            if dir != 1.0 && dir != -1.0 {
                return Err(LabError::InvalidParameter(format!("direction = {dir} must be +1 or -1")));
            }
            let (m, sol) = crate::focusing::flrw_from_solver(
                count(get("n"), "n")?,
                k as i32,
                get("alpha"),
                get("a0"),
                dir > 0.0,
                get("t0"),
                (get("t_lo"), get("t_hi")),
            )?;
            Built {
                spacetime: m,
                scale: Some(sol),
            }
        }
        _ => unreachable!("entry table and constructors agree"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_builds_every_entry_with_defaults() {
        for e in ENTRIES {
            let b = build(e.name, &[]).unwrap();
            assert_eq!(b.scale.is_some(), e.name == "flrw");
        }
        assert!(matches!(build("kerr", &[]).err(), Some(LabError::InvalidParameter(_))));
        let err = build("minkowski", &[("rs".into(), 1.0)]).err().unwrap();
        assert!(err.to_string().contains("'rs'"));
    }

    #[test]
    fn schwarzschild_gtt_at_twice_rs() {
        for n in 3..=5 {
            let m = schwarzschild(n, 1.0, Region::Exterior).unwrap();
            let mut x = vec![0.0, 2.0];
            x.extend(vec![FRAC_PI_2; n - 1]);
            let g = m.metric_at(&x);
            let expect = -(1.0 - 2f64.powi(-(n as i32 - 2)));
            assert!((g[0] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn schwarzschild_interior_rejects_horizon() {
        let m = schwarzschild(3, 1.0, Region::Interior).unwrap();
        assert!(!m.contains(&[0.0, 1.0, 1.0, 0.0], 0.0));
        assert!(m.contains(&[0.0, 0.5, 1.0, 0.0], 0.0));
    }

    #[test]
    fn schwarzschild_rejects_bad_parameters() {
        assert!(schwarzschild(2, 1.0, Region::Exterior).is_err());
        assert!(schwarzschild(3, 0.0, Region::Exterior).is_err());
    }

    #[test]
    fn de_sitter_minimum_radius_is_alpha() {
        let alpha = 1.7;
        let m = de_sitter(3, alpha).unwrap();
        // radius of the spatial sphere = sqrt(g_phi_phi) on the equator
        let r = |t: f64| m.metric_at(&[t, FRAC_PI_2, FRAC_PI_2, 0.0])[15].sqrt();
        assert!((r(0.0) - alpha).abs() < 1e-14);
        assert!(r(0.3) > alpha && r(-0.3) > alpha);
    }

    #[test]
    fn ads2_metric_at_origin() {
        let m = ads2(2.0).unwrap();
        assert_eq!(m.metric_at(&[0.0, 0.0]), vec![-4.0, 0.0, 0.0, 4.0]);
    }

    #[test]
    fn flrw_with_unit_scale_is_minkowski() {
        let m = flrw(3, 0, 0.0, Arc::new(ConstantScale(1.0))).unwrap();
        let mk = minkowski(3).unwrap();
        let x = [0.3, 1.0, -2.0, 0.5];
        assert_eq!(m.metric_at(&x), mk.metric_at(&x));
    }

    #[test]
    fn milne_tau_is_unit_time_function() {
        // grad tau = -x/tau (index raised with eta) so <grad tau, grad tau> = -1
        let x = [2.0, 0.5, -0.3, 0.7];
        let tau = milne_tau(&x);
        let grad: Vec<f64> = x.iter().map(|c| -c / tau).collect();
        let g = minkowski(3).unwrap().metric_at(&x);
        let q = crate::linalg::quad(&g, &grad, &grad);
        assert!((q + 1.0).abs() < 1e-14);
        assert!(milne_tau(&[1.0, 2.0, 0.0, 0.0]) < 0.0);
        assert!(milne_tau(&[-3.0, 0.0, 0.0, 0.0]) < 0.0);
    }

    #[test]
    fn every_entry_is_lorentzian_on_its_samples() {
        use rand::SeedableRng;
        let entries: Vec<ChartedSpacetime> = vec![
            minkowski(3).unwrap(),
            schwarzschild(3, 1.0, Region::Exterior).unwrap(),
            schwarzschild(3, 1.0, Region::Interior).unwrap(),
            schwarzschild(4, 1.0, Region::Interior).unwrap(),
            de_sitter(3, 1.0).unwrap(),
            anti_de_sitter(3, 1.0).unwrap(),
            ads2(1.0).unwrap(),
            flrw(3, 0, 1.0, Arc::new(ClosedFormScale::flat_dust(3, 1.0))).unwrap(),
            clifton_pohl(),
            milne(3).unwrap(),
        ];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for m in &entries {
            for _ in 0..1000 {
                let x = m.sample_point(&mut rng);
                m.check_lorentzian(&x).unwrap();
            }
        }
    }
}
