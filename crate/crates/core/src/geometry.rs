//! Charts, events, tangent vectors and causal classification.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::dual::{Real, D1, D2};
use crate::error::{LabError, Result};
use crate::linalg;

/// Default width of the null band in [`classify`], relative to the auxiliary
/// scale `Σ|g_μν||v^μ||v^ν|`.
pub const DEFAULT_NULL_TOL: f64 = 1e-9;

/// Default distance (coordinate units) kept from the chart boundary.
pub const DEFAULT_DOMAIN_MARGIN: f64 = 1e-10;

/// A metric written once against [`Real`], so it can be evaluated on plain
/// floats and on (nested) dual numbers alike.
///
/// Components are returned row-major, `dim × dim`.
pub trait MetricFormula: Send + Sync + 'static {
    fn components<S: Real>(&self, x: &[S]) -> Vec<S>;
}

/// Object-safe face of a [`MetricFormula`]; every formula gets it for free.
pub trait MetricField: Send + Sync {
    fn eval(&self, x: &[f64]) -> Vec<f64>;
    fn eval_d1(&self, x: &[D1]) -> Vec<D1>;
    fn eval_d2(&self, x: &[D2]) -> Vec<D2>;
}

impl<F: MetricFormula> MetricField for F {
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.components(x)
    }
    fn eval_d1(&self, x: &[D1]) -> Vec<D1> {
        self.components(x)
    }
    fn eval_d2(&self, x: &[D2]) -> Vec<D2> {
        self.components(x)
    }
}

pub type VectorFieldFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type ScalarFieldFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Lower => write!(f, "lower"),
            Side::Upper => write!(f, "upper"),
        }
    }
}

/// Whether leaving the chart through a boundary means leaving the spacetime.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    /// The spacetime ends here (curvature singularity, edge of the model).
    Inextendible,
    /// Coordinate artefact; the spacetime continues beyond it.
    Artificial,
}

/// One face of a chart domain: a signed distance that is positive inside.
#[derive(Clone)]
pub struct Constraint {
    pub label: String,
    pub side: Side,
    pub kind: EdgeKind,
    distance: ScalarFieldFn,
}

impl Constraint {
    pub fn new(
        label: impl Into<String>,
        side: Side,
        kind: EdgeKind,
        distance: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            side,
            kind,
            distance: Arc::new(distance),
        }
    }

    /// `x[coord] > bound`.
    pub fn lower(label: impl Into<String>, coord: usize, bound: f64, kind: EdgeKind) -> Self {
        Self::new(label, Side::Lower, kind, move |x| x[coord] - bound)
    }

    /// `x[coord] < bound`.
    pub fn upper(label: impl Into<String>, coord: usize, bound: f64, kind: EdgeKind) -> Self {
        Self::new(label, Side::Upper, kind, move |x| bound - x[coord])
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        (self.distance)(x)
    }
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Constraint")
            .field("label", &self.label)
            .field("side", &self.side)
            .field("kind", &self.kind)
            .finish()
    }
}

pub type ChristoffelFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A spacetime presented in a single coordinate chart.
#[derive(Clone)]
pub struct ChartedSpacetime {
    pub name: String,
    pub dim: usize,
    pub coord_names: Vec<String>,
    pub metric: Arc<dyn MetricField>,
    pub domain: Vec<Constraint>,
    /// Γ^λ_μν, index `λ·dim² + μ·dim + ν`.
    pub christoffel_closed_form: Option<ChristoffelFn>,
    pub time_orient_field: VectorFieldFn,
    /// Coordinate box used when drawing sample events (intersected with the domain).
    pub sample_box: Vec<(f64, f64)>,
    pub params: Vec<(String, f64)>,
    pub note: String,
}

impl fmt::Debug for ChartedSpacetime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartedSpacetime")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("params", &self.params)
            .finish()
    }
}

impl ChartedSpacetime {
    /// Spatial dimension `n` (spacetime dimension is `n + 1`).
    pub fn n(&self) -> usize {
        self.dim - 1
    }

    pub fn contains(&self, x: &[f64], margin: f64) -> bool {
        x.len() == self.dim
            && x.iter().all(|c| c.is_finite())
            && self.domain.iter().all(|c| c.distance(x) > margin)
    }

    /// First constraint violated at `x`, if any.
    pub fn violated(&self, x: &[f64], margin: f64) -> Option<&Constraint> {
        self.domain.iter().find(|c| !(c.distance(x) > margin))
    }

    pub fn require_domain(&self, x: &[f64]) -> Result<()> {
        if self.contains(x, 0.0) {
            Ok(())
        } else {
            Err(LabError::Domain {
                chart: self.name.clone(),
                coords: x.to_vec(),
            })
        }
    }

    /// Metric without a domain check, symmetrized.
    pub fn metric_at(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.metric.eval(x);
        let n = self.dim;
        for i in 0..n {
            for j in i + 1..n {
                let s = 0.5 * (g[i * n + j] + g[j * n + i]);
                g[i * n + j] = s;
                g[j * n + i] = s;
            }
        }
        g
    }

    pub fn time_orientation(&self, x: &[f64]) -> Vec<f64> {
        (self.time_orient_field)(x)
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    /// Draws an event uniformly from the sample box, rejecting points outside
    /// the domain (with a margin that keeps dual-number stencils valid).
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        loop {
            let x: Vec<f64> = self
                .sample_box
                .iter()
                .map(|&(lo, hi)| if hi > lo { rng.random_range(lo..hi) } else { lo })
                .collect();
            if self.contains(&x, 1e-6) {
                return x;
            }
        }
    }

    /// Checks symmetry, Lorentzian signature and that the time orientation
    /// field is timelike at `x`.
    pub fn check_lorentzian(&self, x: &[f64]) -> Result<()> {
        let n = self.dim;
        let g = self.metric.eval(x);
        for i in 0..n {
            for j in i + 1..n {
                if (g[i * n + j] - g[j * n + i]).abs() > 1e-12 {
                    return Err(LabError::Contract(format!(
                        "{}: metric not symmetric at {x:?}",
                        self.name
                    )));
                }
            }
        }
        let eig = linalg::sym_eigenvalues(&g, n);
        let neg = eig.iter().filter(|&&e| e < 0.0).count();
        let zero = eig.iter().filter(|&&e| e == 0.0).count();
        if neg != 1 || zero != 0 {
            return Err(LabError::Contract(format!(
                "{}: signature has {neg} negative eigenvalues at {x:?}: {eig:?}",
                self.name
            )));
        }
        let t = self.time_orientation(x);
        if linalg::quad(&g, &t, &t) >= 0.0 {
            return Err(LabError::Contract(format!(
                "{}: time orientation field not timelike at {x:?}",
                self.name
            )));
        }
        Ok(())
    }
}

/// Evaluates the metric at `x`, failing outside the domain.
pub fn eval_metric(m: &ChartedSpacetime, x: &[f64]) -> Result<Vec<f64>> {
    m.require_domain(x)?;
    Ok(m.metric_at(x))
}

/// A point of the spacetime in chart coordinates.
#[derive(Clone, Debug)]
pub struct Event<'a> {
    pub chart: &'a ChartedSpacetime,
    pub x: Vec<f64>,
}

impl<'a> Event<'a> {
    pub fn new(chart: &'a ChartedSpacetime, x: Vec<f64>) -> Result<Self> {
        if x.len() != chart.dim {
            return Err(LabError::Usage(format!(
                "event needs {} coordinates, got {}",
                chart.dim,
                x.len()
            )));
        }
        chart.require_domain(&x)?;
        Ok(Self { chart, x })
    }

    pub fn metric(&self) -> Vec<f64> {
        self.chart.metric_at(&self.x)
    }

    fn same_as(&self, other: &Event<'_>) -> bool {
        std::ptr::eq(self.chart, other.chart) && self.x == other.x
    }
}

/// A vector attached to an event.
#[derive(Clone, Debug)]
pub struct Tangent<'a> {
    pub at: Event<'a>,
    pub v: Vec<f64>,
}

impl<'a> Tangent<'a> {
    pub fn new(at: Event<'a>, v: Vec<f64>) -> Result<Self> {
        if v.len() != at.chart.dim {
            return Err(LabError::Usage(format!(
                "tangent needs {} components, got {}",
                at.chart.dim,
                v.len()
            )));
        }
        Ok(Self { at, v })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            at: self.at.clone(),
            v: self.v.iter().map(|x| x * c).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Causal {
    Timelike,
    Null,
    Spacelike,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Future,
    Past,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CausalCharacter {
    pub causal: Causal,
    pub orientation: Orientation,
}

impl fmt::Display for CausalCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}/{:?}", self.causal, self.orientation)
    }
}

/// `⟨a, b⟩`; both tangents must sit at the same event.
pub fn inner(a: &Tangent<'_>, b: &Tangent<'_>) -> Result<f64> {
    if !a.at.same_as(&b.at) {
        return Err(LabError::Usage(
            "inner product of vectors at different events".into(),
        ));
    }
    Ok(linalg::quad(&a.at.metric(), &a.v, &b.v))
}

/// `|⟨v, v⟩|^½`.
pub fn norm_length(v: &Tangent<'_>) -> f64 {
    linalg::quad(&v.at.metric(), &v.v, &v.v).abs().sqrt()
}

/// `Σ |g_μν| |v^μ| |v^ν|`, the magnitude against which `⟨v,v⟩` is judged.
pub fn auxiliary_scale(g: &[f64], v: &[f64]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += g[i * n + j].abs() * v[i].abs() * v[j].abs();
        }
    }
    s
}

/// Causal character and time orientation of a vector, with a null band of
/// relative width `tol`.
pub fn classify(v: &Tangent<'_>, tol: f64) -> CausalCharacter {
    let g = v.at.metric();
    let t = v.at.chart.time_orientation(&v.at.x);
    classify_raw(&g, &t, &v.v, tol)
}

/// [`classify`] on raw components.
pub fn classify_raw(g: &[f64], time_field: &[f64], v: &[f64], tol: f64) -> CausalCharacter {
    if v.iter().all(|&c| c == 0.0) {
        return CausalCharacter {
            causal: Causal::Null,
            orientation: Orientation::None,
        };
    }
    let q = linalg::quad(g, v, v);
    let s = auxiliary_scale(g, v);
    let causal = if q.abs() <= tol * s {
        Causal::Null
    } else if q < 0.0 {
        Causal::Timelike
    } else {
        Causal::Spacelike
    };
    let orientation = match causal {
        Causal::Spacelike => Orientation::None,
        _ => {
            if linalg::quad(g, v, time_field) < 0.0 {
                Orientation::Future
            } else {
                Orientation::Past
            }
        }
    };
    CausalCharacter {
        causal,
        orientation,
    }
}

/// Rescales a timelike vector to unit length.
pub fn normalize_timelike(g: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let q = linalg::quad(g, v, v);
    if !(q < 0.0) {
        return Err(LabError::Contract(format!(
            "vector {v:?} is not timelike (<v,v> = {q})"
        )));
    }
    let s = 1.0 / (-q).sqrt();
    Ok(v.iter().map(|c| c * s).collect())
}

/// Orthonormal frame `(e₀, e₁, …, e_n)` at a point with `e₀ ∝ first`
/// (timelike), completed by Gram-Schmidt on the coordinate basis.
pub fn orthonormal_frame(g: &[f64], first: &[f64]) -> Result<Vec<Vec<f64>>> {
    let dim = first.len();
    let e0 = normalize_timelike(g, first)?;
    let mut frame = vec![e0];
    for k in 0..dim {
        if frame.len() == dim {
            break;
        }
        let mut w = vec![0.0; dim];
        w[k] = 1.0;
        for e in &frame {
            let ee = linalg::quad(g, e, e);
            let c = linalg::quad(g, &w, e) / ee;
            for (wi, ei) in w.iter_mut().zip(e) {
                *wi -= c * ei;
            }
        }
        let q = linalg::quad(g, &w, &w);
        let scale = auxiliary_scale(g, &w).max(f64::MIN_POSITIVE);
        if q > 1e-10 * scale {
            let s = 1.0 / q.sqrt();
            frame.push(w.into_iter().map(|c| c * s).collect());
        }
    }
    if frame.len() != dim {
        return Err(LabError::Contract("could not complete an orthonormal frame".into()));
    }
    Ok(frame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn inner_products_in_minkowski() {
        let m = catalog::minkowski(3).unwrap();
        let p = Event::new(&m, vec![0.0; 4]).unwrap();
        let a = Tangent::new(p.clone(), vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(inner(&a, &a).unwrap(), -1.0);
        let b = Tangent::new(p.clone(), vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(inner(&b, &b).unwrap(), 0.0);
    }

    #[test]
    fn inner_in_schwarzschild_exterior() {
        let m = catalog::schwarzschild(3, 1.0, catalog::Region::Exterior).unwrap();
        let p = Event::new(&m, vec![0.0, 2.0, std::f64::consts::FRAC_PI_2, 0.0]).unwrap();
        let a = Tangent::new(p, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((inner(&a, &a).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn inner_rejects_mismatched_events() {
        let m = catalog::minkowski(1).unwrap();
        let a = Tangent::new(Event::new(&m, vec![0.0, 0.0]).unwrap(), vec![1.0, 0.0]).unwrap();
        let b = Tangent::new(Event::new(&m, vec![0.0, 1e-300]).unwrap(), vec![1.0, 0.0]).unwrap();
        assert!(matches!(inner(&a, &b), Err(LabError::Usage(_))));
    }

    #[test]
    fn norm_length_examples() {
        let m = catalog::minkowski(3).unwrap();
        let p = Event::new(&m, vec![0.0; 4]).unwrap();
        let t = |v: Vec<f64>| Tangent::new(p.clone(), v).unwrap();
        assert_eq!(norm_length(&t(vec![2.0, 0.0, 0.0, 0.0])), 2.0);
        assert_eq!(norm_length(&t(vec![1.0, 1.0, 0.0, 0.0])), 0.0);
        assert_eq!(norm_length(&t(vec![3.0, 5.0, 0.0, 0.0])), 4.0);
    }

    #[test]
    fn classification_examples() {
        let m = catalog::minkowski(3).unwrap();
        let p = Event::new(&m, vec![0.0; 4]).unwrap();
        let t = |v: Vec<f64>| Tangent::new(p.clone(), v).unwrap();
        let c = classify(&t(vec![1.0, 0.0, 0.0, 0.0]), DEFAULT_NULL_TOL);
        assert_eq!((c.causal, c.orientation), (Causal::Timelike, Orientation::Future));
        let c = classify(&t(vec![-1.0, 1.0, 0.0, 0.0]), DEFAULT_NULL_TOL);
        assert_eq!((c.causal, c.orientation), (Causal::Null, Orientation::Past));
        let c = classify(&t(vec![1.0, 1.0 + 1e-15, 0.0, 0.0]), 1e-9);
        assert_eq!((c.causal, c.orientation), (Causal::Null, Orientation::Future));
        let c = classify(&t(vec![0.0, 1.0, 0.0, 0.0]), DEFAULT_NULL_TOL);
        assert_eq!((c.causal, c.orientation), (Causal::Spacelike, Orientation::None));
        let c = classify(&t(vec![0.0; 4]), DEFAULT_NULL_TOL);
        assert_eq!((c.causal, c.orientation), (Causal::Null, Orientation::None));
    }

    #[test]
    fn eval_metric_examples() {
        let m = catalog::minkowski(1).unwrap();
        assert_eq!(eval_metric(&m, &[3.0, -7.0]).unwrap(), vec![-1.0, 0.0, 0.0, 1.0]);
        let ads = catalog::ads2(1.0).unwrap();
        let g = eval_metric(&ads, &[0.0, 0.0]).unwrap();
        assert_eq!(g, vec![-1.0, 0.0, 0.0, 1.0]);
        let cp = catalog::clifton_pohl();
        let g = eval_metric(&cp, &[1.0, 1.0]).unwrap();
        assert_eq!(g, vec![0.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn eval_metric_out_of_domain_reports_coordinates() {
        let m = catalog::schwarzschild(3, 1.0, catalog::Region::Interior).unwrap();
        match eval_metric(&m, &[0.0, 1.0, 1.0, 0.0]) {
            Err(LabError::Domain { coords, .. }) => assert_eq!(coords, vec![0.0, 1.0, 1.0, 0.0]),
            other => panic!("expected domain error, got {other:?}"),
        }
    }
}
