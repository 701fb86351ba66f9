//! Dormand-Prince 5(4) with PI step control and continuous (dense) output.
//!
//! The right-hand side may refuse a state (for instance one outside a chart
//! domain). A refused stage is handled like a failed error test: the step is
//! halved and retried. Once the step falls below `min_step` the run ends with
//! [`OdeEnd::Underflow`] carrying the last refusal, which is how callers learn
//! *why* the solution could not be continued.

#[derive(Clone, Debug)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            min_step: 1e-14,
            initial_step: None,
            max_steps: 2_000_000,
        }
    }
}

/// One accepted step with its interpolation coefficients.
#[derive(Clone, Debug)]
pub struct Segment {
    pub t0: f64,
    pub h: f64,
    coeffs: Vec<f64>,
}

impl Segment {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len() / 5
    }

    /// Interpolated state at `t` (meaningful for `t` within the step).
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let n = self.dim();
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let c = &self.coeffs;
        (0..n)
            .map(|i| {
                c[i] + s * (c[n + i] + s1 * (c[2 * n + i] + s * (c[3 * n + i] + s1 * c[4 * n + i])))
            })
            .collect()
    }

    pub fn start(&self) -> &[f64] {
        &self.coeffs[..self.dim()]
    }

    pub fn end(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|i| self.coeffs[i] + self.coeffs[n + i]).collect()
    }
}

/// Piecewise interpolant over all accepted steps.
#[derive(Clone, Debug, Default)]
pub struct DenseOutput {
    pub segments: Vec<Segment>,
}

impl DenseOutput {
    pub fn t_start(&self) -> Option<f64> {
        self.segments.first().map(|s| s.t0)
    }

    pub fn t_end(&self) -> Option<f64> {
        self.segments.last().map(|s| s.t1())
    }

    fn forward(&self) -> bool {
        self.segments.first().map(|s| s.h > 0.0).unwrap_or(true)
    }

    /// State at `t`, or `None` outside the covered interval.
    pub fn eval(&self, t: f64) -> Option<Vec<f64>> {
        let (a, b) = (self.t_start()?, self.t_end()?);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if !(t >= lo && t <= hi) {
            return None;
        }
        let fwd = self.forward();
        let idx = self.segments.partition_point(|s| {
            if fwd {
                s.t1() < t
            } else {
                s.t1() > t
            }
        });
        let seg = &self.segments[idx.min(self.segments.len() - 1)];
        Some(seg.eval(t))
    }
}

pub enum Control<S> {
    Continue,
    Stop(S),
}

#[derive(Clone, Debug, PartialEq)]
pub enum OdeEnd<R, S> {
    Reached,
    Stopped(S),
    /// The step size fell below `min_step`; the last right-hand-side refusal
    /// (if the shrinking was caused by one) is attached.
    Underflow(Option<R>),
    /// The right-hand side refused the initial state.
    Rejected(R),
    TooManySteps,
}

#[derive(Clone, Debug)]
pub struct OdeRun<R, S> {
    pub dense: DenseOutput,
    pub end: OdeEnd<R, S>,
    pub t_final: f64,
    pub y_final: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFE: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

fn err_norm(e: &[f64], y0: &[f64], y1: &[f64], o: &OdeOptions) -> f64 {
    let n = e.len() as f64;
    let s: f64 = e
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(ei, (a, b))| {
            let sk = o.abs_tol + o.rel_tol * a.abs().max(b.abs());
            (ei / sk).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

/// Integrates `y' = f(t, y)` from `t0` towards `t_end` (either direction).
///
/// `monitor` sees every accepted step and may stop the run.
pub fn dopri5<R, S, F, M>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &OdeOptions,
    mut monitor: M,
) -> OdeRun<R, S>
where
    R: Clone,
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), R>,
    M: FnMut(&Segment) -> Control<S>,
{
    let n = y0.len();
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut dense = DenseOutput::default();
    let mut k1 = vec![0.0; n];
    let done = |dense: DenseOutput, end, t, y, acc, rej| OdeRun {
        dense,
        end,
        t_final: t,
        y_final: y,
        accepted: acc,
        rejected: rej,
    };
    if let Err(r) = f(t, &y, &mut k1) {
        return done(dense, OdeEnd::Rejected(r), t, y, 0, 0);
    }
    if t == t_end {
        return done(dense, OdeEnd::Reached, t, y, 0, 0);
    }

    let mut h = match opts.initial_step {
        Some(h) => h.abs(),
        None => initial_step(&mut f, t, &y, &k1, dir, opts),
    }
    .min(opts.max_step)
    .min((t_end - t).abs());

    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut yt = vec![0.0; n];
    let mut y1 = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut fac_old: f64 = 1e-4;
    let mut last_refusal: Option<R> = None;
    let mut after_reject = false;
    let (mut accepted, mut rejected) = (0usize, 0usize);

    loop {
        if accepted + rejected >= opts.max_steps {
            return done(dense, OdeEnd::TooManySteps, t, y, accepted, rejected);
        }
        if h < opts.min_step {
            return done(dense, OdeEnd::Underflow(last_refusal), t, y, accepted, rejected);
        }
        let mut last = false;
        if (t + dir * h - t_end) * dir >= 0.0 {
            h = (t_end - t).abs();
            last = true;
        }
        let hs = dir * h;

        let stages = (|| -> Result<(), R> {
            for i in 0..n {
                yt[i] = y[i] + hs * A21 * k1[i];
            }
            f(t + C2 * hs, &yt, &mut k2)?;
            for i in 0..n {
                yt[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
            }
            f(t + C3 * hs, &yt, &mut k3)?;
            for i in 0..n {
                yt[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            f(t + C4 * hs, &yt, &mut k4)?;
            for i in 0..n {
                yt[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            f(t + C5 * hs, &yt, &mut k5)?;
            for i in 0..n {
                yt[i] = y[i]
                    + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            f(t + hs, &yt, &mut k6)?;
            for i in 0..n {
                y1[i] = y[i]
                    + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            f(t + hs, &y1, &mut k7)?;
            Ok(())
        })();

        if let Err(r) = stages {
            last_refusal = Some(r);
            rejected += 1;
            h *= 0.5;
            after_reject = true;
            continue;
        }

        for i in 0..n {
            e[i] = hs
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err = err_norm(&e, &y, &y1, opts);
        if !err.is_finite() {
            rejected += 1;
            h *= 0.5;
            after_reject = true;
            continue;
        }
        let expo = 0.2 - BETA * 0.75;
        let fac11 = err.powf(expo);

        if err <= 1.0 {
            let mut fac = fac11 / fac_old.powf(BETA);
            fac = (fac / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            if after_reject {
                h_new = h_new.min(h);
            }
            fac_old = err.max(1e-4);

            let mut coeffs = vec![0.0; 5 * n];
            for i in 0..n {
                let dy = y1[i] - y[i];
                let bspl = hs * k1[i] - dy;
                coeffs[i] = y[i];
                coeffs[n + i] = dy;
                coeffs[2 * n + i] = bspl;
                coeffs[3 * n + i] = dy - hs * k7[i] - bspl;
                coeffs[4 * n + i] = hs
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                        + D7 * k7[i]);
            }
            let seg = Segment { t0: t, h: hs, coeffs };
            t = if last { t_end } else { t + hs };
            std::mem::swap(&mut y, &mut y1);
            std::mem::swap(&mut k1, &mut k7);
            accepted += 1;
            after_reject = false;
            last_refusal = None;
            let ctl = monitor(&seg);
            dense.segments.push(seg);
            if let Control::Stop(s) = ctl {
                return done(dense, OdeEnd::Stopped(s), t, y, accepted, rejected);
            }
            if last {
                return done(dense, OdeEnd::Reached, t, y, accepted, rejected);
            }
            h = h_new.min(opts.max_step);
        } else {
            rejected += 1;
            h /= (fac11 / SAFE).min(1.0 / FAC_MIN);
            after_reject = true;
        }
    }
}

fn initial_step<R, F>(f: &mut F, t: f64, y: &[f64], f0: &[f64], dir: f64, o: &OdeOptions) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), R>,
{
    let n = y.len();
    let sk: Vec<f64> = y.iter().map(|v| o.abs_tol + o.rel_tol * v.abs()).collect();
    let norm = |v: &[f64]| -> f64 {
        (v.iter().zip(&sk).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n as f64).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let mut h0 = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(o.max_step);
    let y1: Vec<f64> = (0..n).map(|i| y[i] + dir * h0 * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    if f(t + dir * h0, &y1, &mut f1).is_err() {
        return (h0 * 0.01).max(o.min_step * 10.0);
    }
    let diff: Vec<f64> = (0..n).map(|i| f1[i] - f0[i]).collect();
    let d2 = norm(&diff) / h0;
    let m = d1.max(d2);
    let h1 = if m <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / m).powf(0.2)
    };
    (100.0 * h0).min(h1).min(o.max_step)
}

/// First `t` in the segment at which `g(y(t))` changes sign, by bisection on
/// the interpolant; `None` if `g` has the same sign at both ends.
pub fn locate_crossing<G: Fn(&[f64]) -> f64>(seg: &Segment, g: G, tol: f64) -> Option<f64> {
    let (mut a, mut b) = (seg.t0, seg.t1());
    let mut ga = g(&seg.eval(a));
    let gb = g(&seg.eval(b));
    if ga == 0.0 {
        return Some(a);
    }
    if ga.signum() == gb.signum() {
        return None;
    }
    while (b - a).abs() > tol {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let gm = g(&seg.eval(m));
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_exp(t_end: f64) -> OdeRun<(), ()> {
        dopri5(
            |_t, y: &[f64], dy: &mut [f64]| {
                dy[0] = y[0];
                Ok(())
            },
            0.0,
            &[1.0],
            t_end,
            &OdeOptions::default(),
            |_s| Control::Continue,
        )
    }

    #[test]
    fn exponential_growth_and_dense_output() {
        let r = run_exp(2.0);
        assert_eq!(r.end, OdeEnd::Reached);
        assert_eq!(r.t_final, 2.0);
        assert!((r.y_final[0] - 2f64.exp()).abs() < 1e-9 * 2f64.exp());
        for &t in &[0.123, 0.77, 1.5, 1.999] {
            let y = r.dense.eval(t).unwrap()[0];
            assert!((y - f64::exp(t)).abs() < 1e-8, "t={t}: {y}");
        }
        assert!(r.dense.eval(2.1).is_none());
    }

    #[test]
    fn backward_integration() {
        let r = run_exp(-1.0);
        assert!((r.y_final[0] - (-1f64).exp()).abs() < 1e-10);
        let y = r.dense.eval(-0.4).unwrap()[0];
        assert!((y - (-0.4f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let r: OdeRun<(), ()> = dopri5(
            |_t, y: &[f64], dy: &mut [f64]| {
                dy[0] = y[1];
                dy[1] = -y[0];
                Ok(())
            },
            0.0,
            &[1.0, 0.0],
            20.0,
            &OdeOptions::default(),
            |_s| Control::Continue,
        );
        assert!((r.y_final[0] - 20f64.cos()).abs() < 1e-8);
    }

    #[test]
    fn refusal_leads_to_underflow_with_reason() {
        // y' = 1 refused beyond y = 1
        let r: OdeRun<&str, ()> = dopri5(
            |_t, y: &[f64], dy: &mut [f64]| {
                if y[0] >= 1.0 {
                    return Err("wall");
                }
                dy[0] = 1.0;
                Ok(())
            },
            0.0,
            &[0.0],
            5.0,
            &OdeOptions::default(),
            |_s| Control::Continue,
        );
        assert_eq!(r.end, OdeEnd::Underflow(Some("wall")));
        assert!((r.t_final - 1.0).abs() < 1e-12);
    }

    #[test]
    fn crossing_location() {
        let r = run_exp(1.0);
        let seg = r
            .dense
            .segments
            .iter()
            .find(|s| s.start()[0] < 2.0 && s.end()[0] >= 2.0)
            .unwrap();
        let t = locate_crossing(seg, |y| y[0] - 2.0, 1e-14).unwrap();
        assert!((t - 2f64.ln()).abs() < 1e-9);
    }
}
