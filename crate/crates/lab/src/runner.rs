//! Executes a validated scenario against the core library.

use std::f64::consts::PI;

use lorentz_core::catalog::{self, Built, ScaleFactor};
use lorentz_core::curvature::{self, MatterModel, SecVerdict};
use lorentz_core::curves::{self, ShootingConfig, TwinConfig};
use lorentz_core::exec::{self, Execution};
use lorentz_core::focusing::{self, ExpansionConfig, ScenarioConfig};
use lorentz_core::geodesic::{self, GeodesicResult, GeodesicState, IntegratorConfig};
use lorentz_core::geometry::{self, ChartedSpacetime};
use lorentz_core::jacobi::{self, FlrwSlice, IsotropicSlice, JacobiMode, MilneSlice, SchwarzschildInteriorSlice, Slice};
use lorentz_core::linalg;

use crate::output::{Report, Table};
use crate::scenario::*;
use crate::LabFailure;

pub const UNITS: &str = "geometric units (G = c = 1); coordinates as named by the chart; \
affine parameter and proper time in units of the metric length scale; angles in radians";

pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

pub struct Outcome {
    /// Main table first; further tables carry a file-name suffix.
    pub tables: Vec<(String, Table)>,
    pub report: Report,
    pub checks: Vec<Check>,
    pub degraded: bool,
}

impl Outcome {
    fn new(table: Table) -> Self {
        Self {
            tables: vec![(String::new(), table)],
            report: Report::default(),
            checks: Vec::new(),
            degraded: false,
        }
    }

    fn check(&mut self, name: &str, pass: bool, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            pass,
            detail,
        });
    }
}

pub struct Context<'a> {
    pub scenario: &'a Scenario,
    pub seed: u64,
    pub tol_scale: f64,
    pub exec: Execution,
}

impl Context<'_> {
    fn integrator(&self) -> IntegratorConfig {
        self.scenario.tolerances.integrator(self.tol_scale)
    }

    fn param(&self, key: &str) -> f64 {
        self.scenario.metric.param(key).unwrap_or(f64::NAN)
    }
}

fn coord_columns(prefix: &str, m: &ChartedSpacetime) -> Vec<String> {
    m.coord_names.iter().map(|c| format!("{prefix}{c}")).collect()
}

fn in_domain(m: &ChartedSpacetime, field: &str, x: &[f64]) -> Result<(), LabFailure> {
    m.require_domain(x)
        .map_err(|e| LabFailure::Config(format!("{field}: {e}")))
}

fn unit_timelike(m: &ChartedSpacetime, field: &str, x: &[f64], v: &[f64]) -> Result<Vec<f64>, LabFailure> {
    geometry::normalize_timelike(&m.metric_at(x), v).map_err(|e| LabFailure::Config(format!("{field}: {e}")))
}

fn make_slice(spec: &SliceSpec, built: &Built, ctx: &Context<'_>) -> Result<Box<dyn Slice>, LabFailure> {
    Ok(match spec {
        SliceSpec::FlrwTime => Box::new(FlrwSlice {
            scale: built
                .scale
                .clone()
                .ok_or_else(|| LabFailure::Config("run.slice: the metric has no scale factor".into()))?,
        }),
        SliceSpec::MilneTau => Box::new(MilneSlice),
        SliceSpec::SchwarzschildR => Box::new(SchwarzschildInteriorSlice {
            n: ctx.param("n") as usize,
            rs: ctx.param("rs"),
        }),
        SliceSpec::Isotropic { expansion } => Box::new(IsotropicSlice { expansion: *expansion }),
    })
}

pub fn execute(ctx: &Context<'_>) -> Result<Outcome, LabFailure> {
    let sc = ctx.scenario;
    let built = catalog::build(&sc.metric.name, &sc.metric.param_list())
        .map_err(|e| LabFailure::Config(format!("metric: {e}")))?;
    match &sc.run {
        RunSpec::Geodesic(r) => run_geodesic(ctx, &built, r),
        RunSpec::Curvature(r) => run_curvature(ctx, &built, r),
        RunSpec::Conjugate(r) => run_conjugate(ctx, &built, r),
        RunSpec::Expansion(r) => run_expansion(ctx, &built, r),
        RunSpec::Singularity(r) => run_singularity(ctx, &built, r),
        RunSpec::Twin(r) => run_twin(ctx, &built, r),
        RunSpec::AdsLongCurve(r) => run_ads_long_curve(r),
        RunSpec::ScaleFactor(r) => run_scale_factor(ctx, r),
    }
}

fn geodesic_table(m: &ChartedSpacetime, r: &GeodesicResult, samples: usize) -> Table {
    let mut cols = vec!["lambda".to_string(), "tau".into()];
    cols.extend(coord_columns("x.", m));
    cols.extend(coord_columns("v.", m));
    cols.push("norm".into());
    let mut t = Table::new(cols);
    let l0 = r.samples[0].lambda;
    let l1 = r.lambda_end();
    for i in 0..samples {
        let s = if i + 1 == samples {
            r.last().clone()
        } else {
            r.state_at(l0 + (l1 - l0) * i as f64 / (samples - 1) as f64)
                .unwrap_or_else(|| r.last().clone())
        };
        let mut row = vec![s.lambda, s.tau];
        row.extend(&s.x);
        row.extend(&s.v);
        row.push(linalg::quad(&m.metric_at(&s.x), &s.v, &s.v));
        t.push(row);
    }
    t
}

fn run_geodesic(ctx: &Context<'_>, built: &Built, r: &GeodesicRun) -> Result<Outcome, LabFailure> {
    let m = &built.spacetime;
    let mut orbit = None;
    let state = match &r.init {
        GeodesicInit::State { x, v, normalize } => {
            in_domain(m, "run.init.x", x)?;
            let v = match normalize {
                Normalize::Unit => unit_timelike(m, "run.init.v", x, v)?,
                Normalize::None => v.clone(),
            };
            GeodesicState::new(x.clone(), v)
        }
        GeodesicInit::CircularOrbit { r: radius } => {
            let (n, rs) = (ctx.param("n") as usize, ctx.param("rs"));
            let s = geodesic::circular_orbit_init(n, rs, *radius).map_err(|e| LabFailure::Config(format!("run.init.r: {e}")))?;
            let w = geodesic::angular_velocity(n, rs, *radius);
            let f = 1.0 - (rs / radius).powi(n as i32 - 2);
            let period = 2.0 * PI / w;
            orbit = Some((*radius, period, period * (f - radius * radius * w * w).sqrt()));
            s
        }
        GeodesicInit::SliceNormal { slice, x, past } => {
            in_domain(m, "run.init.x", x)?;
            let s = make_slice(slice, built, ctx)?;
            let sign = if *past { -1.0 } else { 1.0 };
            let v = s.normal(m, x).map_err(LabFailure::from_core)?;
            GeodesicState::new(x.clone(), v.into_iter().map(|c| sign * c).collect())
        }
    };
    let lambda_max = match (r.lambda_max, r.orbits, orbit) {
        (Some(l), _, _) => l,
        (None, Some(k), Some((_, _, tau))) => k * tau,
        _ => unreachable!("validated"),
    };
    let res = geodesic::integrate_geodesic(m, &state, &ctx.integrator().with_lambda_max(lambda_max))
        .map_err(LabFailure::from_core)?;
    let mut out = Outcome::new(geodesic_table(m, &res, r.samples));
    let rep = &mut out.report;
    rep.text("termination", res.termination.to_string());
    rep.text("character", format!("{:?}", res.character).to_lowercase());
    rep.num("initial_norm", res.initial_norm);
    rep.num("lambda_end", res.lambda_end());
    rep.num("tau_end", res.last().tau);
    rep.num("drift", res.conserved_drift);
    rep.flag("degraded", res.degraded);
    rep.flag("incomplete", res.incompleteness_flag);
    rep.opt("blowup_parameter", res.blowup_parameter);
    rep.num("steps", res.samples.len() as f64);
    if let Some((radius, period, tau)) = orbit {
        let dev = res.samples.iter().map(|s| (s.x[1] - radius).abs()).fold(0.0, f64::max);
        rep.num("orbit_period", period);
        rep.num("orbit_proper_time", tau);
        rep.num("orbit_radius_deviation", dev);
    }
    out.degraded = res.degraded;
    Ok(out)
}

fn matter_model(ctx: &Context<'_>, built: &Built, r: &CurvatureRun) -> MatterModel {
    match r.matter {
        MatterKind::Vacuum => MatterModel::Vacuum,
        MatterKind::CosmologicalConstant => MatterModel::CosmologicalConstant(r.lambda.unwrap_or(0.0)),
        MatterKind::Dust => MatterModel::flrw_dust(
            built.spacetime.n(),
            ctx.param("alpha"),
            built.scale.clone().expect("flrw carries its scale factor"),
        ),
    }
}

fn run_curvature(ctx: &Context<'_>, built: &Built, r: &CurvatureRun) -> Result<Outcome, LabFailure> {
    let m = &built.spacetime;
    let points: Vec<Vec<f64>> = match &r.points {
        Some(ps) => {
            for (i, p) in ps.iter().enumerate() {
                in_domain(m, &format!("run.points[{i}]"), p)?;
            }
            ps.clone()
        }
        None => exec::map_indexed(ctx.exec, r.samples, |i| m.sample_point(&mut exec::item_rng(ctx.seed, i as u64))),
    };
    let matter = matter_model(ctx, built, r);
    let two_d = m.n() < 2;
    let rows = exec::map_slice(ctx.exec, &points, |x| -> lorentz_core::Result<Vec<f64>> {
        let c = curvature::curvature(m, x)?;
        let e = curvature::einstein_residual(m, x, &matter)?;
        let rf = if two_d { f64::NAN } else { curvature::ricci_form_residual(m, x, &matter)? };
        Ok(vec![linalg::max_abs(&c.ricci), c.scalar, linalg::max_abs(&c.riemann), e, rf])
    });
    let mut cols = vec!["point".to_string()];
    cols.extend(coord_columns("x.", m));
    cols.extend(["ricci_max_abs", "scalar", "riemann_max_abs", "einstein_residual", "ricci_form_residual"].map(String::from));
    let mut out = Outcome::new(Table::new(cols));
    let (mut max_ric, mut max_e, mut max_rf, mut max_riem) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (i, (x, row)) in points.iter().zip(rows).enumerate() {
        let row = row.map_err(LabFailure::from_core)?;
        max_ric = max_ric.max(row[0]);
        max_riem = max_riem.max(row[2]);
        max_e = max_e.max(row[3]);
        if !two_d {
            max_rf = max_rf.max(row[4]);
        }
        let mut full = vec![i as f64];
        full.extend(x);
        full.extend(row);
        out.tables[0].1.push(full);
    }
    let rep = &mut out.report;
    rep.text("matter", format!("{:?}", r.matter).to_lowercase());
    if let MatterModel::CosmologicalConstant(lambda) = matter {
        rep.num("lambda", lambda);
    }
    rep.num("points", points.len() as f64);
    rep.num("max_ricci", max_ric);
    rep.num("max_riemann", max_riem);
    rep.num("max_einstein_residual", max_e);
    if two_d {
        rep.text("max_ricci_form_residual", "n/a");
    } else {
        rep.num("max_ricci_form_residual", max_rf);
    }
    if r.sec_samples > 0 {
        let v = curvature::sec_sample(m, None, r.sec_samples, ctx.seed, ctx.exec).map_err(LabFailure::from_core)?;
        report_sec(rep, &v);
    }
    Ok(out)
}

fn report_sec(rep: &mut Report, v: &SecVerdict) {
    match v {
        SecVerdict::Holds { samples, min_ric } => {
            rep.text("sec", "holds");
            rep.num("sec_samples", *samples as f64);
            rep.num("sec_min_ric", *min_ric);
        }
        SecVerdict::Violated { event, ric_vv, .. } => {
            rep.text("sec", "violated");
            rep.text("sec_violation_event", format!("{event:?}"));
            rep.num("sec_violation_ric", *ric_vv);
        }
    }
}

fn run_conjugate(ctx: &Context<'_>, built: &Built, r: &ConjugateRun) -> Result<Outcome, LabFailure> {
    let m = &built.spacetime;
    in_domain(m, "run.x", &r.x)?;
    let n = m.n();
    let mode = match &r.k0 {
        Some(k) => JacobiMode::FromSlice(k.iter().flatten().copied().collect()),
        None => JacobiMode::FromPoint,
    };
    let cfg = ctx.integrator().with_lambda_max(r.t_max);
    let oracle_alpha = (sc_name(ctx) == "ads2").then(|| ctx.param("alpha"));
    let mut cols = vec!["direction".to_string()];
    cols.extend(coord_columns("v.", m));
    cols.push("t_star".into());
    cols.extend(coord_columns("event.", m));
    cols.extend(["wronskian_drift", "oracle_deviation"].map(String::from));
    let mut out = Outcome::new(Table::new(cols));
    let mut det = Table::new(vec!["direction".into(), "t".into(), "det_a".into()]);
    let mut found = Vec::new();
    let (mut max_w, mut max_o) = (0.0f64, 0.0f64);
    for (i, d) in r.directions.iter().enumerate() {
        let u = unit_timelike(m, &format!("run.directions[{i}]"), &r.x, d)?;
        let geo = geodesic::integrate_geodesic(m, &GeodesicState::new(r.x.clone(), u.clone()), &cfg)
            .map_err(LabFailure::from_core)?;
        let b = jacobi::propagate_jacobi(m, &geo, mode.clone(), &cfg).map_err(LabFailure::from_core)?;
        let c = jacobi::first_conjugate(&b, r.t_max, r.resolution);
        let event = c
            .t_star
            .and_then(|t| geo.state_at(geo.samples[0].lambda + t))
            .map(|s| s.x)
            .unwrap_or_else(|| vec![f64::NAN; m.dim]);
        let oracle = match oracle_alpha {
            Some(a) => {
                let o = jacobi::ads2_geodesic_oracle(a, [r.x[0], r.x[1]], [u[0], u[1]]).map_err(LabFailure::from_core)?;
                let end = geo.lambda_end();
                (0..=400)
                    .map(|k| {
                        let s = end * k as f64 / 400.0;
                        let st = geo.state_at(s).expect("inside the run");
                        let e = o.eval(s);
                        (st.x[0] - e[0]).abs().max((st.x[1] - e[1]).abs())
                    })
                    .fold(0.0, f64::max)
            }
            None => f64::NAN,
        };
        max_w = max_w.max(b.wronskian_drift);
        if oracle.is_finite() {
            max_o = max_o.max(oracle);
        }
        let mut row = vec![i as f64];
        row.extend(&u);
        row.push(c.t_star.unwrap_or(f64::NAN));
        row.extend(&event);
        row.extend([b.wronskian_drift, oracle]);
        out.tables[0].1.push(row);
        for (t, dv) in &c.det_trace {
            det.push(vec![i as f64, *t, *dv]);
        }
        out.report.opt(format!("direction.{i}.t_star"), c.t_star);
        if c.grazing {
            out.report.flag(format!("direction.{i}.grazing"), true);
        }
        if let Some(ts) = c.t_star {
            found.push((ts, event));
        }
    }
    out.tables.push(("det".into(), det));
    let rep = &mut out.report;
    rep.text("start", if r.k0.is_some() { "slice" } else { "point" });
    rep.num("transverse_dimension", n as f64);
    rep.num("directions", r.directions.len() as f64);
    rep.num("conjugate_found", found.len() as f64);
    if !found.is_empty() {
        let ts: Vec<f64> = found.iter().map(|f| f.0).collect();
        rep.num("t_star_min", ts.iter().copied().fold(f64::INFINITY, f64::min));
        rep.num("t_star_max", ts.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        for (k, name) in m.coord_names.iter().enumerate() {
            let vals: Vec<f64> = found.iter().map(|f| f.1[k]).collect();
            rep.num(format!("event.{name}.min"), vals.iter().copied().fold(f64::INFINITY, f64::min));
            rep.num(format!("event.{name}.max"), vals.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        }
    }
    rep.num("max_wronskian_drift", max_w);
    if oracle_alpha.is_some() {
        rep.num("max_oracle_deviation", max_o);
    }
    Ok(out)
}

fn sc_name<'a>(ctx: &'a Context<'_>) -> &'a str {
    ctx.scenario.metric.name.as_str()
}

fn run_expansion(ctx: &Context<'_>, built: &Built, r: &ExpansionRun) -> Result<Outcome, LabFailure> {
    let m = &built.spacetime;
    in_domain(m, "run.x", &r.x)?;
    let slice = make_slice(&r.slice, built, ctx)?;
    let cfg = ExpansionConfig {
        t_max: r.t_max,
        past: r.past,
        grid: r.grid,
        integrator: ctx.integrator(),
        ..Default::default()
    };
    let tr = focusing::evolve_expansion(m, slice.as_ref(), &r.x, &cfg).map_err(LabFailure::from_core)?;
    let cols = ["t", "theta", "theta_logdet", "theta_prime", "tr_k2", "ric_xx"].map(String::from).to_vec();
    let mut out = Outcome::new(Table::new(cols));
    let mut gap = 0.0f64;
    for i in 0..tr.t.len() {
        gap = gap.max((tr.theta[i] - tr.theta_logdet[i]).abs());
        out.tables[0].1.push(vec![tr.t[i], tr.theta[i], tr.theta_logdet[i], tr.theta_prime[i], tr.tr_k2[i], tr.ric_xx[i]]);
    }
    let rc = focusing::riccati_bound_check(&tr, tr.theta0, 1e-9);
    let rep = &mut out.report;
    rep.text("slice", slice.name());
    rep.flag("past", r.past);
    rep.num("theta0", tr.theta0);
    if tr.theta0 < 0.0 {
        rep.num("bound", tr.n as f64 / tr.theta0.abs());
    }
    rep.opt("t_star", tr.conjugate.t_star);
    rep.num("raychaudhuri_residual", focusing::raychaudhuri_residual(&tr));
    rep.num("max_theta_logdet_gap", gap);
    rep.num("riccati_min_slack", rc.min_slack);
    rep.text("termination", tr.geodesic_termination.to_string());
    rep.num("geodesic_end", tr.geodesic_end);
    rep.flag("incomplete", tr.incomplete);
    rep.num("max_riemann", tr.max_riemann);
    Ok(out)
}

fn run_singularity(ctx: &Context<'_>, built: &Built, r: &SingularityRun) -> Result<Outcome, LabFailure> {
    let m = &built.spacetime;
    in_domain(m, "run.x", &r.x)?;
    let slice = make_slice(&r.slice, built, ctx)?;
    let cfg = ScenarioConfig {
        t_max: r.t_max,
        sec_samples: r.sec_samples,
        seed: ctx.seed,
        exec: ctx.exec,
        expansion: ExpansionConfig {
            integrator: ctx.integrator(),
            ..Default::default()
        },
    };
    let f = focusing::singularity_scenario(m, slice.as_ref(), &r.x, &cfg).map_err(LabFailure::from_core)?;
    let cols = [
        "theta0",
        "bound",
        "t_star",
        "conjugate_time",
        "termination_time",
        "incomplete",
        "sec_holds",
        "raychaudhuri_residual",
        "max_riemann",
    ]
    .map(String::from)
    .to_vec();
    let mut out = Outcome::new(Table::new(cols));
    let b = |x: bool| if x { 1.0 } else { 0.0 };
    out.tables[0].1.push(vec![
        f.theta0,
        f.bound,
        f.t_star.unwrap_or(f64::NAN),
        f.conjugate_time.unwrap_or(f64::NAN),
        f.termination_time,
        b(f.incomplete),
        b(f.sec.holds()),
        f.raychaudhuri_residual,
        f.max_riemann,
    ]);
    let rep = &mut out.report;
    rep.text("slice", slice.name());
    rep.num("theta0", f.theta0);
    rep.text("direction", if f.past { "past" } else { "future" });
    rep.num("bound", f.bound);
    report_sec(rep, &f.sec);
    rep.opt("conjugate_time", f.conjugate_time);
    rep.text("termination", f.termination.to_string());
    rep.num("termination_time", f.termination_time);
    rep.flag("incomplete", f.incomplete);
    rep.opt("t_star", f.t_star);
    rep.flag("satisfied", f.satisfied);
    rep.num("raychaudhuri_residual", f.raychaudhuri_residual);
    rep.num("riccati_min_slack", f.riccati.min_slack);
    rep.num("max_riemann", f.max_riemann);
    if f.sec.holds() {
        out.check(
            "focusing_bound",
            f.satisfied,
            format!("t_star = {:?}, bound = {}", f.t_star, f.bound),
        );
    }
    Ok(out)
}

fn run_twin(ctx: &Context<'_>, built: &Built, r: &TwinRun) -> Result<Outcome, LabFailure> {
    let m = &built.spacetime;
    in_domain(m, "run.p", &r.p)?;
    let icfg = ctx.integrator();
    let q = match (&r.q, &r.direction, r.length) {
        (Some(q), _, _) => {
            in_domain(m, "run.q", q)?;
            q.clone()
        }
        (None, Some(d), Some(len)) => {
            let u = unit_timelike(m, "run.direction", &r.p, d)?;
            jacobi::exp_map(m, &r.p, &u, len, &icfg).map_err(LabFailure::from_core)?.x
        }
        _ => unreachable!("validated"),
    };
    let cfg = TwinConfig {
        amplitude: r.amplitude,
        modes: r.modes,
        seed: ctx.seed,
        trials: r.trials,
        exec: ctx.exec,
        shooting: ShootingConfig {
            integrator: icfg,
            ..Default::default()
        },
        ..Default::default()
    };
    let t = curves::twin_trial(m, &r.p, &q, &cfg).map_err(LabFailure::from_core)?;
    let mut out = Outcome::new(Table::new(vec!["trial".into(), "tau".into()]));
    for (i, tau) in t.taus.iter().enumerate() {
        out.tables[0].1.push(vec![i as f64, *tau]);
    }
    let rep = &mut out.report;
    rep.text("q", format!("{q:?}"));
    rep.num("trials", t.taus.len() as f64);
    rep.num("tau_geodesic", t.tau_geodesic);
    rep.num("tau_max_perturbed", t.tau_max_perturbed);
    rep.num("margin", t.margin);
    rep.num("amplitude_used", t.amplitude);
    rep.num("pilot_rejection", t.pilot_rejection);
    rep.num("redraws", t.redraws as f64);
    if t.amplitude > 0.0 {
        out.check("margin_nonnegative", t.margin >= 0.0, format!("margin = {:e}", t.margin));
    } else {
        out.check("reparametrization_equality", t.margin.abs() <= 1e-9, format!("|margin| = {:e}", t.margin.abs()));
    }
    Ok(out)
}

fn run_ads_long_curve(r: &AdsLongCurveRun) -> Result<Outcome, LabFailure> {
    let cols = ["x0", "tau", "lower_bound", "central_geodesic_tau", "corner_width"].map(String::from).to_vec();
    let mut out = Outcome::new(Table::new(cols));
    let mut all_above = true;
    for (i, &x0) in r.x0.iter().enumerate() {
        let c = curves::ads_long_causal_curve(r.eps, x0).map_err(LabFailure::from_core)?;
        out.tables[0].1.push(vec![x0, c.tau, c.lower_bound, c.central_geodesic_tau, c.corner_width]);
        all_above &= c.tau > c.lower_bound;
        out.report.num(format!("curve.{i}.tau"), c.tau);
        out.report.num(format!("curve.{i}.lower_bound"), c.lower_bound);
        out.report.num(format!("curve.{i}.excess_over_geodesic"), c.tau - c.central_geodesic_tau);
    }
    out.report.num("central_geodesic_tau", PI + r.eps);
    out.check("exceeds_lower_bound", all_above, "tau > eps / cos(x0) for every x0".into());
    Ok(out)
}

fn run_scale_factor(ctx: &Context<'_>, r: &ScaleFactorRun) -> Result<Outcome, LabFailure> {
    let n = ctx.param("n") as usize;
    let k = ctx.param("k") as i32;
    let alpha = ctx.param("alpha");
    let sol = focusing::solve_scale_factor(
        n,
        k,
        alpha,
        ctx.param("a0"),
        ctx.param("direction") > 0.0,
        ctx.param("t0"),
        (ctx.param("t_lo"), ctx.param("t_hi")),
    )
    .map_err(|e| LabFailure::Config(format!("metric.params: {e}")))?;
    let (lo, hi) = sol.interval();
    let lo = r.t_from.unwrap_or(sol.t_bang.unwrap_or(lo));
    let hi = r.t_to.unwrap_or(sol.t_crunch.unwrap_or(hi));
    // flat dust: a^{n/2} = (n/2)(2α)^{1/2}|t − t_*|
    let zero = sol.t_bang.or(sol.t_crunch);
    let closed = |t: f64| -> f64 {
        match (k, zero) {
            (0, Some(z)) => ((n as f64 / 2.0) * (2.0 * alpha).sqrt() * (t - z).abs()).powf(2.0 / n as f64),
            _ => f64::NAN,
        }
    };
    let cols = ["t", "a", "a_dot", "energy_residual", "a_closed_form"].map(String::from).to_vec();
    let mut out = Outcome::new(Table::new(cols));
    let (mut max_res, mut max_dev) = (0.0f64, 0.0f64);
    for i in 0..r.samples {
        let t = lo + (hi - lo) * (i as f64 + 0.5) / r.samples as f64;
        let a = sol.derivative(t, 0);
        let res = sol.energy_residual(t);
        let c = closed(t);
        max_res = max_res.max(res);
        if c.is_finite() {
            max_dev = max_dev.max((a - c).abs());
        }
        out.tables[0].1.push(vec![t, a, sol.derivative(t, 1), res, c]);
    }
    let rep = &mut out.report;
    rep.opt("t_bang", sol.t_bang);
    rep.opt("t_crunch", sol.t_crunch);
    rep.num("max_energy_residual", max_res);
    if k == 0 {
        rep.num("max_closed_form_deviation", max_dev);
    }
    if sol.t_bang.is_some() && sol.t_crunch.is_some() {
        let (tm, am) = sol.max_scale();
        rep.num("t_max_scale", tm);
        rep.num("a_max", am);
    }
    Ok(out)
}
