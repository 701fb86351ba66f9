use lorentz_core::catalog::{self, Region, ScaleFactor};
use lorentz_core::curvature::SecVerdict;
use lorentz_core::exec::Execution;
use lorentz_core::focusing::{self, ExpansionConfig, ScenarioConfig};
use lorentz_core::geodesic::Termination;
use lorentz_core::geometry::{EdgeKind, Side};
use lorentz_core::jacobi::{FlrwSlice, MilneSlice, SchwarzschildInteriorSlice, Slice};

fn scenario_cfg() -> ScenarioConfig {
    ScenarioConfig {
        sec_samples: 100,
        exec: Execution::Sequential,
        ..Default::default()
    }
}

#[test]
fn milne_expansion_is_n_over_tau() {
    let m = catalog::milne(3).unwrap();
    let cfg = ExpansionConfig {
        t_max: 3.0,
        ..Default::default()
    };
    let tr = focusing::evolve_expansion(&m, &MilneSlice, &[1.0, 0.0, 0.0, 0.0], &cfg).unwrap();
    for (t, th) in tr.t.iter().zip(&tr.theta) {
        assert!((th - 3.0 / (1.0 + t)).abs() < 1e-6, "t={t}: {th}");
    }
    assert!(tr.conjugate.t_star.is_none());
}

#[test]
fn flrw_expansion_is_two_over_t() {
    let (m, sol) = focusing::flrw_from_solver(3, 0, 1.0, 4.5f64.cbrt(), true, 1.0, (-1.0, 20.0)).unwrap();
    let slice = FlrwSlice { scale: sol.clone() };
    let cfg = ExpansionConfig {
        t_max: 4.0,
        ..Default::default()
    };
    let x0 = [1.0, 0.0, 0.0, 0.0];
    let tr = focusing::evolve_expansion(&m, &slice, &x0, &cfg).unwrap();
    assert!(!tr.t.is_empty());
    for (t, th) in tr.t.iter().zip(&tr.theta) {
        assert!((th - 2.0 / (1.0 + t)).abs() < 1e-6, "t={t}: {th}");
    }
    for (a, b) in tr.theta.iter().zip(&tr.theta_logdet) {
        assert!((a - b).abs() < 1e-9);
    }
    assert!(focusing::raychaudhuri_residual(&tr) < 1e-6);
    let _ = sol.derivative(1.0, 0);
}

#[test]
fn schwarzschild_interior_expansion_matches_formula() {
    let m = catalog::schwarzschild(3, 1.0, Region::Interior).unwrap();
    let s = SchwarzschildInteriorSlice { n: 3, rs: 1.0 };
    let x0 = [0.0, 0.1, 1.3, 0.2];
    let cfg = ExpansionConfig {
        t_max: 0.05,
        ..Default::default()
    };
    let tr = focusing::evolve_expansion(&m, &s, &x0, &cfg).unwrap();
    assert!((tr.theta0 + 130.0 / 3.0).abs() < 1e-9);
    assert!(tr.t.len() > 10);
    assert!(focusing::raychaudhuri_residual(&tr) < 1e-6, "{}", focusing::raychaudhuri_residual(&tr));
}

#[test]
fn flrw_big_bang_scenario() {
    let (m, sol) = focusing::flrw_from_solver(3, 0, 1.0, 4.5f64.cbrt(), true, 1.0, (-1.0, 20.0)).unwrap();
    let slice = FlrwSlice { scale: sol };
    let r = focusing::singularity_scenario(&m, &slice, &[1.0, 0.0, 0.0, 0.0], &scenario_cfg()).unwrap();
    assert!((r.theta0 - 2.0).abs() < 1e-8);
    assert!(r.past);
    assert!((r.bound - 1.5).abs() < 1e-8);
    assert!(r.incomplete);
    assert!((r.termination_time - 1.0).abs() < 1e-6, "{}", r.termination_time);
    assert!(r.sec.holds());
    assert!(r.satisfied);
}

#[test]
fn flrw_contracting_slice_focuses_by_bound() {
    let (m, sol) = focusing::flrw_from_solver(3, 0, 1.0, 1.0, false, 0.0, (-20.0, 5.0)).unwrap();
    let crunch = sol.t_crunch.unwrap();
    assert!((crunch - 2f64.sqrt() / 3.0).abs() < 1e-9, "{crunch}");
    let slice = FlrwSlice { scale: sol };
    let r = focusing::singularity_scenario(&m, &slice, &[0.0, 0.0, 0.0, 0.0], &scenario_cfg()).unwrap();
    assert!((r.theta0 + 3.0 * 2f64.sqrt()).abs() < 1e-9);
    assert!(!r.past);
    assert!(r.satisfied, "{r:?}");
    assert!(r.riccati.comparison_holds);
    assert!(r.raychaudhuri_residual < 1e-6, "{}", r.raychaudhuri_residual);
}

#[test]
fn schwarzschild_interior_scenario() {
    let m = catalog::schwarzschild(3, 1.0, Region::Interior).unwrap();
    let s = SchwarzschildInteriorSlice { n: 3, rs: 1.0 };
    let r = focusing::singularity_scenario(&m, &s, &[0.0, 0.1, 1.3, 0.2], &scenario_cfg()).unwrap();
    assert!(r.theta0 < 0.0 && !r.past);
    assert!(r.sec.holds());
    assert!(r.incomplete);
    assert!(matches!(
        r.termination,
        Termination::LeftChartDomain { side: Side::Lower, kind: EdgeKind::Inextendible, .. }
    ));
    // τ(r₀) = arcsin √r₀ − √(r₀(1−r₀))
    let exact = 0.1f64.sqrt().asin() - (0.1f64 * 0.9).sqrt();
    assert!((r.termination_time - exact).abs() < 1e-6, "{} vs {exact}", r.termination_time);
    assert!(r.satisfied);
    assert!(r.raychaudhuri_residual < 1e-6, "{}", r.raychaudhuri_residual);
}

#[test]
fn milne_scenario() {
    let m = catalog::milne(3).unwrap();
    let r = focusing::singularity_scenario(&m, &MilneSlice, &[1.0, 0.0, 0.0, 0.0], &scenario_cfg()).unwrap();
    assert!((r.theta0 - 3.0).abs() < 1e-12);
    assert!(r.past);
    assert!((r.bound - 1.0).abs() < 1e-12);
    assert!((r.termination_time - 1.0).abs() < 1e-8);
    assert!(r.incomplete);
    assert_eq!(r.max_riemann, 0.0);
    assert!(r.sec.holds());
}

#[test]
fn de_sitter_contracting_slice_is_inapplicable() {
    let m = catalog::de_sitter(3, 1.0).unwrap();
    let s = FlrwLikeDeSitter;
    let r = focusing::singularity_scenario(&m, &s, &[-0.5, 1.2, 1.4, 0.3], &scenario_cfg()).unwrap();
    assert!(matches!(r.sec, SecVerdict::Violated { .. }));
    assert!(!r.riccati.applicable);
    assert!(!r.satisfied);
}

/// `t = const` in the de Sitter chart: `K = tanh t · I` on the sphere block.
struct FlrwLikeDeSitter;

impl Slice for FlrwLikeDeSitter {
    fn name(&self) -> String {
        "de-sitter-t".into()
    }
    fn normal(&self, m: &lorentz_core::geometry::ChartedSpacetime, _x: &[f64]) -> lorentz_core::Result<Vec<f64>> {
        let mut v = vec![0.0; m.dim];
        v[0] = 1.0;
        Ok(v)
    }
    fn shape_operator(
        &self,
        m: &lorentz_core::geometry::ChartedSpacetime,
        x: &[f64],
    ) -> lorentz_core::Result<Vec<f64>> {
        let d = m.dim;
        let mut k = vec![0.0; d * d];
        for i in 1..d {
            k[i * d + i] = x[0].tanh();
        }
        Ok(k)
    }
}


#[test]
fn isotropic_slice_reproduces_the_marginal_congruence() {
    use lorentz_core::jacobi::IsotropicSlice;
    let m = catalog::minkowski(3).unwrap();
    let s = IsotropicSlice { expansion: -3.0 };
    assert!((s.expansion(&m, &[0.0; 4]).unwrap() + 3.0).abs() < 1e-15);
    let cfg = ExpansionConfig {
        t_max: 2.0,
        ..Default::default()
    };
    let tr = focusing::evolve_expansion(&m, &s, &[0.0; 4], &cfg).unwrap();
    assert!((tr.conjugate.t_star.unwrap() - 1.0).abs() < 1e-9);
    for (t, th) in tr.t.iter().zip(&tr.theta) {
        // 1/θ = 1/θ₀ + t/n
        assert!((1.0 / th - (-1.0 / 3.0 + t / 3.0)).abs() < 1e-9, "t={t}");
    }
}
