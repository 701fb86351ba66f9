use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use lorentz_core::catalog::{self, Region};
use lorentz_core::curves::{self, Curve, ShootingConfig, TwinConfig, VariationFamily};
use lorentz_core::exec::Execution;
use lorentz_core::geodesic::{self, GeodesicState, IntegratorConfig};
use lorentz_core::geometry;

fn exterior_pair() -> (Vec<f64>, Vec<f64>) {
    let m = catalog::schwarzschild(3, 1.0, Region::Exterior).unwrap();
    let p = vec![0.0, 8.0, FRAC_PI_2, 0.0];
    let v = geometry::normalize_timelike(&m.metric_at(&p), &[1.0, 0.15, 0.0, 0.0]).unwrap();
    let v: Vec<f64> = v.iter().map(|c| 2.0 * c).collect();
    let r = geodesic::integrate_geodesic(&m, &GeodesicState::new(p.clone(), v), &IntegratorConfig::default().with_lambda_max(1.0)).unwrap();
    (p, r.last().x.clone())
}

#[test]
fn minkowski_twin_trials() {
    let m = catalog::minkowski(1).unwrap();
    let t0 = Instant::now();
    let cfg = TwinConfig {
        amplitude: 0.3,
        trials: 1000,
        ..Default::default()
    };
    let r = curves::twin_trial(&m, &[0.0, 0.0], &[2.0, 0.0], &cfg).unwrap();
    assert!((r.tau_geodesic - 2.0).abs() < 1e-10);
    assert_eq!(r.taus.len(), 1000);
    assert!(r.taus.iter().all(|&t| t < 2.0));
    assert!(r.margin > 0.0, "{r:?}");
    eprintln!("minkowski twin: margin {:e}, amplitude {}, {:?}", r.margin, r.amplitude, t0.elapsed());
}

#[test]
fn schwarzschild_twin_trials() {
    let m = catalog::schwarzschild(3, 1.0, Region::Exterior).unwrap();
    let (p, q) = exterior_pair();
    let cfg = TwinConfig {
        amplitude: 0.3,
        trials: 500,
        ..Default::default()
    };
    let r = curves::twin_trial(&m, &p, &q, &cfg).unwrap();
    assert!((r.tau_geodesic - 2.0).abs() < 1e-9, "{}", r.tau_geodesic);
    assert!(r.margin > 0.0, "{r:?}");
}

#[test]
fn zero_amplitude_is_a_reparametrization() {
    let m = catalog::schwarzschild(3, 1.0, Region::Exterior).unwrap();
    let (p, q) = exterior_pair();
    let base = curves::shoot(&m, &p, &q, &ShootingConfig::default()).unwrap();
    let fam = VariationFamily::new(base, 0.0, 4, 7).unwrap();
    let r = curves::twin_trial_family(&m, &fam, 50, Execution::Sequential).unwrap();
    assert!(r.margin.abs() < 1e-9, "{}", r.margin);
    for t in &r.taus {
        assert!((t - r.tau_geodesic).abs() < 1e-9);
    }
}

#[test]
fn perturbed_curves_keep_endpoints() {
    let m = catalog::minkowski(2).unwrap();
    let q = [3.0, 0.5, -0.2];
    let base = curves::shoot(&m, &[0.0; 3], &q, &ShootingConfig::default()).unwrap();
    let fam = VariationFamily::new(base, 0.2, 8, 3).unwrap();
    let mut rng = lorentz_core::exec::item_rng(3, 0);
    let c = fam.curve(&fam.draw(&mut rng, 0.2)).unwrap();
    assert_eq!(c.points()[0], vec![0.0; 3]);
    let last = c.points().last().unwrap();
    for (a, b) in last.iter().zip(&q) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn w_function_along_unit_timelike_geodesic() {
    let m = catalog::schwarzschild(3, 1.0, Region::Exterior).unwrap();
    let p = [0.0, 6.0, 1.2, 0.4];
    let n = geometry::normalize_timelike(&m.metric_at(&p), &[1.0, -0.1, 0.02, 0.01]).unwrap();
    let q = lorentz_core::jacobi::exp_map(&m, &p, &n, 0.5, &IntegratorConfig::default()).unwrap();
    let w = curves::w_function(&m, &p, &q.x, &ShootingConfig::default()).unwrap();
    assert!((w + 0.25).abs() < 1e-8, "{w}");
}

#[test]
fn w_sign_follows_causal_character() {
    let m = catalog::schwarzschild(3, 1.0, Region::Exterior).unwrap();
    let p = [0.0, 6.0, 1.2, 0.4];
    let g = m.metric_at(&p);
    for (v, timelike) in [([1.0, 0.2, 0.0, 0.0], true), ([0.3, 1.0, 0.0, 0.0], false), ([1.0, 0.0, 0.1, 0.0], true)] {
        let q = lorentz_core::jacobi::exp_map(&m, &p, &v, 0.7, &IntegratorConfig::default()).unwrap();
        let w = curves::w_function(&m, &p, &q.x, &ShootingConfig::default()).unwrap();
        assert_eq!(w < 0.0, timelike, "{v:?}: {w}");
        let q0 = lorentz_core::linalg::quad(&g, &v, &v) * 0.49;
        assert!((w - q0).abs() < 1e-8 * q0.abs().max(1.0));
    }
}

#[test]
fn ads_long_curves_beat_the_bound() {
    let r = curves::ads_long_causal_curve(0.2, 1.0).unwrap();
    assert!((r.lower_bound - 0.2 / 1f64.cos()).abs() < 1e-15);
    assert!(r.tau > r.lower_bound);
    let r = curves::ads_long_causal_curve(0.2, 1.5).unwrap();
    assert!(r.tau > 0.2 / 1.5f64.cos());
    assert!(r.tau > r.central_geodesic_tau, "{} vs {}", r.tau, r.central_geodesic_tau);
    // vertical segment alone: (π + ε − 2x₀)/cos x₀, less what the corners cut
    let vertical = (PI + 0.2 - 3.0) / 1.5f64.cos();
    assert!(r.tau > vertical - 4.0 * r.corner_width / 1.5f64.cos(), "{} vs {vertical}", r.tau);
    assert!(r.tau < 1.05 * vertical);
}

#[test]
fn ads_lower_bound_grows_with_x0() {
    let mut prev = 0.0;
    for i in 1..10 {
        let x0 = 0.15 * i as f64;
        let r = curves::ads_long_causal_curve(0.2, x0).unwrap();
        assert!(r.lower_bound > prev);
        assert!(r.tau >= r.lower_bound);
        prev = r.lower_bound;
    }
}

#[test]
fn regridding_preserves_proper_time() {
    let m = catalog::minkowski(1).unwrap();
    let base = curves::shoot(&m, &[0.0, 0.0], &[2.0, 0.3], &ShootingConfig::default()).unwrap();
    let mut fam = VariationFamily::new(base, 0.05, 3, 11).unwrap();
    fam.nodes = 1025;
    let mut rng = lorentz_core::exec::item_rng(11, 0);
    let pert = fam.draw(&mut rng, 0.05);
    let exact = curves::curve_proper_time(&m, &fam.varied(&pert)).unwrap();
    let c = fam.curve(&pert).unwrap();
    let t1 = curves::curve_proper_time(&m, &c).unwrap();
    assert!((t1 - exact).abs() < 1e-8 * exact, "{t1} vs {exact}");
    let (a, b) = c.domain();
    let k = 2001;
    let params: Vec<f64> = (0..k).map(|i| i as f64 / (k - 1) as f64).collect();
    let c2 = c
        .reparametrized(params, |u| {
            let w = PI * u;
            (a + (b - a) * (u + 0.4 * w.sin() / PI), (b - a) * (1.0 + 0.4 * w.cos()))
        })
        .unwrap();
    let t2 = curves::curve_proper_time(&m, &c2).unwrap();
    assert!((t2 - t1).abs() < 1e-8 * t1, "{t2} vs {t1}");
}
