use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lorentz_core::catalog::{self, Region};
use lorentz_core::curvature;
use lorentz_core::curves::{self, TwinConfig};
use lorentz_core::exec::Execution;

fn modes() -> Vec<(&'static str, Execution)> {
    let mut v = vec![("sequential", Execution::Sequential)];
    #[cfg(feature = "parallel")]
    v.push(("parallel", Execution::Parallel));
    v
}

fn sec_sampling(c: &mut Criterion) {
    let m = catalog::schwarzschild(3, 1.0, Region::Exterior).unwrap();
    let mut group = c.benchmark_group("sec_sampling_400");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| curvature::sec_sample(&m, None, 400, 1, exec).unwrap())
        });
    }
    group.finish();
}

fn twin_trials(c: &mut Criterion) {
    let m = catalog::minkowski(3).unwrap();
    let mut group = c.benchmark_group("twin_trials_500");
    group.sample_size(10);
    for (name, exec) in modes() {
        let cfg = TwinConfig {
            trials: 500,
            exec,
            ..Default::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| curves::twin_trial(&m, &[0.0; 4], &[3.0, 0.5, -0.2, 0.1], cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sec_sampling, twin_trials);
criterion_main!(benches);
