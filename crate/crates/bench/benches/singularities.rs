use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use umbrella_core::{
    classify_map, make_special, run_genericity_experiment, solve_singular_points, tangency_search,
    BoundingBox, CentralPoint, ExperimentConfig, GdsMapping, Point2, SpecialForm,
    DEFAULT_RESIDUAL_TOL, DEFAULT_TANGENCY_TOL,
};

fn worked_example() -> GdsMapping {
    let p = CentralPoint::new(vec![
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(0.0, 1.0),
    ])
    .unwrap();
    make_special(SpecialForm::EllipseCircle { a: 1.0, b: 2.0 }, p).unwrap()
}

fn bench_solver(c: &mut Criterion) {
    let m = worked_example();
    c.bench_function("solve_singular_points/worked_example", |b| {
        b.iter(|| solve_singular_points(black_box(&m), DEFAULT_RESIDUAL_TOL).unwrap())
    });
}

fn bench_classify(c: &mut Criterion) {
    let m = worked_example();
    c.bench_function("classify_map/worked_example", |b| {
        b.iter(|| classify_map(black_box(&m), DEFAULT_RESIDUAL_TOL))
    });
}

fn bench_oracle(c: &mut Criterion) {
    let m = worked_example();
    let window = BoundingBox::new(-5.0, -5.0, 5.0, 5.0);
    c.bench_function("tangency_search/grid_64", |b| {
        b.iter(|| tangency_search(black_box(&m), window, 64, DEFAULT_TANGENCY_TOL))
    });
}

fn bench_experiment(c: &mut Criterion) {
    let cfg = ExperimentConfig::new(3, 100, 42);
    let mut group = c.benchmark_group("experiment");
    group.sample_size(10);
    group.bench_function("ell3_trials100", |b| {
        b.iter(|| run_genericity_experiment(black_box(&cfg)))
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_solver,
    bench_classify,
    bench_oracle,
    bench_experiment
);
criterion_main!(benches);
