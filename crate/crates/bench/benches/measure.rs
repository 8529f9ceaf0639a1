use std::f64::consts::PI;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use dmk_core::{
    dual_curvature_measure, mc_dual_curvature, HPolytope, MeasureOptions, StarBody, UnitVector,
};
use nalgebra::DMatrix;

fn polygon(m: usize) -> HPolytope {
    let normals = (0..m)
        .map(|j| {
            let a = 2.0 * PI * j as f64 / m as f64;
            UnitVector::from_slice(&[a.cos(), a.sin()]).unwrap()
        })
        .collect();
    HPolytope::new(normals, vec![1.0; m]).unwrap()
}

fn cube() -> HPolytope {
    let normals = (0..6)
        .map(|i| UnitVector::axis(3, i / 2, if i % 2 == 0 { 1.0 } else { -1.0 }))
        .collect();
    HPolytope::new(normals, vec![1.0, 0.5, 1.5, 1.0, 0.8, 1.2]).unwrap()
}

fn quadrature(c: &mut Criterion) {
    let opts = MeasureOptions::default();
    let ball = StarBody::ball(1.0).unwrap();
    let ellipsoid =
        StarBody::ellipsoid(DMatrix::from_diagonal(&nalgebra::dvector![4.0, 1.0, 0.25])).unwrap();

    let mut group = c.benchmark_group("dual_curvature_measure");
    for m in [8, 32, 128] {
        let p = polygon(m);
        group.bench_with_input(BenchmarkId::new("polygon_q1.5", m), &p, |b, p| {
            b.iter(|| dual_curvature_measure(black_box(p), &ball, 1.5, 2.0, &opts).unwrap())
        });
    }
    let box3 = cube();
    group.bench_function("box_ball_q2", |b| {
        b.iter(|| dual_curvature_measure(black_box(&box3), &ball, 2.0, 2.0, &opts).unwrap())
    });
    group.bench_function("box_ellipsoid_q1", |b| {
        b.iter(|| dual_curvature_measure(black_box(&box3), &ellipsoid, 1.0, 2.0, &opts).unwrap())
    });
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let ball = StarBody::ball(1.0).unwrap();
    let box3 = cube();
    let mut group = c.benchmark_group("mc_dual_curvature");
    group.sample_size(10);
    group.bench_function("box_1e5", |b| {
        b.iter(|| mc_dual_curvature(black_box(&box3), &ball, 2.0, 100_000, 7).unwrap())
    });
    group.finish();
}

criterion_group!(benches, quadrature, monte_carlo);
criterion_main!(benches);
