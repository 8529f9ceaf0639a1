use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, Criterion};
use dmk_core::{solve, DirectionWeightMeasure, SolveOptions, StarBody, UnitVector};

fn measure(m: usize) -> DirectionWeightMeasure {
    let normals = (0..m)
        .map(|j| {
            let a = 2.0 * PI * j as f64 / m as f64 + 0.1 * (j as f64).sin();
            UnitVector::from_slice(&[a.cos(), a.sin()]).unwrap()
        })
        .collect();
    let weights = (0..m).map(|j| 1.0 + 0.5 * (j as f64 * 0.7).cos()).collect();
    DirectionWeightMeasure::new(normals, weights).unwrap()
}

fn octahedron() -> DirectionWeightMeasure {
    let normals = (0..8)
        .map(|s| {
            let v = [0, 1, 2].map(|i| if s >> i & 1 == 0 { 1.0 } else { -1.0 });
            UnitVector::from_slice(&v).unwrap()
        })
        .collect();
    DirectionWeightMeasure::new(normals, vec![1.0, 2.0, 1.0, 1.5, 1.0, 1.0, 0.5, 1.0]).unwrap()
}

fn solver(c: &mut Criterion) {
    let ball = StarBody::ball(1.0).unwrap();
    let opts = SolveOptions::default();
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    for m in [6, 16] {
        let mu = measure(m);
        group.bench_function(format!("polygon_{m}_p3_q2"), |b| {
            b.iter(|| solve(&mu, &ball, 3.0, 2.0, &opts).unwrap())
        });
    }
    let mu = octahedron();
    group.bench_function("octahedron_p3_q2", |b| {
        b.iter(|| solve(&mu, &ball, 3.0, 2.0, &opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, solver);
criterion_main!(benches);
