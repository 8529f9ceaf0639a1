//! Random instances and independent geometric oracles shared by the
//! integration tests.
#![allow(dead_code)]

use dmk_core::polytope::Simplex;
use dmk_core::{DirectionWeightMeasure, HPolytope, RadialTable, StarBody, UnitVector};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit(v: &[f64]) -> UnitVector {
    UnitVector::from_slice(v).unwrap()
}

pub fn random_unit(rng: &mut TestRng, n: usize) -> UnitVector {
    let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    UnitVector::from_slice(&v).unwrap()
}

/// `k` normals that positively span `R^n`, at least `min_gap` apart.
pub fn spanning_normals(rng: &mut TestRng, n: usize, k: usize) -> Vec<UnitVector> {
    loop {
        let mut normals: Vec<UnitVector> = Vec::new();
        while normals.len() < k {
            let u = random_unit(rng, n);
            if normals
                .iter()
                .all(|v| (v.as_vector() - u.as_vector()).norm() > 0.05)
            {
                normals.push(u);
            }
        }
        if dmk_core::positively_spanning(&normals).is_none() {
            return normals;
        }
    }
}

pub fn random_measure(rng: &mut TestRng, n: usize, k: usize) -> DirectionWeightMeasure {
    let normals = spanning_normals(rng, n, k);
    let weights = (0..k).map(|_| rng.gen_range(0.2..2.0)).collect();
    DirectionWeightMeasure::new(normals, weights).unwrap()
}

/// Polytope with the origin inside and every offset in `[0.5, 1.5]`.
pub fn random_polytope(rng: &mut TestRng, n: usize, k: usize) -> HPolytope {
    let normals = spanning_normals(rng, n, k);
    let offsets = (0..k).map(|_| rng.gen_range(0.5..1.5)).collect();
    HPolytope::new(normals, offsets).unwrap()
}

/// Matrix with determinant one: a random rotation composed with a shear.
pub fn random_unimodular(rng: &mut TestRng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut rot = qr.q();
    if rot.determinant() < 0.0 {
        rot.column_mut(0).neg_mut();
    }
    let mut shear = DMatrix::identity(n, n);
    for i in 0..n {
        for j in i + 1..n {
            shear[(i, j)] = rng.gen_range(-0.8..0.8);
        }
    }
    let m = rot * shear;
    let d = m.determinant();
    m / d.abs().powf(1.0 / n as f64)
}

pub fn random_spd(rng: &mut TestRng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = g.qr().q();
    let d = DMatrix::from_diagonal(&DVector::from_fn(n, |_, _| {
        rng.gen_range(0.5f64..2.0).powi(2)
    }));
    let m = &q * d * q.transpose();
    (&m + m.transpose()) * 0.5
}

pub fn cube_gauge(n: usize, side: f64) -> StarBody {
    let mut normals = Vec::new();
    for i in 0..n {
        for s in [1.0, -1.0] {
            normals.push(UnitVector::axis(n, i, s));
        }
    }
    StarBody::polytope_gauge(HPolytope::new(normals, vec![side; 2 * n]).unwrap()).unwrap()
}

/// One of several star bodies, cycling through the families by `kind`.
pub fn star_of_kind(rng: &mut TestRng, n: usize, kind: usize) -> (String, StarBody) {
    match kind % 5 {
        0 => {
            let r = rng.gen_range(0.5..2.0);
            (format!("ball({r:.2})"), StarBody::ball(r).unwrap())
        }
        1 => (
            "ellipsoid".into(),
            StarBody::ellipsoid(random_spd(rng, n)).unwrap(),
        ),
        2 => ("cube gauge".into(), cube_gauge(n, rng.gen_range(0.5..1.5))),
        3 => {
            let k = 3 * n + 2;
            let p = random_polytope(rng, n, k);
            (
                "polytope gauge".into(),
                StarBody::polytope_gauge(p).unwrap(),
            )
        }
        _ => {
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.2..0.2)).collect();
            let rho =
                move |u: &DVector<f64>| 1.0 + u.iter().zip(&a).map(|(x, y)| x * y).sum::<f64>();
            let res = if n == 2 { 48 } else { 1 };
            (
                "radial table".into(),
                StarBody::radial_table(RadialTable::sample(n, res, rho).unwrap()),
            )
        }
    }
}

/// Vertices by brute force: every `n`-subset of planes, solved and filtered.
pub fn brute_force_vertices(p: &HPolytope) -> Vec<DVector<f64>> {
    let n = p.dim();
    let k = p.len();
    let tol = 1e-9 * p.scale();
    let mut out: Vec<DVector<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a = DMatrix::from_fn(n, n, |r, c| p.normals()[idx[r]].as_slice()[c]);
        let b = DVector::from_fn(n, |r, _| p.offsets()[idx[r]]);
        if a.determinant().abs() > 1e-10 {
            let x = a.lu().solve(&b).unwrap();
            let feasible = p
                .normals()
                .iter()
                .zip(p.offsets())
                .all(|(u, t)| u.dot(&x) <= t + tol);
            if feasible && !out.iter().any(|y| (y - &x).amax() <= 1e-8) {
                out.push(x);
            }
        }
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < k - n + i {
                idx[i] += 1;
                for j in i + 1..n {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// `(n-1)`-dimensional measure of the facet with normal `i`, from brute-force
/// vertices (`n = 2, 3`).
pub fn facet_area(p: &HPolytope, verts: &[DVector<f64>], i: usize) -> f64 {
    let u = p.normals()[i].as_vector();
    let t = p.offsets()[i];
    let on: Vec<&DVector<f64>> = verts
        .iter()
        .filter(|x| (u.dot(x) - t).abs() <= 1e-9 * p.scale())
        .collect();
    match p.dim() {
        2 => {
            let mut best = 0.0f64;
            for a in &on {
                for b in &on {
                    best = best.max((*a - *b).norm());
                }
            }
            best
        }
        3 => {
            if on.len() < 3 {
                return 0.0;
            }
            let c = on.iter().fold(DVector::zeros(3), |s, x| s + *x) / on.len() as f64;
            let e1 = {
                let a = if u[0].abs() < 0.9 {
                    DVector::from_vec(vec![1.0, 0.0, 0.0])
                } else {
                    DVector::from_vec(vec![0.0, 1.0, 0.0])
                };
                let v = &a - u * u.dot(&a);
                v.normalize()
            };
            let e2 = DVector::from_vec(vec![
                u[1] * e1[2] - u[2] * e1[1],
                u[2] * e1[0] - u[0] * e1[2],
                u[0] * e1[1] - u[1] * e1[0],
            ]);
            let mut pts: Vec<(f64, f64)> = on
                .iter()
                .map(|x| ((*x - &c).dot(&e1), (*x - &c).dot(&e2)))
                .collect();
            pts.sort_by(|a, b| a.1.atan2(a.0).total_cmp(&b.1.atan2(b.0)));
            let m = pts.len();
            (0..m)
                .map(|j| {
                    let (a, b) = (pts[j], pts[(j + 1) % m]);
                    a.0 * b.1 - a.1 * b.0
                })
                .sum::<f64>()
                .abs()
                / 2.0
        }
        _ => panic!("facet_area supports n = 2, 3"),
    }
}

pub fn simplex_total(s: &[Simplex]) -> f64 {
    s.iter().map(Simplex::volume).sum()
}

/// Sup over `count` directions of `|h_P - r|`.
pub fn distance_to_ball(p: &HPolytope, r: f64, count: usize) -> f64 {
    dmk_core::sphere::direction_grid(p.dim(), count)
        .iter()
        .map(|u| (p.support(u) - r).abs())
        .fold(0.0, f64::max)
}
