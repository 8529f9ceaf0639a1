use super::*;
use crate::polytope::UnitVector;
use std::f64::consts::PI;

fn axes(n: usize) -> Vec<UnitVector> {
    let mut out = Vec::new();
    for i in 0..n {
        for s in [1.0, -1.0] {
            out.push(UnitVector::axis(n, i, s));
        }
    }
    out
}

fn ball() -> StarBody {
    StarBody::ball(1.0).unwrap()
}

#[test]
fn square_closed_form() {
    let mu = DirectionWeightMeasure::new(axes(2), vec![0.5; 4]).unwrap();
    let (p, report) = solve(&mu, &ball(), 3.0, 2.0, &SolveOptions::default()).unwrap();
    for t in p.offsets() {
        assert!((t - 2.0).abs() < 1e-6, "{t}");
    }
    assert!(report.max_residual() < 1e-6);
    let (p, _) = solve(&mu, &ball(), 5.0, 2.0, &SolveOptions::default()).unwrap();
    for t in p.offsets() {
        assert!((t - 2f64.powf(1.0 / 3.0)).abs() < 1e-6, "{t}");
    }
}

#[test]
fn normalized_square() {
    let mu = DirectionWeightMeasure::new(axes(2), vec![1.0 / 16.0; 4]).unwrap();
    let (p, report) = solve_normalized(&mu, &ball(), 2.0, 2.0, &SolveOptions::default()).unwrap();
    for t in p.offsets() {
        assert!((t - 2.0).abs() < 1e-6, "{t}");
    }
    assert!((report.lambda0 - 1.0).abs() < 1e-6);
    assert!(matches!(
        solve(&mu, &ball(), 2.0, 2.0, &SolveOptions::default()),
        Err(Error::PEqualsQ)
    ));
}

#[test]
fn hexagon_from_equal_weights() {
    let normals: Vec<UnitVector> = (0..6)
        .map(|i| {
            let a = PI / 3.0 * i as f64 + 0.1;
            UnitVector::from_slice(&[a.cos(), a.sin()]).unwrap()
        })
        .collect();
    let mu = DirectionWeightMeasure::new(normals, vec![0.3; 6]).unwrap();
    let (p, report) = solve(&mu, &ball(), 2.5, 1.5, &SolveOptions::default()).unwrap();
    let (lo, hi) = p
        .offsets()
        .iter()
        .fold((f64::MAX, 0.0f64), |(l, h), t| (l.min(*t), h.max(*t)));
    assert!(hi - lo < 1e-6, "{:?}", p.offsets());
    assert!(report.max_residual() < 1e-6);
    // trace is nondecreasing
    assert!(report.objective_trace.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn asymmetric_weights_in_3d() {
    let mut normals = axes(3);
    normals.push(UnitVector::from_slice(&[1.0, 1.0, 1.0]).unwrap());
    normals.push(UnitVector::from_slice(&[-1.0, 0.5, 0.2]).unwrap());
    let weights = vec![0.5, 1.0, 0.7, 0.9, 1.3, 0.4, 0.8, 0.6];
    let mu = DirectionWeightMeasure::new(normals, weights).unwrap();
    let (p, report) = solve(&mu, &ball(), 3.0, 1.5, &SolveOptions::default()).unwrap();
    assert!(report.max_residual() < 1e-4, "{report:?}");
    assert!(p.origin_diagnostics(1e-9).interior);
}

#[test]
fn hemisphere_measure_is_rejected() {
    let mu = DirectionWeightMeasure::new(
        vec![
            UnitVector::axis(2, 0, 1.0),
            UnitVector::axis(2, 1, 1.0),
            UnitVector::axis(2, 0, -1.0),
        ],
        vec![1.0; 3],
    )
    .unwrap();
    assert!(matches!(
        solve(&mu, &ball(), 3.0, 2.0, &SolveOptions::default()),
        Err(Error::MeasureOnHemisphere { .. })
    ));
}

#[test]
fn iteration_budget_is_reported() {
    let mut normals = axes(3);
    normals.push(UnitVector::from_slice(&[1.0, 1.0, 1.0]).unwrap());
    let mu = DirectionWeightMeasure::new(normals, vec![1.0, 2.0, 1.0, 3.0, 1.0, 1.0, 2.0]).unwrap();
    let opts = SolveOptions {
        max_iters: 2,
        ..SolveOptions::default()
    };
    assert!(matches!(
        solve(&mu, &ball(), 3.0, 1.0, &opts),
        Err(Error::NotConverged { iterations: 2, .. })
    ));
}

#[test]
fn constant_density_discretization() {
    let mu = discretize_density(&Density::Constant { value: 1.0 }, 2, 8).unwrap();
    assert_eq!(mu.len(), 8);
    for w in mu.weights() {
        assert!((w - PI / 4.0).abs() < 1e-13);
    }
    let f = Density::Affine {
        value: 1.0,
        gradient: vec![0.5, 0.0],
    };
    let mu = discretize_density(&f, 2, 8).unwrap();
    assert!((mu.total_mass() - 2.0 * PI).abs() < 1e-9);
    assert!(mu.weights()[0] > mu.weights()[4]);
    let half = Density::Affine {
        value: 0.0,
        gradient: vec![0.0, 1.0],
    };
    // negative on the lower half: rejected as a density
    assert!(discretize_density(&half, 2, 8).is_err());
}

#[test]
fn one_sided_cells_are_degenerate() {
    let mut values = vec![0.0; 8];
    values[1] = 1.0;
    values[2] = 1.0;
    assert_eq!(
        discretize_density(&Density::Cells { values }, 2, 8).unwrap_err(),
        Error::DegenerateDensity
    );
}

#[test]
fn icosahedral_cells_cover_the_sphere() {
    let mu = discretize_density(&Density::Constant { value: 1.0 }, 3, 1).unwrap();
    assert_eq!(mu.len(), 80);
    assert!((mu.total_mass() - 4.0 * PI).abs() < 1e-10);
    let f = Density::Affine {
        value: 2.0,
        gradient: vec![0.0, 0.0, 1.0],
    };
    let mu = discretize_density(&f, 3, 1).unwrap();
    // the linear part integrates to zero
    assert!((mu.total_mass() - 8.0 * PI).abs() < 1e-10);
}

#[test]
fn constant_density_gives_regular_polygons() {
    let f = Density::Constant { value: 0.5 };
    let (runs, summary) =
        solve_density(&f, &ball(), 2, 3.0, 2.0, &[8, 16], &SolveOptions::default()).unwrap();
    for r in &runs {
        let m = r.resolution as f64;
        let t = (PI / m).tan() / (PI / m);
        for h in r.polytope.offsets() {
            assert!((h - t).abs() < 1e-6);
        }
    }
    assert_eq!(summary.successive_distances.len(), 1);
    // at q = n the weak equation holds exactly for these polygons
    for r in summary.monge_ampere_residuals.unwrap() {
        assert!(r < 1e-6, "{r}");
    }
}
