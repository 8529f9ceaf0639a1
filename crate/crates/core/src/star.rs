//! Star bodies used as the parameter body `Q`: radial function and gauge.
//!
//! Every kind evaluates both `rho_Q(u)` and `||x||_Q = |x| / rho_Q(x/|x|)`.
//! Bodies whose radial function has kinks (polytope gauges, radial tables)
//! also expose a partition of space into polyhedral cones on which `rho_Q`
//! is smooth, so that facet quadrature can integrate each piece separately.

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::polytope::HPolytope;
use crate::sphere::IcoGrid;

/// A polyhedral cone `{x : <x, w> >= 0 for all w}`.
pub type Cone = Vec<DVector<f64>>;

/// Tolerance on `det(phi) = 1` for equiaffine maps.
pub const UNIMODULAR_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub enum StarBody {
    /// Centered ball of the given radius; dimension-agnostic.
    Ball {
        radius: f64,
    },
    /// `{x : x^T A^{-1} x <= 1}` with `A` symmetric positive definite.
    Ellipsoid {
        matrix: DMatrix<f64>,
        inverse: DMatrix<f64>,
    },
    /// A polytope with the origin in its interior.
    PolytopeGauge(HPolytope),
    RadialTable(RadialTable),
    /// `phi Q` for a body without a closed-form image.
    Linear {
        base: Box<StarBody>,
        map: DMatrix<f64>,
        inverse: DMatrix<f64>,
    },
}

/// Sampled radial function with continuous interpolation.
#[derive(Clone, Debug)]
pub enum RadialTable {
    /// `n = 2`: values at increasing angles in `[0, 2pi)`, linear in angle.
    Planar { angles: Vec<f64>, values: Vec<f64> },
    /// `n = 3`: values at the vertices of a geodesic grid, barycentric on faces.
    Geodesic {
        grid: Arc<IcoGrid>,
        values: Vec<f64>,
        face_inverses: Arc<Vec<Matrix3<f64>>>,
    },
}

impl RadialTable {
    pub fn planar(angles: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if angles.len() < 3 || angles.len() != values.len() {
            return Err(Error::InvalidInput(
                "planar table needs >= 3 matching samples".into(),
            ));
        }
        check_positive(&values)?;
        let mut pairs: Vec<(f64, f64)> = angles
            .iter()
            .map(|a| a.rem_euclid(TAU))
            .zip(values.iter().cloned())
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in pairs.windows(2) {
            if w[1].0 - w[0].0 <= 1e-12 {
                return Err(Error::InvalidInput("duplicate table angle".into()));
            }
        }
        let (angles, values): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let m = angles.len();
        for i in 0..m {
            let gap = (angles[(i + 1) % m] - angles[i]).rem_euclid(TAU);
            if gap >= std::f64::consts::PI {
                return Err(Error::InvalidInput(
                    "table angles leave a gap of at least pi".into(),
                ));
            }
        }
        Ok(Self::Planar { angles, values })
    }

    /// Table on the geodesic grid of the given subdivision level; `values`
    /// follow the grid's vertex order.
    pub fn geodesic(level: usize, values: Vec<f64>) -> Result<Self> {
        let grid = IcoGrid::new(level);
        if values.len() != grid.vertices().len() {
            return Err(Error::InvalidInput(format!(
                "geodesic table of level {level} needs {} values, got {}",
                grid.vertices().len(),
                values.len()
            )));
        }
        check_positive(&values)?;
        let face_inverses = grid
            .faces()
            .iter()
            .map(|f| {
                Matrix3::from_columns(&[
                    grid.vertices()[f[0]],
                    grid.vertices()[f[1]],
                    grid.vertices()[f[2]],
                ])
                .try_inverse()
                .expect("geodesic faces are nondegenerate")
            })
            .collect();
        Ok(Self::Geodesic {
            grid: Arc::new(grid),
            values,
            face_inverses: Arc::new(face_inverses),
        })
    }

    /// Samples `rho` on the natural grid: `resolution` angles for `n = 2`,
    /// a level-`resolution` geodesic grid for `n = 3`.
    pub fn sample(n: usize, resolution: usize, rho: impl Fn(&DVector<f64>) -> f64) -> Result<Self> {
        match n {
            2 => {
                let angles: Vec<f64> = (0..resolution)
                    .map(|i| TAU * i as f64 / resolution as f64)
                    .collect();
                let values = angles
                    .iter()
                    .map(|a| rho(&DVector::from_vec(vec![a.cos(), a.sin()])))
                    .collect();
                Self::planar(angles, values)
            }
            3 => {
                let grid = IcoGrid::new(resolution);
                let values = grid
                    .vertices()
                    .iter()
                    .map(|v| rho(&DVector::from_column_slice(v.as_slice())))
                    .collect();
                Self::geodesic(resolution, values)
            }
            _ => Err(Error::InvalidInput(format!(
                "radial tables support n = 2, 3 (got {n})"
            ))),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Planar { .. } => 2,
            Self::Geodesic { .. } => 3,
        }
    }

    fn planar_segment(angles: &[f64], theta: f64) -> usize {
        let m = angles.len();
        match angles.partition_point(|a| *a <= theta) {
            0 => m - 1,
            i => i - 1,
        }
    }

    fn planar_eval(angles: &[f64], values: &[f64], seg: usize, theta: f64) -> f64 {
        let m = angles.len();
        let next = (seg + 1) % m;
        let gap = (angles[next] - angles[seg]).rem_euclid(TAU);
        let t = (theta - angles[seg]).rem_euclid(TAU) / gap;
        (1.0 - t) * values[seg] + t * values[next]
    }

    fn radial(&self, u: &[f64]) -> f64 {
        match self {
            Self::Planar { angles, values } => {
                let theta = u[1].atan2(u[0]).rem_euclid(TAU);
                let seg = Self::planar_segment(angles, theta);
                Self::planar_eval(angles, values, seg, theta)
            }
            Self::Geodesic { grid, values, .. } => {
                let (fi, bary) = grid.locate(&Vector3::new(u[0], u[1], u[2]));
                let f = grid.faces()[fi];
                bary[0] * values[f[0]] + bary[1] * values[f[1]] + bary[2] * values[f[2]]
            }
        }
    }

    fn radial_in_cone(&self, x: &[f64], cone: usize) -> f64 {
        match self {
            Self::Planar { angles, values } => {
                let theta = x[1].atan2(x[0]).rem_euclid(TAU);
                Self::planar_eval(angles, values, cone, theta)
            }
            Self::Geodesic {
                grid,
                values,
                face_inverses,
            } => {
                let c = face_inverses[cone] * Vector3::new(x[0], x[1], x[2]);
                let c = c / c.sum();
                let f = grid.faces()[cone];
                c[0] * values[f[0]] + c[1] * values[f[1]] + c[2] * values[f[2]]
            }
        }
    }

    fn cones(&self) -> Vec<Cone> {
        match self {
            Self::Planar { angles, .. } => {
                let m = angles.len();
                (0..m)
                    .map(|i| {
                        let (a, b) = (angles[i], angles[(i + 1) % m]);
                        // cross(d_a, x) >= 0 and cross(x, d_b) >= 0
                        vec![
                            DVector::from_vec(vec![-a.sin(), a.cos()]),
                            DVector::from_vec(vec![b.sin(), -b.cos()]),
                        ]
                    })
                    .collect()
            }
            Self::Geodesic { grid, .. } => grid
                .faces()
                .iter()
                .map(|f| {
                    let v = |i: usize| grid.vertices()[f[i]];
                    [(0, 1), (1, 2), (2, 0)]
                        .iter()
                        .map(|&(i, j)| {
                            let w = v(i).cross(&v(j));
                            DVector::from_column_slice(w.as_slice())
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

fn check_positive(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        Some(index) => Err(Error::NonPositiveRadial {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn quad_form(m: &DMatrix<f64>, x: &[f64]) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += m[(i, j)] * x[j];
        }
        s += x[i] * row;
    }
    s
}

fn mat_vec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum())
        .collect()
}

impl StarBody {
    pub fn ball(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::NonPositiveRadial {
                index: 0,
                value: radius,
            });
        }
        Ok(Self::Ball { radius })
    }

    pub fn ellipsoid(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n < 2 || matrix.ncols() != n {
            return Err(Error::InvalidInput(
                "ellipsoid matrix must be square, n >= 2".into(),
            ));
        }
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > 1e-12 * matrix.amax() {
            return Err(Error::InvalidInput(
                "ellipsoid matrix must be symmetric".into(),
            ));
        }
        let matrix = (&matrix + matrix.transpose()) * 0.5;
        let inverse = matrix
            .clone()
            .cholesky()
            .ok_or_else(|| {
                Error::InvalidInput("ellipsoid matrix must be positive definite".into())
            })?
            .inverse();
        Ok(Self::Ellipsoid { matrix, inverse })
    }

    pub fn polytope_gauge(p: HPolytope) -> Result<Self> {
        if !p.origin_diagnostics(p.tolerance()).interior {
            return Err(Error::InvalidInput(
                "gauge polytope must contain the origin in its interior".into(),
            ));
        }
        Ok(Self::PolytopeGauge(p))
    }

    pub fn radial_table(table: RadialTable) -> Self {
        Self::RadialTable(table)
    }

    /// Fixed dimension of the body, if it has one.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Ball { .. } => None,
            Self::Ellipsoid { matrix, .. } => Some(matrix.nrows()),
            Self::PolytopeGauge(p) => Some(p.dim()),
            Self::RadialTable(t) => Some(t.dim()),
            Self::Linear { map, .. } => Some(map.nrows()),
        }
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        match self.dim() {
            Some(d) if d != n => Err(Error::InvalidInput(format!(
                "star body has dimension {d}, problem has {n}"
            ))),
            _ => Ok(()),
        }
    }

    /// `rho_Q(u)` for a unit vector `u`.
    pub fn radial(&self, u: &[f64]) -> f64 {
        match self {
            Self::Ball { radius } => *radius,
            Self::Ellipsoid { inverse, .. } => quad_form(inverse, u).sqrt().recip(),
            Self::PolytopeGauge(p) => p.radial(u),
            Self::RadialTable(t) => t.radial(u),
            Self::Linear { base, inverse, .. } => {
                base.gauge(&mat_vec(inverse, u)).recip() * norm(u)
            }
        }
    }

    /// Minkowski gauge `||x||_Q = |x| / rho_Q(x / |x|)`; zero at the origin.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        match self {
            Self::Ball { radius } => norm(x) / radius,
            Self::Ellipsoid { inverse, .. } => quad_form(inverse, x).max(0.0).sqrt(),
            Self::PolytopeGauge(p) => p
                .normals()
                .iter()
                .zip(p.offsets())
                .map(|(u, t)| u.as_slice().iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / t)
                .fold(0.0, f64::max),
            Self::RadialTable(t) => {
                let r = norm(x);
                if r == 0.0 {
                    return 0.0;
                }
                let u: Vec<f64> = x.iter().map(|v| v / r).collect();
                r / t.radial(&u)
            }
            Self::Linear { base, inverse, .. } => base.gauge(&mat_vec(inverse, x)),
        }
    }

    /// Gauge evaluated with the smooth formula of cone `cone` (see
    /// [`smooth_cones`](Self::smooth_cones)); equals [`gauge`](Self::gauge)
    /// for `x` inside that cone.
    pub fn gauge_in_cone(&self, x: &[f64], cone: usize) -> f64 {
        match self {
            Self::Ball { .. } | Self::Ellipsoid { .. } => self.gauge(x),
            Self::PolytopeGauge(p) => {
                let f = &p.h_to_v().facets()[cone];
                let i = f.normal_index;
                p.normals()[i]
                    .as_slice()
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    / p.offsets()[i]
            }
            Self::RadialTable(t) => norm(x) / t.radial_in_cone(x, cone),
            Self::Linear { base, inverse, .. } => base.gauge_in_cone(&mat_vec(inverse, x), cone),
        }
    }

    /// Polyhedral cones covering `R^n` on each of which the gauge is smooth;
    /// `None` when the gauge is smooth away from the origin.
    pub fn smooth_cones(&self) -> Option<Vec<Cone>> {
        match self {
            Self::Ball { .. } | Self::Ellipsoid { .. } => None,
            Self::PolytopeGauge(p) => {
                let facets = p.h_to_v().facets();
                let scaled: Vec<DVector<f64>> = facets
                    .iter()
                    .map(|f| p.normals()[f.normal_index].as_vector() / p.offsets()[f.normal_index])
                    .collect();
                Some(
                    (0..facets.len())
                        .map(|j| {
                            (0..facets.len())
                                .filter(|&l| l != j)
                                .map(|l| &scaled[j] - &scaled[l])
                                .collect()
                        })
                        .collect(),
                )
            }
            Self::RadialTable(t) => Some(t.cones()),
            Self::Linear { base, inverse, .. } => base.smooth_cones().map(|cones| {
                let inv_t = inverse.transpose();
                cones
                    .into_iter()
                    .map(|c| c.into_iter().map(|w| &inv_t * w).collect())
                    .collect()
            }),
        }
    }
}

/// `rho_Q(u)`.
pub fn radial_q(q: &StarBody, u: &crate::polytope::UnitVector) -> f64 {
    q.radial(u.as_slice())
}

/// `||x||_Q`.
pub fn gauge(q: &StarBody, x: &DVector<f64>) -> f64 {
    q.gauge(x.as_slice())
}

/// The image `phi Q` under a map with `det(phi) = 1`.
pub fn transform_star(q: &StarBody, phi: &DMatrix<f64>) -> Result<StarBody> {
    let n = phi.nrows();
    if phi.ncols() != n {
        return Err(Error::InvalidInput("map must be square".into()));
    }
    q.check_dim(n)?;
    let det = phi.determinant();
    if (det - 1.0).abs() > UNIMODULAR_TOL {
        return Err(Error::NotUnimodular { det });
    }
    let inverse = phi
        .clone()
        .try_inverse()
        .ok_or(Error::NotUnimodular { det })?;
    Ok(match q {
        StarBody::Ball { radius } => {
            StarBody::ellipsoid(phi * phi.transpose() * (radius * radius))?
        }
        StarBody::Ellipsoid { matrix, .. } => StarBody::ellipsoid(phi * matrix * phi.transpose())?,
        StarBody::PolytopeGauge(p) => StarBody::PolytopeGauge(p.transformed(phi)?),
        StarBody::RadialTable(_) => StarBody::Linear {
            base: Box::new(q.clone()),
            map: phi.clone(),
            inverse,
        },
        StarBody::Linear {
            base,
            map,
            inverse: base_inverse,
        } => StarBody::Linear {
            base: base.clone(),
            map: phi * map,
            inverse: base_inverse * inverse,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::UnitVector;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn square_gauge() -> StarBody {
        let normals = vec![
            UnitVector::axis(2, 0, 1.0),
            UnitVector::axis(2, 0, -1.0),
            UnitVector::axis(2, 1, 1.0),
            UnitVector::axis(2, 1, -1.0),
        ];
        StarBody::polytope_gauge(HPolytope::new(normals, vec![1.0; 4]).unwrap()).unwrap()
    }

    #[test]
    fn radial_examples() {
        let b = StarBody::ball(2.0).unwrap();
        assert_eq!(b.radial(&[0.6, 0.8]), 2.0);
        let e = StarBody::ellipsoid(DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0])))
            .unwrap();
        assert!((e.radial(&[1.0, 0.0]) - 2.0).abs() < 1e-15);
        let s = square_gauge();
        assert!((s.radial(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]) - SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn gauge_examples() {
        assert_eq!(StarBody::ball(1.0).unwrap().gauge(&[3.0, 4.0]), 5.0);
        assert_eq!(StarBody::ball(2.0).unwrap().gauge(&[3.0, 4.0]), 2.5);
        let e = StarBody::ellipsoid(DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0])))
            .unwrap();
        assert!((e.gauge(&[2.0, 0.0]) - 1.0).abs() < 1e-15);
        assert_eq!(StarBody::ball(1.0).unwrap().gauge(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn rejects_bad_bodies() {
        assert!(StarBody::ball(0.0).is_err());
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(StarBody::ellipsoid(m).is_err());
        assert!(matches!(
            RadialTable::planar(vec![0.0, 2.0, 4.0], vec![1.0, -1.0, 1.0]),
            Err(Error::NonPositiveRadial { index: 1, .. })
        ));
        assert!(RadialTable::planar(vec![0.0, 0.5, 1.0], vec![1.0; 3]).is_err());
    }

    #[test]
    fn transform_examples() {
        let b = StarBody::ball(1.0).unwrap();
        let id = DMatrix::<f64>::identity(2, 2);
        let same = transform_star(&b, &id).unwrap();
        assert!((same.gauge(&[0.3, -0.7]) - b.gauge(&[0.3, -0.7])).abs() < 1e-15);

        let shear = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        match transform_star(&b, &shear).unwrap() {
            StarBody::Ellipsoid { matrix, .. } => {
                let expect = &shear * shear.transpose();
                assert!((matrix - expect).amax() < 1e-15);
            }
            other => panic!("expected ellipsoid, got {other:?}"),
        }
        let scale = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 2.0]));
        assert!(matches!(
            transform_star(&b, &scale),
            Err(Error::NotUnimodular { .. })
        ));
    }

    #[test]
    fn planar_table_interpolates_linearly_in_angle() {
        let t = RadialTable::planar(vec![0.0, 2.0, 4.0], vec![1.0, 2.0, 3.0]).unwrap();
        let q = StarBody::radial_table(t);
        let a: f64 = 1.0;
        assert!((q.radial(&[a.cos(), a.sin()]) - 1.5).abs() < 1e-14);
        // wrap-around segment from 4 to 2pi
        let a = 4.0 + (TAU - 4.0) / 2.0;
        assert!((q.radial(&[a.cos(), a.sin()]) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn geodesic_table_reproduces_constant_and_vertices() {
        let grid = IcoGrid::new(1);
        let values: Vec<f64> = grid.vertices().iter().map(|v| 1.0 + 0.5 * v[2]).collect();
        let t = RadialTable::geodesic(1, values.clone()).unwrap();
        let q = StarBody::radial_table(t);
        for (v, val) in grid.vertices().iter().zip(&values) {
            assert!((q.radial(v.as_slice()) - val).abs() < 1e-12);
        }
    }

    #[test]
    fn cone_formula_matches_gauge() {
        let shear = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        let bodies = vec![
            square_gauge(),
            StarBody::radial_table(
                RadialTable::planar(vec![0.0, 1.5, 3.0, 4.5], vec![1.0, 2.0, 1.5, 0.7]).unwrap(),
            ),
            transform_star(
                &StarBody::radial_table(
                    RadialTable::planar(vec![0.0, 2.0, 4.0], vec![1.0, 2.0, 1.2]).unwrap(),
                ),
                &shear,
            )
            .unwrap(),
        ];
        for q in &bodies {
            let cones = q.smooth_cones().unwrap();
            for k in 0..200 {
                let a = 0.1 + k as f64 * 0.0311;
                let x = [2.0 * a.cos(), 2.0 * a.sin()];
                let xv = DVector::from_column_slice(&x);
                let c = cones
                    .iter()
                    .position(|cone| cone.iter().all(|w| w.dot(&xv) >= 0.0))
                    .expect("cones cover the plane");
                assert!((q.gauge_in_cone(&x, c) - q.gauge(&x)).abs() < 1e-12);
            }
        }
    }
}
