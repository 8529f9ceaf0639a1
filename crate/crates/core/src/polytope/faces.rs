//! Recursive face enumeration for bounded H-polytopes.
//!
//! A `d`-dimensional problem lives in an affine frame `origin + basis * y`
//! (`basis` has orthonormal columns) and is cut out by local constraints
//! `<a, y> <= b` with unit `a`. Its facets are found by restricting to each
//! constraint plane and recursing; one-dimensional problems are intervals.
//! The triangulation of a face is the cone from its vertex centroid over the
//! triangulations of its facets, so every face comes out simplicial.

use nalgebra::{DMatrix, DVector};

use super::Simplex;
use crate::error::{Error, Result};

/// Restricted normals shorter than this are treated as parallel to the face.
const PARALLEL_EPS: f64 = 1e-9;

#[derive(Clone, Debug)]
pub(crate) struct Frame {
    pub origin: DVector<f64>,
    pub basis: DMatrix<f64>,
}

impl Frame {
    pub fn identity(n: usize) -> Self {
        Self {
            origin: DVector::zeros(n),
            basis: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    fn local(&self, x: &DVector<f64>) -> DVector<f64> {
        self.basis.tr_mul(&(x - &self.origin))
    }

    fn global(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.origin + &self.basis * y
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Constraint {
    pub a: DVector<f64>,
    pub b: f64,
    pub id: usize,
}

/// A full-dimensional face of a local problem, in global coordinates.
#[derive(Clone, Debug)]
pub(crate) struct Face {
    pub vertices: Vec<DVector<f64>>,
    pub simplices: Vec<Simplex>,
    pub volume: f64,
}

/// Orthonormal basis of the orthogonal complement of the unit vector `a`,
/// taken from the Householder reflection that maps `a` to a coordinate axis.
pub(crate) fn complement_basis(a: &DVector<f64>) -> DMatrix<f64> {
    let d = a.len();
    let sign = if a[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut v = a.clone();
    v[0] += sign;
    let vv = v.norm_squared();
    let mut h = DMatrix::identity(d, d);
    h -= (&v * v.transpose()) * (2.0 / vv);
    h.columns(1, d - 1).into_owned()
}

/// Restrict the problem to the plane of constraint `j`.
///
/// Returns `None` when a parallel constraint excludes the whole plane.
pub(crate) fn restrict(
    frame: &Frame,
    constraints: &[Constraint],
    j: usize,
    tol: f64,
) -> Option<(Frame, Vec<Constraint>)> {
    let cj = &constraints[j];
    let y0 = &cj.a * cj.b;
    let w = complement_basis(&cj.a);
    let sub = Frame {
        origin: frame.global(&y0),
        basis: &frame.basis * &w,
    };
    let mut out = Vec::with_capacity(constraints.len() - 1);
    for (l, c) in constraints.iter().enumerate() {
        if l == j {
            continue;
        }
        let a = w.tr_mul(&c.a);
        let rhs = c.b - c.a.dot(&y0);
        let norm = a.norm();
        if norm < PARALLEL_EPS {
            if rhs < -tol {
                return None;
            }
            continue;
        }
        out.push(Constraint {
            a: a / norm,
            b: rhs / norm,
            id: c.id,
        });
    }
    Some((sub, out))
}

fn push_unique(points: &mut Vec<DVector<f64>>, p: &DVector<f64>, tol: f64) {
    if !points.iter().any(|q| (q - p).amax() <= tol) {
        points.push(p.clone());
    }
}

/// Indices of constraints after dropping later duplicates (same plane).
fn distinct_constraints(constraints: &[Constraint], tol: f64) -> Vec<usize> {
    let mut keep: Vec<usize> = Vec::with_capacity(constraints.len());
    for (j, c) in constraints.iter().enumerate() {
        let dup = keep.iter().any(|&i| {
            let o = &constraints[i];
            (&o.a - &c.a).amax() <= PARALLEL_EPS && (o.b - c.b).abs() <= tol
        });
        if !dup {
            keep.push(j);
        }
    }
    keep
}

/// The full-dimensional polytope of a local problem, or `None` when it is
/// empty or lower-dimensional at tolerance `tol`.
pub(crate) fn face_of(frame: &Frame, constraints: &[Constraint], tol: f64) -> Result<Option<Face>> {
    let d = frame.dim();
    if d == 1 {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for c in constraints {
            if c.a[0] > 0.0 {
                hi = hi.min(c.b / c.a[0]);
            } else {
                lo = lo.max(c.b / c.a[0]);
            }
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::DegenerateGeometry("unbounded edge".into()));
        }
        if hi - lo <= tol {
            return Ok(None);
        }
        let p = frame.global(&DVector::from_element(1, lo));
        let q = frame.global(&DVector::from_element(1, hi));
        return Ok(Some(Face {
            vertices: vec![p.clone(), q.clone()],
            simplices: vec![Simplex::new(vec![p, q])],
            volume: hi - lo,
        }));
    }

    let mut subfaces = Vec::new();
    for j in distinct_constraints(constraints, tol) {
        let Some((sub_frame, sub_constraints)) = restrict(frame, constraints, j, tol) else {
            continue;
        };
        if let Some(face) = face_of(&sub_frame, &sub_constraints, tol)? {
            subfaces.push((j, face));
        }
    }
    if subfaces.len() < d + 1 {
        return Ok(None);
    }

    let mut vertices = Vec::new();
    for (_, f) in &subfaces {
        for v in &f.vertices {
            push_unique(&mut vertices, v, tol);
        }
    }
    if vertices.len() < d + 1 {
        return Ok(None);
    }
    let mut centroid = DVector::zeros(frame.origin.len());
    for v in &vertices {
        centroid += v;
    }
    centroid /= vertices.len() as f64;
    let c_local = frame.local(&centroid);

    let mut volume = 0.0;
    let mut max_height: f64 = 0.0;
    let mut simplices = Vec::new();
    for (j, f) in &subfaces {
        let height = constraints[*j].b - constraints[*j].a.dot(&c_local);
        max_height = max_height.max(height);
        volume += height.max(0.0) * f.volume / d as f64;
        for s in &f.simplices {
            let mut pts = Vec::with_capacity(d + 1);
            pts.push(centroid.clone());
            pts.extend(s.points.iter().cloned());
            simplices.push(Simplex::new(pts));
        }
    }
    if max_height <= tol {
        return Ok(None);
    }
    Ok(Some(Face {
        vertices,
        simplices,
        volume,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(a: &[f64], b: f64, id: usize) -> Constraint {
        let a = DVector::from_column_slice(a);
        let n = a.norm();
        Constraint {
            a: a / n,
            b: b / n,
            id,
        }
    }

    #[test]
    fn complement_is_orthonormal() {
        let a = DVector::from_vec(vec![0.3, -0.5, 0.81]).normalize();
        let w = complement_basis(&a);
        assert_eq!(w.ncols(), 2);
        let g = w.tr_mul(&w);
        assert!((g - DMatrix::<f64>::identity(2, 2)).amax() < 1e-14);
        assert!(w.tr_mul(&a).amax() < 1e-14);
    }

    #[test]
    fn unit_square_area() {
        let cs = vec![
            c(&[1.0, 0.0], 1.0, 0),
            c(&[-1.0, 0.0], 1.0, 1),
            c(&[0.0, 1.0], 1.0, 2),
            c(&[0.0, -1.0], 1.0, 3),
        ];
        let f = face_of(&Frame::identity(2), &cs, 1e-9).unwrap().unwrap();
        assert_eq!(f.vertices.len(), 4);
        assert!((f.volume - 4.0).abs() < 1e-12);
        let tri: f64 = f.simplices.iter().map(Simplex::volume).sum();
        assert!((tri - 4.0).abs() < 1e-12);
    }

    #[test]
    fn flat_region_is_rejected() {
        // 0 <= x <= 0 inside a box: a segment, not a 2-face
        let cs = vec![
            c(&[1.0, 0.0], 0.0, 0),
            c(&[-1.0, 0.0], 0.0, 1),
            c(&[0.0, 1.0], 1.0, 2),
            c(&[0.0, -1.0], 1.0, 3),
        ];
        assert!(face_of(&Frame::identity(2), &cs, 1e-9).unwrap().is_none());
    }

    #[test]
    fn cube_volume_and_triangulation() {
        let mut cs = Vec::new();
        for i in 0..3 {
            for s in [1.0, -1.0] {
                let mut a = [0.0; 3];
                a[i] = s;
                cs.push(c(&a, 1.0, cs.len()));
            }
        }
        let f = face_of(&Frame::identity(3), &cs, 1e-9).unwrap().unwrap();
        assert_eq!(f.vertices.len(), 8);
        assert!((f.volume - 8.0).abs() < 1e-12);
        let tri: f64 = f.simplices.iter().map(Simplex::volume).sum();
        assert!((tri - 8.0).abs() < 1e-12);
    }
}
