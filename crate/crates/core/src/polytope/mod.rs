//! Polytope geometry: halfspace representation, vertex/facet recovery,
//! support and radial functions, and origin diagnostics.

pub(crate) mod faces;
mod hemisphere;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use faces::{Constraint, Frame};

pub use hemisphere::{
    positively_spanning, validate_measure, DirectionWeightMeasure, HemisphereCheck,
};

/// Relative band used for redundancy, incidence and dimension tests.
pub const GEOMETRY_RTOL: f64 = 1e-9;

/// A point of the unit sphere `S^{n-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitVector(DVector<f64>);

impl UnitVector {
    /// Normalizes `v`; fails on zero, non-finite or one-dimensional input.
    pub fn new(v: DVector<f64>) -> Result<Self> {
        if v.len() < 2 {
            return Err(Error::InvalidInput(format!("dimension {} < 2", v.len())));
        }
        let norm = v.norm();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::InvalidInput(
                "direction must be finite and nonzero".into(),
            ));
        }
        Ok(Self(v / norm))
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(v))
    }

    /// `sign * e_axis` in dimension `n`.
    pub fn axis(n: usize, axis: usize, sign: f64) -> Self {
        let mut v = DVector::zeros(n);
        v[axis] = sign.signum();
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn dot(&self, x: &DVector<f64>) -> f64 {
        self.0.dot(x)
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }
}

impl TryFrom<Vec<f64>> for UnitVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(DVector::from_vec(v))
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(u: UnitVector) -> Self {
        u.0.as_slice().to_vec()
    }
}

/// An `(m)`-simplex embedded in `R^n`, given by its `m + 1` vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct Simplex {
    pub points: Vec<DVector<f64>>,
}

impl Simplex {
    pub fn new(points: Vec<DVector<f64>>) -> Self {
        Self { points }
    }

    /// Intrinsic dimension `m`.
    pub fn dim(&self) -> usize {
        self.points.len() - 1
    }

    /// `m`-dimensional volume from the Gram determinant of the edge vectors.
    pub fn volume(&self) -> f64 {
        let m = self.dim();
        if m == 0 {
            return 0.0;
        }
        let n = self.points[0].len();
        let mut e = DMatrix::zeros(n, m);
        for j in 0..m {
            e.set_column(j, &(&self.points[j + 1] - &self.points[0]));
        }
        let gram = e.tr_mul(&e);
        let det = gram.determinant().max(0.0);
        det.sqrt() / factorial(m)
    }

    pub fn centroid(&self) -> DVector<f64> {
        let mut c = DVector::zeros(self.points[0].len());
        for p in &self.points {
            c += p;
        }
        c / self.points.len() as f64
    }
}

pub(crate) fn factorial(m: usize) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

/// An `(n-1)`-dimensional face of a polytope.
#[derive(Clone, Debug)]
pub struct Facet {
    /// Index of the halfspace whose boundary carries this facet.
    pub normal_index: usize,
    /// Indices into [`VPolytope::vertices`].
    pub vertex_indices: Vec<usize>,
    /// Simplicial decomposition; `(n-1)`-simplices covering the facet.
    pub simplices: Vec<Simplex>,
    /// `(n-1)`-dimensional Hausdorff measure of the facet.
    pub area: f64,
}

/// Vertex/facet description of a polytope recovered from its halfspaces.
#[derive(Clone, Debug)]
pub struct VPolytope {
    dim: usize,
    vertices: Vec<DVector<f64>>,
    facets: Vec<Facet>,
    volume: f64,
}

impl VPolytope {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }

    /// Facets sorted by normal index.
    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn facet_of_normal(&self, normal_index: usize) -> Option<&Facet> {
        self.facets
            .binary_search_by_key(&normal_index, |f| f.normal_index)
            .ok()
            .map(|i| &self.facets[i])
    }

    /// Lebesgue measure, from the cone decomposition over the origin.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// `h_P(v) = max <x, v>` over the vertices.
    pub fn support(&self, v: &DVector<f64>) -> f64 {
        self.vertices
            .iter()
            .map(|x| x.dot(v))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn scaled(&self, c: f64) -> Self {
        let scale_pts = |pts: &[DVector<f64>]| pts.iter().map(|p| p * c).collect::<Vec<_>>();
        let m = (self.dim - 1) as i32;
        Self {
            dim: self.dim,
            vertices: scale_pts(&self.vertices),
            facets: self
                .facets
                .iter()
                .map(|f| Facet {
                    normal_index: f.normal_index,
                    vertex_indices: f.vertex_indices.clone(),
                    simplices: f
                        .simplices
                        .iter()
                        .map(|s| Simplex::new(scale_pts(&s.points)))
                        .collect(),
                    area: f.area * c.powi(m),
                })
                .collect(),
            volume: self.volume * c.powi(self.dim as i32),
        }
    }
}

/// `h_P(v)`: maximum of `<x, v>` over the polytope.
pub fn support(p: &VPolytope, v: &UnitVector) -> f64 {
    p.support(v.as_vector())
}

/// A polytope `{x : <x, u_i> <= t_i}` containing the origin, together with
/// its recovered vertex/facet structure.
#[derive(Clone, Debug)]
pub struct HPolytope {
    normals: Vec<UnitVector>,
    offsets: Vec<f64>,
    redundant: Vec<bool>,
    vrep: Arc<VPolytope>,
}

/// Result of a radial query: `rho_P(u)` and the facet hit by the ray.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialHit {
    pub rho: f64,
    /// Lowest index attaining the minimum.
    pub facet: usize,
    /// Every index attaining the minimum (length > 1 only on a null set).
    pub ties: Vec<usize>,
}

/// Position of the origin relative to a polytope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OriginDiagnostics {
    pub interior: bool,
    pub inradius_from_origin: f64,
    pub zero_offset_normals: Vec<usize>,
    /// Some facet contains the origin, so `Xi_P` has positive measure.
    pub xi_flagged: bool,
}

/// Builds and validates `P(z) = {x : <x, u_i> <= t_i}`.
pub fn build_hpolytope(normals: Vec<UnitVector>, offsets: Vec<f64>) -> Result<HPolytope> {
    HPolytope::new(normals, offsets)
}

impl HPolytope {
    pub fn new(normals: Vec<UnitVector>, offsets: Vec<f64>) -> Result<Self> {
        let k = normals.len();
        if k == 0 || offsets.len() != k {
            return Err(Error::InvalidInput(format!(
                "{} normals but {} offsets",
                k,
                offsets.len()
            )));
        }
        let n = normals[0].dim();
        if normals.iter().any(|u| u.dim() != n) {
            return Err(Error::InvalidInput("normals of mixed dimension".into()));
        }
        if k < n + 1 {
            return Err(Error::Unbounded { dim: n });
        }
        if offsets.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidInput(
                "offsets must be finite and nonnegative".into(),
            ));
        }
        if positively_spanning(&normals).is_some() {
            return Err(Error::Unbounded { dim: n });
        }
        let scale = offsets.iter().cloned().fold(0.0, f64::max);
        if scale <= 0.0 {
            return Err(Error::EmptyInterior);
        }
        let tol = GEOMETRY_RTOL * scale;
        let vrep = enumerate(&normals, &offsets, tol)?;
        if vrep.volume <= tol * scale.powi(n as i32 - 1) {
            return Err(Error::EmptyInterior);
        }
        let redundant = normals
            .iter()
            .zip(&offsets)
            .map(|(u, t)| vrep.support(u.as_vector()) < t - tol)
            .collect();
        Ok(Self {
            normals,
            offsets,
            redundant,
            vrep: Arc::new(vrep),
        })
    }

    pub fn dim(&self) -> usize {
        self.normals[0].dim()
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    pub fn normals(&self) -> &[UnitVector] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Largest offset; the length unit for all tolerances.
    pub fn scale(&self) -> f64 {
        self.offsets.iter().cloned().fold(0.0, f64::max)
    }

    pub fn tolerance(&self) -> f64 {
        GEOMETRY_RTOL * self.scale()
    }

    /// Constraint `i` lies strictly outside the polytope (by more than the band).
    pub fn is_redundant(&self, i: usize) -> bool {
        self.redundant[i]
    }

    pub fn redundant(&self) -> &[bool] {
        &self.redundant
    }

    /// The vertex/facet representation computed at construction.
    pub fn h_to_v(&self) -> &VPolytope {
        &self.vrep
    }

    pub fn support(&self, v: &DVector<f64>) -> f64 {
        self.vrep.support(v)
    }

    pub fn volume(&self) -> f64 {
        self.vrep.volume
    }

    /// `c * P` for `c > 0`, reusing the combinatorics.
    pub fn scaled(&self, c: f64) -> Self {
        assert!(c > 0.0 && c.is_finite(), "scale factor must be positive");
        Self {
            normals: self.normals.clone(),
            offsets: self.offsets.iter().map(|t| t * c).collect(),
            redundant: self.redundant.clone(),
            vrep: Arc::new(self.vrep.scaled(c)),
        }
    }

    /// `phi P` for an invertible linear map: normals `phi^{-T} u` renormalized.
    pub fn transformed(&self, phi: &DMatrix<f64>) -> Result<Self> {
        let inv_t = phi
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("singular linear map".into()))?
            .transpose();
        let mut normals = Vec::with_capacity(self.len());
        let mut offsets = Vec::with_capacity(self.len());
        for (u, t) in self.normals.iter().zip(&self.offsets) {
            let w = &inv_t * u.as_vector();
            let norm = w.norm();
            normals.push(UnitVector::new(w)?);
            offsets.push(t / norm);
        }
        Self::new(normals, offsets)
    }

    /// Radial function and the facet hit by the ray through `u`.
    pub fn radial_and_facet(&self, u: &DVector<f64>) -> Result<RadialHit> {
        let mut best = f64::INFINITY;
        let mut vals = Vec::with_capacity(self.len());
        for (i, (ui, t)) in self.normals.iter().zip(&self.offsets).enumerate() {
            let c = ui.dot(u);
            if c > 0.0 {
                let r = t / c;
                vals.push((i, r));
                best = best.min(r);
            }
        }
        if !best.is_finite() {
            return Err(Error::Unbounded { dim: self.dim() });
        }
        let band = best * 1e-12;
        let ties: Vec<usize> = vals
            .iter()
            .filter(|(_, r)| *r <= best + band)
            .map(|(i, _)| *i)
            .collect();
        Ok(RadialHit {
            rho: best,
            facet: ties[0],
            ties,
        })
    }

    /// Radial function only; hot path of the Monte-Carlo sampler.
    pub fn radial(&self, u: &[f64]) -> f64 {
        self.radial_with_facet(u).0
    }

    /// Like [`radial`](Self::radial) but also returns the lowest minimizing index.
    pub fn radial_with_facet(&self, u: &[f64]) -> (f64, usize) {
        let mut best = f64::INFINITY;
        let mut arg = usize::MAX;
        for (i, (ui, t)) in self.normals.iter().zip(&self.offsets).enumerate() {
            let c: f64 = ui.as_slice().iter().zip(u).map(|(a, b)| a * b).sum();
            if c > 0.0 {
                let r = t / c;
                if r < best {
                    best = r;
                    arg = i;
                }
            }
        }
        (best, arg)
    }

    /// Origin position: inradius over facet planes and zero-offset flags.
    pub fn origin_diagnostics(&self, tol: f64) -> OriginDiagnostics {
        let inradius = self
            .vrep
            .facets
            .iter()
            .map(|f| self.offsets[f.normal_index])
            .fold(f64::INFINITY, f64::min);
        let zero_offset_normals: Vec<usize> = (0..self.len())
            .filter(|&i| !self.redundant[i] && self.offsets[i] <= tol)
            .collect();
        let xi_flagged = self
            .vrep
            .facets
            .iter()
            .any(|f| self.offsets[f.normal_index] <= tol);
        OriginDiagnostics {
            interior: inradius > tol,
            inradius_from_origin: inradius,
            zero_offset_normals,
            xi_flagged,
        }
    }
}

/// Free-function form of [`HPolytope::radial_and_facet`].
pub fn radial_and_facet(p: &HPolytope, u: &UnitVector) -> Result<RadialHit> {
    p.radial_and_facet(u.as_vector())
}

/// Free-function form of [`HPolytope::origin_diagnostics`].
pub fn origin_diagnostics(p: &HPolytope, tol: f64) -> OriginDiagnostics {
    p.origin_diagnostics(tol)
}

pub(crate) fn top_constraints(normals: &[UnitVector], offsets: &[f64]) -> Vec<Constraint> {
    normals
        .iter()
        .zip(offsets)
        .enumerate()
        .map(|(id, (u, t))| Constraint {
            a: u.as_vector().clone(),
            b: *t,
            id,
        })
        .collect()
}

fn enumerate(normals: &[UnitVector], offsets: &[f64], tol: f64) -> Result<VPolytope> {
    let n = normals[0].dim();
    let top = Frame::identity(n);
    let constraints = top_constraints(normals, offsets);

    let mut raw: Vec<(usize, faces::Face)> = Vec::new();
    for i in 0..constraints.len() {
        // an identical earlier plane owns the facet
        let dup = (0..i).any(|j| {
            (&constraints[j].a - &constraints[i].a).amax() <= 1e-12
                && (constraints[j].b - constraints[i].b).abs() <= tol
        });
        if dup {
            continue;
        }
        let Some((frame, sub)) = faces::restrict(&top, &constraints, i, tol) else {
            continue;
        };
        if let Some(face) = faces::face_of(&frame, &sub, tol)? {
            raw.push((i, face));
        }
    }
    if raw.len() < n + 1 {
        return Err(Error::EmptyInterior);
    }

    let mut points: Vec<DVector<f64>> = Vec::new();
    for (_, f) in &raw {
        for v in &f.vertices {
            if !points.iter().any(|q| (q - v).amax() <= tol) {
                points.push(v.clone());
            }
        }
    }
    for p in &points {
        for (u, t) in normals.iter().zip(offsets) {
            if u.dot(p) > t + 10.0 * tol {
                return Err(Error::DegenerateGeometry(format!(
                    "recovered vertex violates a halfspace by {:e}",
                    u.dot(p) - t
                )));
            }
        }
    }

    // deterministic vertex order: lexicographic in incident normal indices
    let incidence: Vec<Vec<usize>> = points
        .iter()
        .map(|p| {
            raw.iter()
                .filter(|(i, _)| (normals[*i].dot(p) - offsets[*i]).abs() <= 10.0 * tol)
                .map(|(i, _)| *i)
                .collect()
        })
        .collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| incidence[a].cmp(&incidence[b]));
    let vertices: Vec<DVector<f64>> = order.iter().map(|&i| points[i].clone()).collect();
    let incidence: Vec<Vec<usize>> = order.iter().map(|&i| incidence[i].clone()).collect();

    let mut volume = 0.0;
    let facets = raw
        .into_iter()
        .map(|(i, face)| {
            volume += offsets[i] * face.volume / n as f64;
            Facet {
                normal_index: i,
                vertex_indices: (0..vertices.len())
                    .filter(|&v| incidence[v].contains(&i))
                    .collect(),
                simplices: face.simplices,
                area: face.volume,
            }
        })
        .collect();
    Ok(VPolytope {
        dim: n,
        vertices,
        facets,
        volume,
    })
}
