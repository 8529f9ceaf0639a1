//! Dual curvature measures and dual intrinsic volumes of polytopes with
//! respect to a star body, by quadrature over facets.
//!
//! For a polytope `P` containing the origin, the atom of `C_q(P, Q, .)` at a
//! facet normal `v` with offset `h > 0` is
//!
//! ```text
//!     (1/n) * h * integral over F(P, v) of ||x||_Q^(q-n) dH^{n-1}(x)
//! ```
//!
//! and it vanishes for normals without a facet or with `h = 0`. The
//! `L_p` atoms are `h^(-p)` times the `C_q` atoms.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::faces::{self, Constraint, Frame};
use crate::polytope::{top_constraints, HPolytope, Simplex};
use crate::quadrature::{integrate, pairwise_sum, Estimate};
use crate::star::{transform_star, Cone, StarBody, UNIMODULAR_TOL};

/// Default relative accuracy per facet.
pub const DEFAULT_RTOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureOptions {
    /// Relative accuracy target per facet integral.
    pub rtol: f64,
    /// Use `h * area / n` when `q = n` instead of quadrature.
    pub closed_form_at_q_eq_n: bool,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        Self {
            rtol: DEFAULT_RTOL,
            closed_form_at_q_eq_n: true,
        }
    }
}

impl MeasureOptions {
    pub fn with_rtol(rtol: f64) -> Self {
        Self {
            rtol,
            ..Self::default()
        }
    }
}

/// Atoms of `C_q(P, Q, .)` and `C_{p,q}(P, Q, .)` per halfspace normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualMeasureResult {
    pub per_normal_cq: Vec<f64>,
    /// `None` where the facet passes through the origin (`h^{-p}` undefined).
    pub per_normal_cpq: Vec<Option<f64>>,
    pub vq: f64,
    pub quadrature_error_estimate: Vec<f64>,
}

impl DualMeasureResult {
    /// `C_{p,q}` atoms with not-applicable entries read as zero.
    pub fn cpq_or_zero(&self) -> Vec<f64> {
        self.per_normal_cpq
            .iter()
            .map(|c| c.unwrap_or(0.0))
            .collect()
    }
}

fn is_q_eq_n(q: f64, n: usize) -> bool {
    (q - n as f64).abs() <= 1e-14 * n as f64
}

/// `(1/n) h * integral of ||x||_Q^(q-n)` over a triangulated facet.
pub fn facet_integral(
    simplices: &[Simplex],
    h: f64,
    star: &StarBody,
    q: f64,
    rtol: f64,
) -> Result<Estimate> {
    facet_integral_in_cone(simplices, h, star, q, rtol, None)
}

fn facet_integral_in_cone(
    simplices: &[Simplex],
    h: f64,
    star: &StarBody,
    q: f64,
    rtol: f64,
    cone: Option<usize>,
) -> Result<Estimate> {
    if simplices.is_empty() {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let n = simplices[0].points[0].len();
    let factor = h / n as f64;
    let exponent = q - n as f64;
    let est = match cone {
        Some(c) => integrate(
            simplices,
            &|x: &[f64]| star.gauge_in_cone(x, c).powf(exponent),
            rtol,
        )?,
        None => integrate(simplices, &|x: &[f64]| star.gauge(x).powf(exponent), rtol)?,
    };
    Ok(Estimate {
        value: factor * est.value,
        error: factor * est.error,
    })
}

/// Triangulations of the parts of facet `i` lying in each smoothness cone.
fn facet_pieces(p: &HPolytope, i: usize, cones: &[Cone]) -> Result<Vec<(usize, Vec<Simplex>)>> {
    let facet = p
        .h_to_v()
        .facet_of_normal(i)
        .expect("pieces requested for a facet normal");
    let verts: Vec<&DVector<f64>> = facet
        .vertex_indices
        .iter()
        .map(|&v| &p.h_to_v().vertices()[v])
        .collect();
    let tol = p.tolerance();
    let base = top_constraints(p.normals(), p.offsets());
    let mut out = Vec::new();
    for (c, cone) in cones.iter().enumerate() {
        // quick reject: some cone wall separates every facet vertex
        if cone
            .iter()
            .any(|w| verts.iter().all(|x| w.dot(x) < -tol * w.norm()))
        {
            continue;
        }
        let mut constraints = base.clone();
        for w in cone {
            let norm = w.norm();
            if norm > 0.0 {
                constraints.push(Constraint {
                    a: -w / norm,
                    b: 0.0,
                    id: usize::MAX,
                });
            }
        }
        let Some((frame, sub)) = faces::restrict(&Frame::identity(p.dim()), &constraints, i, tol)
        else {
            continue;
        };
        if let Some(face) = faces::face_of(&frame, &sub, tol)? {
            out.push((c, face.simplices));
        }
    }
    Ok(out)
}

/// Atom of `C_q` at normal `i` with its quadrature error estimate.
fn atom(
    p: &HPolytope,
    i: usize,
    star: &StarBody,
    q: f64,
    cones: Option<&[Cone]>,
    opts: &MeasureOptions,
) -> Result<Estimate> {
    let zero = Estimate {
        value: 0.0,
        error: 0.0,
    };
    let Some(facet) = p.h_to_v().facet_of_normal(i) else {
        return Ok(zero);
    };
    let h = p.offsets()[i];
    if h <= p.tolerance() {
        return Ok(zero);
    }
    let n = p.dim();
    if opts.closed_form_at_q_eq_n && is_q_eq_n(q, n) {
        return Ok(Estimate {
            value: h * facet.area / n as f64,
            error: 0.0,
        });
    }
    match cones {
        None => facet_integral(&facet.simplices, h, star, q, opts.rtol),
        Some(cones) => {
            let mut value = Vec::new();
            let mut error = 0.0;
            for (c, simplices) in facet_pieces(p, i, cones)? {
                let e = facet_integral_in_cone(&simplices, h, star, q, opts.rtol, Some(c))?;
                value.push(e.value);
                error += e.error;
            }
            Ok(Estimate {
                value: pairwise_sum(&value),
                error,
            })
        }
    }
}

/// Atoms of `C_q(P, Q, .)` and `C_{p,q}(P, Q, .)` and the total `V_q(P, Q)`.
pub fn dual_curvature_measure(
    p: &HPolytope,
    star: &StarBody,
    q: f64,
    lp: f64,
    opts: &MeasureOptions,
) -> Result<DualMeasureResult> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidInput(format!("q must be positive, got {q}")));
    }
    star.check_dim(p.dim())?;
    let cones = if opts.closed_form_at_q_eq_n && is_q_eq_n(q, p.dim()) {
        None
    } else {
        star.smooth_cones()
    };
    let atoms: Vec<Estimate> = (0..p.len())
        .into_par_iter()
        .map(|i| atom(p, i, star, q, cones.as_deref(), opts))
        .collect::<Result<_>>()?;
    let tol = p.tolerance();
    let per_normal_cq: Vec<f64> = atoms.iter().map(|a| a.value).collect();
    let per_normal_cpq = per_normal_cq
        .iter()
        .zip(p.offsets())
        .map(|(c, h)| {
            if *h > tol {
                Some(c * h.powf(-lp))
            } else {
                None
            }
        })
        .collect();
    Ok(DualMeasureResult {
        vq: pairwise_sum(&per_normal_cq),
        per_normal_cpq,
        per_normal_cq,
        quadrature_error_estimate: atoms.iter().map(|a| a.error).collect(),
    })
}

/// `V_q(P, Q)`, the total mass of `C_q(P, Q, .)`.
pub fn dual_intrinsic_volume(
    p: &HPolytope,
    star: &StarBody,
    q: f64,
    opts: &MeasureOptions,
) -> Result<f64> {
    Ok(dual_curvature_measure(p, star, q, 0.0, opts)?.vq)
}

/// Closed form `V_q(rB, sB) = kappa_n r^q s^(n-q)`.
pub fn ball_dual_intrinsic_volume(n: usize, r: f64, q: f64, q_radius: f64) -> f64 {
    crate::sphere::ball_volume(n) * r.powf(q) * q_radius.powf(n as f64 - q)
}

/// Gradient of `z -> V_q(P(z), Q)`: component `i` is `q C_q(P, Q, {u_i}) / h_P(u_i)`
/// and zero for normals without a facet.
pub fn vq_gradient(
    p: &HPolytope,
    star: &StarBody,
    q: f64,
    opts: &MeasureOptions,
) -> Result<Vec<f64>> {
    let m = dual_curvature_measure(p, star, q, 0.0, opts)?;
    gradient_from_atoms(p, &m.per_normal_cq, q)
}

pub(crate) fn gradient_from_atoms(p: &HPolytope, cq: &[f64], q: f64) -> Result<Vec<f64>> {
    let v = p.h_to_v();
    (0..p.len())
        .map(|i| {
            if v.facet_of_normal(i).is_none() {
                return Ok(0.0);
            }
            let h = v.support(p.normals()[i].as_vector());
            if h <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "facet {i} passes through the origin"
                )));
            }
            Ok(q * cq[i] / h)
        })
        .collect()
}

/// Largest relative discrepancy between the atoms of `C_q(phi P, phi Q, .)`
/// computed directly and the pushforward of `C_q(P, Q, .)` along
/// `u -> phi^{-T} u / |phi^{-T} u|`.
pub fn sl_equivariance_residual(
    p: &HPolytope,
    star: &StarBody,
    q: f64,
    phi: &DMatrix<f64>,
    opts: &MeasureOptions,
) -> Result<f64> {
    let det = phi.determinant();
    if (det - 1.0).abs() > UNIMODULAR_TOL {
        return Err(Error::NotUnimodular { det });
    }
    let base = dual_curvature_measure(p, star, q, 0.0, opts)?;
    let image = dual_curvature_measure(
        &p.transformed(phi)?,
        &transform_star(star, phi)?,
        q,
        0.0,
        opts,
    )?;
    // the facet of phi P with normal index i is the image of F(P, u_i)
    let mut worst = (image.vq - base.vq).abs() / base.vq;
    for (a, b) in image.per_normal_cq.iter().zip(&base.per_normal_cq) {
        let r = if *b > 0.0 {
            (a - b).abs() / b
        } else {
            a.abs() / base.vq
        };
        worst = worst.max(r);
    }
    Ok(worst)
}
