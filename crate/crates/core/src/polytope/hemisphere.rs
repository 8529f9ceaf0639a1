use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::UnitVector;
use crate::error::{Error, Result};

/// Minimum chordal distance between two atoms of a measure.
const MIN_SEPARATION: f64 = 1e-9;
const LP_TOL: f64 = 1e-10;

/// A finite measure on the sphere: atoms `alpha_i` at directions `u_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionWeightMeasure {
    normals: Vec<UnitVector>,
    weights: Vec<f64>,
}

impl DirectionWeightMeasure {
    pub fn new(normals: Vec<UnitVector>, weights: Vec<f64>) -> Result<Self> {
        if normals.is_empty() || normals.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} normals but {} weights",
                normals.len(),
                weights.len()
            )));
        }
        let n = normals[0].dim();
        if normals.iter().any(|u| u.dim() != n) {
            return Err(Error::InvalidInput("normals of mixed dimension".into()));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidInput(format!("weight {i} is not positive")));
        }
        for i in 0..normals.len() {
            for j in 0..i {
                if (normals[i].as_vector() - normals[j].as_vector()).norm() <= MIN_SEPARATION {
                    return Err(Error::InvalidInput(format!("normals {j} and {i} coincide")));
                }
            }
        }
        Ok(Self { normals, weights })
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

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Outcome of the closed-hemisphere test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HemisphereCheck {
    pub valid: bool,
    /// `w != 0` with `<u_i, w> <= 0` for every atom, when `valid` is false.
    pub witness: Option<UnitVector>,
}

/// Tests whether the measure is concentrated on a closed hemisphere.
pub fn validate_measure(mu: &DirectionWeightMeasure) -> HemisphereCheck {
    match positively_spanning(mu.normals()) {
        None => HemisphereCheck {
            valid: true,
            witness: None,
        },
        Some(w) => HemisphereCheck {
            valid: false,
            witness: Some(w),
        },
    }
}

/// Returns a closed-hemisphere witness `w` (all `<u_i, w> <= 0`), or `None`
/// when the directions positively span the whole space.
///
/// First solves `min s` subject to `<u_i, w> <= s`, `|w_j| <= 1`. A positive
/// optimum means no witness exists. When the optimum is zero the minimizer may
/// be `w = 0`, so each coordinate of the cone `{<u_i, w> <= 0}` is probed.
pub fn positively_spanning(normals: &[UnitVector]) -> Option<UnitVector> {
    let n = normals[0].dim();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let s = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    let w: Vec<_> = (0..n).map(|_| lp.add_var(0.0, (-1.0, 1.0))).collect();
    for u in normals {
        let mut row: Vec<_> = w.iter().zip(u.as_slice()).map(|(v, c)| (*v, *c)).collect();
        row.push((s, -1.0));
        lp.add_constraint(row.as_slice(), ComparisonOp::Le, 0.0);
    }
    let sol = lp.solve().ok()?;
    if sol.objective() > LP_TOL {
        return None;
    }
    let cand = DVector::from_iterator(n, w.iter().map(|v| sol[*v]));
    if let Some(u) = accept_witness(normals, cand) {
        return Some(u);
    }

    for j in 0..n {
        for sign in [1.0, -1.0] {
            let mut lp = Problem::new(OptimizationDirection::Maximize);
            let w: Vec<_> = (0..n)
                .map(|i| lp.add_var(if i == j { sign } else { 0.0 }, (-1.0, 1.0)))
                .collect();
            for u in normals {
                let row: Vec<_> = w.iter().zip(u.as_slice()).map(|(v, c)| (*v, *c)).collect();
                lp.add_constraint(row.as_slice(), ComparisonOp::Le, 0.0);
            }
            if let Ok(sol) = lp.solve() {
                if sol.objective() > LP_TOL {
                    let cand = DVector::from_iterator(n, w.iter().map(|v| sol[*v]));
                    if let Some(u) = accept_witness(normals, cand) {
                        return Some(u);
                    }
                }
            }
        }
    }
    None
}

fn accept_witness(normals: &[UnitVector], w: DVector<f64>) -> Option<UnitVector> {
    if w.norm() <= 1e-9 {
        return None;
    }
    let w = UnitVector::new(w).ok()?;
    normals
        .iter()
        .all(|u| u.dot(w.as_vector()) <= 1e-9)
        .then_some(w)
}
