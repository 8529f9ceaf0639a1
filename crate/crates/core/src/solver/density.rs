//! Discretization of densities on the sphere and solving the resulting
//! sequence of discrete problems.

use std::f64::consts::PI;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{solve, solve_normalized, SolveOptions, SolveReport};
use crate::error::{Error, Result};
use crate::polytope::{validate_measure, DirectionWeightMeasure, HPolytope, Simplex, UnitVector};
use crate::quadrature::{gauss_legendre, integrate};
use crate::sphere::{direction_grid, IcoGrid};
use crate::star::StarBody;

/// Directions used for support-function distances.
const DISTANCE_GRID: usize = 10_000;

/// A nonnegative density on `S^{n-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Density {
    Constant {
        value: f64,
    },
    /// `f(u) = value + <gradient, u>`.
    Affine {
        value: f64,
        gradient: Vec<f64>,
    },
    /// One value per cell of the partition at the matching resolution.
    Cells {
        values: Vec<f64>,
    },
}

impl Density {
    pub fn eval(&self, u: &[f64]) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Affine { value, gradient } => {
                value + gradient.iter().zip(u).map(|(a, b)| a * b).sum::<f64>()
            }
            Self::Cells { .. } => f64::NAN,
        }
    }
}

/// A cell of the sphere partition: its spherical centroid direction and the
/// integral of the density over it.
struct Cell {
    direction: DVector<f64>,
    mass: f64,
}

fn arc_cells(f: &Density, m: usize) -> Result<Vec<Cell>> {
    let (nodes, weights) = gauss_legendre(20);
    let width = 2.0 * PI / m as f64;
    (0..m)
        .map(|j| {
            let a0 = width * j as f64;
            let mass = match f {
                Density::Cells { values } => values[j] * width,
                _ => nodes
                    .iter()
                    .zip(&weights)
                    .map(|(s, w)| {
                        let a = a0 + width * s;
                        w * width * f.eval(&[a.cos(), a.sin()])
                    })
                    .sum(),
            };
            let mid = a0 + width / 2.0;
            Ok(Cell {
                direction: DVector::from_vec(vec![mid.cos(), mid.sin()]),
                mass,
            })
        })
        .collect()
}

fn geodesic_cells(f: &Density, level: usize) -> Result<Vec<Cell>> {
    let grid = IcoGrid::new(level);
    grid.faces()
        .par_iter()
        .enumerate()
        .map(|(j, face)| {
            let pts: Vec<DVector<f64>> = face
                .iter()
                .map(|&v| DVector::from_column_slice(grid.vertices()[v].as_slice()))
                .collect();
            // plane distance of the flat triangle; radial projection has Jacobian h / |x|^3
            let normal = (&pts[1] - &pts[0]).cross(&(&pts[2] - &pts[0])).normalize();
            let h = normal.dot(&pts[0]);
            let tri = [Simplex::new(pts)];
            let dens = |x: &[f64]| {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                h / (r * r * r)
            };
            let area = integrate(&tri, &dens, 1e-13)?.value;
            let mut centroid = [0.0; 3];
            for (i, c) in centroid.iter_mut().enumerate() {
                // shifted by 2 so that the relative target stays meaningful near zero
                let shifted = |x: &[f64]| {
                    dens(x) * (x[i] / x.iter().map(|v| v * v).sum::<f64>().sqrt() + 2.0)
                };
                *c = integrate(&tri, &shifted, 1e-13)?.value - 2.0 * area;
            }
            let mass = match f {
                Density::Cells { values } => values[j] * area,
                _ => {
                    integrate(
                        &tri,
                        &|x: &[f64]| {
                            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                            let u: Vec<f64> = x.iter().map(|v| v / r).collect();
                            dens(x) * f.eval(&u)
                        },
                        1e-13,
                    )?
                    .value
                }
            };
            Ok(Cell {
                direction: DVector::from_column_slice(&centroid).normalize(),
                mass,
            })
        })
        .collect()
}

/// Number of cells of the partition at `resolution`: arcs for `n = 2`,
/// icosahedral triangles at subdivision level `resolution` for `n = 3`.
pub fn cell_count(n: usize, resolution: usize) -> usize {
    match n {
        2 => resolution,
        _ => 20 * 4usize.pow(resolution as u32),
    }
}

/// Discrete measure with one atom per cell, at the cell's spherical centroid.
/// Cells of zero mass are dropped.
pub fn discretize_density(
    f: &Density,
    n: usize,
    resolution: usize,
) -> Result<DirectionWeightMeasure> {
    if let Density::Affine { gradient, .. } = f {
        if gradient.len() != n {
            return Err(Error::InvalidInput(format!(
                "gradient of length {} in dimension {n}",
                gradient.len()
            )));
        }
    }
    if let Density::Cells { values } = f {
        if values.len() != cell_count(n, resolution) {
            return Err(Error::InvalidInput(format!(
                "{} cell values for {} cells",
                values.len(),
                cell_count(n, resolution)
            )));
        }
    }
    let cells = match n {
        2 if resolution >= 3 => arc_cells(f, resolution)?,
        2 => return Err(Error::InvalidInput("need at least 3 arcs".into())),
        3 => geodesic_cells(f, resolution)?,
        _ => {
            return Err(Error::InvalidInput(format!(
                "densities are supported for n = 2, 3, got {n}"
            )))
        }
    };
    if cells.iter().any(|c| !(c.mass >= 0.0 && c.mass.is_finite())) {
        return Err(Error::InvalidInput(
            "density must be nonnegative and finite".into(),
        ));
    }
    let (normals, weights): (Vec<UnitVector>, Vec<f64>) = cells
        .into_iter()
        .filter(|c| c.mass > 0.0)
        .map(|c| UnitVector::new(c.direction).map(|u| (u, c.mass)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    if normals.len() <= n {
        return Err(Error::DegenerateDensity);
    }
    let mu = DirectionWeightMeasure::new(normals, weights)?;
    if !validate_measure(&mu).valid {
        return Err(Error::DegenerateDensity);
    }
    Ok(mu)
}

#[derive(Clone, Debug)]
pub struct DensityRun {
    pub resolution: usize,
    pub measure: DirectionWeightMeasure,
    pub polytope: HPolytope,
    pub report: SolveReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensitySummary {
    pub resolutions: Vec<usize>,
    /// Support-function sup-norm distance between consecutive solutions.
    pub successive_distances: Vec<f64>,
    /// Worst relative per-cell mismatch in the weak Monge-Ampere equation
    /// (ball `Q` only).
    pub monge_ampere_residuals: Option<Vec<f64>>,
}

/// Sup over a fixed direction grid of `|h_P - h_K|`.
pub fn support_distance(a: &HPolytope, b: &HPolytope) -> f64 {
    direction_grid(a.dim(), DISTANCE_GRID)
        .iter()
        .map(|u| (a.support(u) - b.support(u)).abs())
        .fold(0.0, f64::max)
}

/// Worst relative mismatch between `area(F_i)` and
/// `n h_i^(p-1) (|x_i| / R)^(n-q) alpha_i` with `x_i` the facet centroid and
/// `R` the radius of `Q`.
fn monge_ampere_residual(
    poly: &HPolytope,
    mu: &DirectionWeightMeasure,
    p: f64,
    q: f64,
    radius: f64,
) -> f64 {
    let n = poly.dim() as f64;
    mu.weights()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let Some(facet) = poly.h_to_v().facet_of_normal(i) else {
                return f64::INFINITY;
            };
            let mut centroid = DVector::zeros(poly.dim());
            for s in &facet.simplices {
                centroid += s.centroid() * s.volume();
            }
            centroid /= facet.area;
            let rhs =
                n * poly.offsets()[i].powf(p - 1.0) * (centroid.norm() / radius).powf(n - q) * a;
            (facet.area - rhs).abs() / rhs
        })
        .fold(0.0, f64::max)
}

/// Discretizes `f` at each resolution and solves the discrete problems
/// (the normalized one when `p = q`).
pub fn solve_density(
    f: &Density,
    star: &StarBody,
    n: usize,
    p: f64,
    q: f64,
    resolutions: &[usize],
    opts: &SolveOptions,
) -> Result<(Vec<DensityRun>, DensitySummary)> {
    if resolutions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("resolutions must increase".into()));
    }
    let runs: Vec<DensityRun> = resolutions
        .par_iter()
        .map(|&res| {
            let mu = discretize_density(f, n, res)?;
            let (polytope, report) = if p == q {
                solve_normalized(&mu, star, p, q, opts)?
            } else {
                solve(&mu, star, p, q, opts)?
            };
            Ok(DensityRun {
                resolution: res,
                measure: mu,
                polytope,
                report,
            })
        })
        .collect::<Result<_>>()?;
    let successive_distances = runs
        .windows(2)
        .map(|w| support_distance(&w[0].polytope, &w[1].polytope))
        .collect();
    let monge_ampere_residuals = match star {
        StarBody::Ball { radius } => Some(
            runs.iter()
                .map(|r| monge_ampere_residual(&r.polytope, &r.measure, p, q, *radius))
                .collect(),
        ),
        _ => None,
    };
    let summary = DensitySummary {
        resolutions: resolutions.to_vec(),
        successive_distances,
        monge_ampere_residuals,
    };
    Ok((runs, summary))
}
