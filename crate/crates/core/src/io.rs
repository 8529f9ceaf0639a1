//! JSON documents exchanged by the command-line tool (schema `dmk/1`).

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dual::DualMeasureResult;
use crate::error::{Error, Result};
use crate::oracle::McEstimate;
use crate::polytope::{DirectionWeightMeasure, HPolytope, UnitVector};
use crate::solver::{Density, SolveOptions, SolveReport};
use crate::star::{RadialTable, StarBody};

pub const SCHEMA: &str = "dmk/1";

fn schema() -> String {
    SCHEMA.to_string()
}

/// Parses a document, reporting the line and column of schema violations.
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| {
        Error::InvalidInput(format!("line {}, column {}: {e}", e.line(), e.column()))
    })?;
    if let Some(tag) = value.get("schema") {
        if tag != SCHEMA {
            return Err(Error::InvalidInput(format!(
                "unsupported schema {tag}, expected \"{SCHEMA}\""
            )));
        }
    }
    serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("line {}, column {}: {e}", e.line(), e.column())))
}

/// SHA-256 of the document with object keys sorted and whitespace removed.
pub fn canonical_hash(text: &str) -> Result<String> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| {
        Error::InvalidInput(format!("line {}, column {}: {e}", e.line(), e.column()))
    })?;
    let canonical = serde_json::to_string(&value).expect("JSON values serialize");
    Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
}

fn unit_vectors(rows: &[Vec<f64>]) -> Result<Vec<UnitVector>> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            UnitVector::from_slice(r).map_err(|e| Error::InvalidInput(format!("normals[{i}]: {e}")))
        })
        .collect()
}

fn rows(vs: &[UnitVector]) -> Vec<Vec<f64>> {
    vs.iter().map(|u| u.as_slice().to_vec()).collect()
}

fn matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput(
            "matrix must be square and nonempty".into(),
        ));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Halfspace description `{x : <x, u_i> <= t_i}`; normals are normalized on read.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolytopeDoc {
    #[serde(default = "schema")]
    pub schema: String,
    pub normals: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
}

impl PolytopeDoc {
    pub fn build(&self) -> Result<HPolytope> {
        HPolytope::new(unit_vectors(&self.normals)?, self.offsets.clone())
    }

    pub fn from_polytope(p: &HPolytope) -> Self {
        Self {
            schema: schema(),
            normals: rows(p.normals()),
            offsets: p.offsets().to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureDoc {
    #[serde(default = "schema")]
    pub schema: String,
    pub normals: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl MeasureDoc {
    pub fn build(&self) -> Result<DirectionWeightMeasure> {
        DirectionWeightMeasure::new(unit_vectors(&self.normals)?, self.weights.clone())
    }

    pub fn from_measure(mu: &DirectionWeightMeasure) -> Self {
        Self {
            schema: schema(),
            normals: rows(mu.normals()),
            weights: mu.weights().to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StarBodyDesc {
    Ball {
        radius: f64,
    },
    /// `{x : x^T A^{-1} x <= 1}`.
    Ellipsoid {
        matrix: Vec<Vec<f64>>,
    },
    Polytope {
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
    },
    PlanarTable {
        angles: Vec<f64>,
        values: Vec<f64>,
    },
    GeodesicTable {
        level: usize,
        values: Vec<f64>,
    },
    /// Image of `base` under the matrix `map`.
    Linear {
        base: Box<StarBodyDesc>,
        map: Vec<Vec<f64>>,
    },
}

impl Default for StarBodyDesc {
    fn default() -> Self {
        Self::Ball { radius: 1.0 }
    }
}

impl StarBodyDesc {
    pub fn build(&self) -> Result<StarBody> {
        match self {
            Self::Ball { radius } => StarBody::ball(*radius),
            Self::Ellipsoid { matrix: m } => StarBody::ellipsoid(matrix(m)?),
            Self::Polytope { normals, offsets } => {
                StarBody::polytope_gauge(HPolytope::new(unit_vectors(normals)?, offsets.clone())?)
            }
            Self::PlanarTable { angles, values } => Ok(StarBody::radial_table(
                RadialTable::planar(angles.clone(), values.clone())?,
            )),
            Self::GeodesicTable { level, values } => Ok(StarBody::radial_table(
                RadialTable::geodesic(*level, values.clone())?,
            )),
            Self::Linear { base, map } => {
                let phi = matrix(map)?;
                let base = base.build()?;
                if let Some(n) = base.dim() {
                    if n != phi.nrows() {
                        return Err(Error::InvalidInput(
                            "linear map does not match the base dimension".into(),
                        ));
                    }
                }
                crate::star::transform_star(&base, &phi)
            }
        }
    }

    /// Parses `ball:R`, `ellipsoid:a1,...,an` (diagonal semi-axes) or
    /// `cube:n:s` (the cube `[-s, s]^n`).
    pub fn parse_shorthand(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("cannot parse star body '{s}'"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "ball" => Ok(Self::Ball { radius: num(rest)? }),
            "ellipsoid" => {
                let axes = rest.split(',').map(num).collect::<Result<Vec<_>>>()?;
                let n = axes.len();
                let matrix = (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| if i == j { axes[i] * axes[i] } else { 0.0 })
                            .collect()
                    })
                    .collect();
                Ok(Self::Ellipsoid { matrix })
            }
            "cube" => {
                let (n, side) = rest.split_once(':').ok_or_else(bad)?;
                let n: usize = n.trim().parse().map_err(|_| bad())?;
                let side = num(side)?;
                let mut normals = Vec::new();
                for i in 0..n {
                    for sign in [1.0, -1.0] {
                        let mut v = vec![0.0; n];
                        v[i] = sign;
                        normals.push(v);
                    }
                }
                Ok(Self::Polytope {
                    normals,
                    offsets: vec![side; 2 * n],
                })
            }
            _ => Err(bad()),
        }
    }
}

/// Either explicit atoms or a density discretized at one or more resolutions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureSpec {
    Discrete {
        normals: Vec<Vec<f64>>,
        weights: Vec<f64>,
    },
    Density {
        density: Density,
        resolutions: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    #[serde(default = "schema")]
    pub schema: String,
    pub dimension: usize,
    pub p: f64,
    pub q: f64,
    pub measure: MeasureSpec,
    #[serde(default)]
    pub star_body: StarBodyDesc,
    #[serde(default)]
    pub options: SolveOptions,
}

impl ProblemSpec {
    /// The discrete measure; densities use their finest resolution.
    pub fn discrete_measure(&self) -> Result<DirectionWeightMeasure> {
        let mu = match &self.measure {
            MeasureSpec::Discrete { normals, weights } => {
                DirectionWeightMeasure::new(unit_vectors(normals)?, weights.clone())?
            }
            MeasureSpec::Density {
                density,
                resolutions,
            } => {
                let res = resolutions
                    .iter()
                    .copied()
                    .max()
                    .ok_or_else(|| Error::InvalidInput("empty resolution list".into()))?;
                crate::solver::discretize_density(density, self.dimension, res)?
            }
        };
        if mu.dim() != self.dimension {
            return Err(Error::InvalidInput(format!(
                "measure lives in dimension {}, problem declares {}",
                mu.dim(),
                self.dimension
            )));
        }
        Ok(mu)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualMeasureDoc {
    #[serde(default = "schema")]
    pub schema: String,
    pub p: f64,
    pub q: f64,
    pub rtol: f64,
    #[serde(flatten)]
    pub result: DualMeasureResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionDoc {
    #[serde(default = "schema")]
    pub schema: String,
    pub tool_version: String,
    pub input_hash: String,
    pub dimension: usize,
    pub p: f64,
    pub q: f64,
    /// Solution of the normalized problem `V_q^{-1} C_{p,q} = mu`.
    pub normalized: bool,
    pub normals: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
    pub vertices: Vec<Vec<f64>>,
    pub per_normal_cq: Vec<f64>,
    pub per_normal_cpq: Vec<Option<f64>>,
    pub vq: f64,
    /// Relative accuracy of the stored atoms.
    pub rtol: f64,
    pub report: SolveReport,
}

impl SolutionDoc {
    pub fn polytope(&self) -> PolytopeDoc {
        PolytopeDoc {
            schema: schema(),
            normals: self.normals.clone(),
            offsets: self.offsets.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McDoc {
    #[serde(default = "schema")]
    pub schema: String,
    pub q: f64,
    pub samples: usize,
    pub seed: u64,
    pub vq: McEstimate,
    pub atoms: Vec<McEstimate>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_key_order_and_whitespace() {
        let a = canonical_hash(r#"{"b": 1, "a": [1, 2]}"#).unwrap();
        let b = canonical_hash(r#"{"a":[1,2],"b":1}"#).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, canonical_hash(r#"{"a":[1,2],"b":2}"#).unwrap());
    }

    #[test]
    fn schema_violations_carry_positions() {
        let err = from_json::<MeasureDoc>("{\n  \"normals\": [[1, 0]],\n  \"weights\": \"x\"\n}")
            .unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = from_json::<MeasureDoc>(r#"{"schema": "dmk/0", "normals": [], "weights": []}"#)
            .unwrap_err();
        assert!(err.to_string().contains("unsupported schema"));
    }

    #[test]
    fn problem_with_defaults() {
        let spec: ProblemSpec = from_json(
            r#"{"dimension": 2, "p": 3, "q": 2,
                "measure": {"normals": [[1,0],[-1,0],[0,1],[0,-1]], "weights": [0.5,0.5,0.5,0.5]}}"#,
        )
        .unwrap();
        assert_eq!(spec.star_body, StarBodyDesc::Ball { radius: 1.0 });
        assert_eq!(spec.options, SolveOptions::default());
        assert_eq!(spec.discrete_measure().unwrap().len(), 4);
        let spec: ProblemSpec = from_json(
            r#"{"dimension": 2, "p": 3, "q": 2,
                "measure": {"density": {"family": "constant", "value": 0.5}, "resolutions": [8, 16]},
                "star_body": {"type": "ellipsoid", "matrix": [[4, 0], [0, 1]]},
                "options": {"max_iters": 100}}"#,
        )
        .unwrap();
        assert_eq!(spec.discrete_measure().unwrap().len(), 16);
        assert_eq!(spec.options.max_iters, 100);
        assert!(spec.star_body.build().is_ok());
    }

    #[test]
    fn shorthands() {
        assert_eq!(
            StarBodyDesc::parse_shorthand("ball:2").unwrap(),
            StarBodyDesc::Ball { radius: 2.0 }
        );
        let e = StarBodyDesc::parse_shorthand("ellipsoid:2,1")
            .unwrap()
            .build()
            .unwrap();
        assert!((e.radial(&[1.0, 0.0]) - 2.0).abs() < 1e-12);
        let c = StarBodyDesc::parse_shorthand("cube:3:1")
            .unwrap()
            .build()
            .unwrap();
        assert!((c.gauge(&[0.5, -2.0, 1.0]) - 2.0).abs() < 1e-12);
        assert!(StarBodyDesc::parse_shorthand("torus:1").is_err());
    }
}
