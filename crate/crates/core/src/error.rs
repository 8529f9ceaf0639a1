use thiserror::Error;

/// Errors produced by the geometry kernel, the measure evaluators and the solver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("polytope has empty interior")]
    EmptyInterior,

    #[error("halfspace intersection is unbounded (normals do not positively span R^{dim})")]
    Unbounded { dim: usize },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("radial function must be positive (got {value} at sample {index})")]
    NonPositiveRadial { index: usize, value: f64 },

    #[error("linear map is not unimodular (det = {det})")]
    NotUnimodular { det: f64 },

    #[error("quadrature did not converge: error estimate {estimate:e} exceeds {target:e}")]
    QuadratureNotConverged { estimate: f64, target: f64 },

    #[error("offset {index} exceeds its support value by {excess:e}")]
    TightnessViolated { index: usize, excess: f64 },

    #[error("measure is concentrated on a closed hemisphere (witness {witness:?})")]
    MeasureOnHemisphere { witness: Vec<f64> },

    #[error(
        "solver did not converge after {iterations} iterations (KKT residual {kkt_residual:e})"
    )]
    NotConverged {
        iterations: usize,
        kkt_residual: f64,
    },

    #[error("facet {index} collapsed to the offset floor for {steps} consecutive steps")]
    FacetCollapse { index: usize, steps: usize },

    #[error("p equals q: rescaling is undefined, use the normalized problem")]
    PEqualsQ,

    #[error("discretized density is concentrated on a closed hemisphere")]
    DegenerateDensity,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
