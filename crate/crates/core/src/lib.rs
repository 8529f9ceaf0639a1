//! Numerical solver for the discrete L_p dual Minkowski problem.
//!
//! Given a finite measure `mu = sum alpha_i delta_{u_i}` on the unit sphere,
//! a star body `Q` and exponents `p > 1`, `q > 0`, [`solve`] finds a polytope
//! `P = {x : <x, u_i> <= t_i}` whose `L_p` dual curvature measure
//! `C_{p,q}(P, Q, .)` equals `mu`. Dual curvature measures are computed by
//! facet quadrature ([`dual_curvature_measure`]) and can be cross-checked by
//! Monte-Carlo estimates ([`mc_dual_curvature`]).

pub mod dual;
pub mod error;
pub mod io;
pub mod oracle;
pub mod polytope;
pub mod quadrature;
pub mod solver;
pub mod sphere;
pub mod star;

pub use dual::{
    ball_dual_intrinsic_volume, dual_curvature_measure, dual_intrinsic_volume,
    sl_equivariance_residual, vq_gradient, DualMeasureResult, MeasureOptions,
};
pub use error::{Error, Result};
pub use oracle::{mc_dual_curvature, mc_dual_intrinsic_volume, McEstimate};
pub use polytope::{
    build_hpolytope, origin_diagnostics, positively_spanning, radial_and_facet, support,
    validate_measure, DirectionWeightMeasure, HPolytope, HemisphereCheck, OriginDiagnostics,
    UnitVector, VPolytope,
};
pub use solver::{
    discretize_density, rescale_solution, solve, solve_density, solve_normalized, Density,
    SolveOptions, SolveReport,
};
pub use star::{gauge, radial_q, transform_star, RadialTable, StarBody};
