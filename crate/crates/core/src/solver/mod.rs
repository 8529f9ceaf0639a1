//! Solver for the discrete `L_p` dual Minkowski problem.
//!
//! Given `mu = sum alpha_i delta_{u_i}`, maximize `Psi(z) = V_q(P(z), Q)` on
//! `Z = {z >= 0 : Phi(z) = sum alpha_i z_i^p = 1}`. At a maximizer the
//! Lagrange condition reads `C_q(P, Q, {u_i}) = Psi * alpha_i * z_i^p`, which
//! makes `P(z)` a solution of the normalized problem. A final dilation
//! produces a solution of `C_{p,q}(P, Q, .) = mu` when `p != q`.
//!
//! The ascent works in `w = log z`. The search direction is the tangential
//! gradient preconditioned by `1 / (alpha_i z_i^p)`, which reduces to the
//! relative atom mismatch `r_i = C_i / (Psi alpha_i z_i^p) - 1`. Steps are
//! Barzilai-Borwein guesses safeguarded by Armijo backtracking on `Psi`.

mod density;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dual::{dual_curvature_measure, MeasureOptions};
use crate::error::{Error, Result};
use crate::polytope::{validate_measure, DirectionWeightMeasure, HPolytope, OriginDiagnostics};
use crate::star::StarBody;

pub use density::{discretize_density, solve_density, Density, DensityRun, DensitySummary};

/// Steps at the offset floor tolerated before reporting a collapse.
const COLLAPSE_STEPS: usize = 50;
/// Largest change of any `log z_i` in one step.
const MAX_LOG_STEP: f64 = 0.5;
/// Backtracking attempts per iteration.
const MAX_BACKTRACK: usize = 40;
/// Newton steps are tried once the KKT residual falls below this.
const NEWTON_KKT: f64 = 1e-3;
/// Iterations without a Newton attempt after one fails.
const NEWTON_PAUSE: usize = 10;
/// Backtracking attempts for a Newton step.
const NEWTON_BACKTRACK: usize = 8;
/// Difference step in `log z` for the Jacobian.
const NEWTON_STEP: f64 = 1e-6;
/// Newton corrections applied after the ascent stops.
const POLISH_STEPS: usize = 3;
/// Required KKT reduction for a step that does not increase `Psi`.
const FLOOR_DECREASE: f64 = 0.9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Stop once the KKT residual is at most this value.
    pub grad_tol: f64,
    pub armijo_c: f64,
    pub armijo_shrink: f64,
    pub offset_floor: f64,
    /// Relative accuracy of each facet integral.
    pub rtol: f64,
    /// Recorded for reproducibility; the ascent itself is deterministic.
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            grad_tol: 1e-8,
            armijo_c: 1e-4,
            armijo_shrink: 0.5,
            offset_floor: 1e-10,
            rtol: 1e-11,
            seed: 0,
        }
    }
}

impl SolveOptions {
    fn check(&self) -> Result<()> {
        let positive = [
            self.grad_tol,
            self.armijo_c,
            self.armijo_shrink,
            self.offset_floor,
            self.rtol,
        ]
        .iter()
        .all(|v| *v > 0.0 && v.is_finite());
        if !positive
            || self.max_iters == 0
            || self.grad_tol >= 1.0
            || self.armijo_c >= 1.0
            || self.armijo_shrink >= 1.0
        {
            return Err(Error::InvalidInput(format!(
                "invalid solve options {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Newton corrections of the Lagrange equation after the ascent stopped;
    /// these are not recorded in the trace.
    #[serde(default)]
    pub polish_steps: usize,
    /// `Psi` after every accepted step, starting from the initial point.
    pub objective_trace: Vec<f64>,
    pub kkt_residual: f64,
    /// Least-squares multiplier in `lambda C_i / z_i = alpha_i z_i^(p-1)`.
    pub lagrange_lambda: f64,
    /// Dilation from `P(z*)` to the normalized solution; 1 at an exact optimum.
    pub lambda0: f64,
    /// Dilation from the normalized to the final solution (1 when not applied).
    pub final_rescale: f64,
    /// `|C_{p,q}(P, Q, {u_i}) - alpha_i| / alpha_i`, normalized by `V_q(P, Q)`
    /// for the normalized problem.
    pub residuals: Vec<f64>,
    pub origin: OriginDiagnostics,
    pub warnings: Vec<String>,
    pub seed: u64,
}

impl SolveReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// A normalized iterate with everything derived from it.
struct Iterate {
    z: Vec<f64>,
    poly: HPolytope,
    cq: Vec<f64>,
    psi: f64,
    /// `C_i / (Psi alpha_i z_i^p) - 1`.
    r: Vec<f64>,
}

struct Problem<'a> {
    mu: &'a DirectionWeightMeasure,
    star: &'a StarBody,
    p: f64,
    q: f64,
    measure: MeasureOptions,
    floor: f64,
}

impl Problem<'_> {
    fn phi(&self, z: &[f64]) -> f64 {
        self.mu
            .weights()
            .iter()
            .zip(z)
            .map(|(a, t)| a * t.powf(self.p))
            .sum()
    }

    fn normalize(&self, z: &mut [f64]) {
        let c = self.phi(z).powf(-1.0 / self.p);
        z.iter_mut().for_each(|t| *t *= c);
    }

    /// Snaps offsets to the support values, renormalizes and evaluates.
    fn evaluate(&self, mut z: Vec<f64>) -> Result<Iterate> {
        self.normalize(&mut z);
        let raw = HPolytope::new(self.mu.normals().to_vec(), z.clone())?;
        let v = raw.h_to_v();
        let mut snapped = false;
        for (t, u) in z.iter_mut().zip(self.mu.normals()) {
            let h = v.support(u.as_vector()).max(self.floor);
            if h < *t {
                *t = h;
                snapped = true;
            }
        }
        let poly = if snapped {
            self.normalize(&mut z);
            HPolytope::new(self.mu.normals().to_vec(), z.clone())?
        } else {
            raw
        };
        let cq =
            dual_curvature_measure(&poly, self.star, self.q, self.p, &self.measure)?.per_normal_cq;
        let psi = crate::quadrature::pairwise_sum(&cq);
        let r = cq
            .iter()
            .zip(&z)
            .zip(self.mu.weights())
            .map(|((c, t), a)| c / (psi * a * t.powf(self.p)) - 1.0)
            .collect();
        Ok(Iterate {
            z,
            poly,
            cq,
            psi,
            r,
        })
    }

    /// Least-squares `lambda` in `lambda C_i / z_i = alpha_i z_i^(p-1)` and
    /// the worst relative mismatch of that equation.
    fn kkt(&self, it: &Iterate) -> (f64, f64) {
        let a: Vec<f64> = it.cq.iter().zip(&it.z).map(|(c, t)| c / t).collect();
        let b: Vec<f64> = self
            .mu
            .weights()
            .iter()
            .zip(&it.z)
            .map(|(w, t)| w * t.powf(self.p - 1.0))
            .collect();
        let num: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        let den: f64 = a.iter().map(|x| x * x).sum();
        let lambda = num / den;
        let worst = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (lambda * x - y).abs() / y)
            .fold(0.0, f64::max);
        (lambda, worst)
    }

    /// `d Psi / d eta` along `w + eta r`.
    fn slope(&self, it: &Iterate) -> f64 {
        self.q * it.cq.iter().zip(&it.r).map(|(c, r)| c * r).sum::<f64>()
    }

    /// Newton direction for `r(w) = 0` in the tangent space, with the
    /// Jacobian of `r` from forward differences.
    fn newton_direction(&self, it: &Iterate) -> Result<Option<Vec<f64>>> {
        let k = it.z.len();
        let cols = (0..k)
            .into_par_iter()
            .map(|j| {
                let mut z = it.z.clone();
                z[j] *= NEWTON_STEP.exp();
                let e = self.evaluate(z)?;
                Ok(e.r
                    .iter()
                    .zip(&it.r)
                    .map(|(a, b)| (a - b) / NEWTON_STEP)
                    .collect::<Vec<f64>>())
            })
            .collect::<Result<Vec<_>>>()?;
        let jac = DMatrix::from_fn(k, k, |i, j| cols[j][i]);
        let rhs = DVector::from_iterator(k, it.r.iter().map(|v| -v));
        let svd = jac.svd(true, true);
        let eps = 1e-10 * svd.singular_values.max();
        let Ok(d) = svd.solve(&rhs, eps) else {
            return Ok(None);
        };
        let wz: Vec<f64> = self
            .mu
            .weights()
            .iter()
            .zip(&it.z)
            .map(|(a, t)| a * t.powf(self.p))
            .collect();
        let shift =
            wz.iter().zip(d.iter()).map(|(a, b)| a * b).sum::<f64>() / wz.iter().sum::<f64>();
        let d: Vec<f64> = d.iter().map(|v| v - shift).collect();
        Ok(d.iter().all(|v| v.is_finite()).then_some(d))
    }

    fn shifted(&self, it: &Iterate, d: &[f64], eta: f64) -> Vec<f64> {
        it.z.iter()
            .zip(d)
            .map(|(t, v)| (t * (eta * v).exp()).max(self.floor))
            .collect()
    }

    fn trial(&self, it: &Iterate, eta: f64) -> Vec<f64> {
        it.z.iter()
            .zip(&it.r)
            .map(|(t, r)| (t * (eta * r).exp()).max(self.floor))
            .collect()
    }
}

/// An Armijo-accepted Newton step, if any.
fn newton_step(prob: &Problem, it: &Iterate, armijo_c: f64) -> Result<Option<Iterate>> {
    let Some(d) = prob.newton_direction(it)? else {
        return Ok(None);
    };
    let slope = prob.q * it.cq.iter().zip(&d).map(|(c, v)| c * v).sum::<f64>();
    if slope.is_nan() || slope <= 0.0 {
        return Ok(None);
    }
    let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut eta = (MAX_LOG_STEP / dmax).min(1.0);
    for _ in 0..NEWTON_BACKTRACK {
        let cand = prob.evaluate(prob.shifted(it, &d, eta))?;
        if cand.psi > it.psi && cand.psi >= it.psi + armijo_c * eta * slope {
            return Ok(Some(cand));
        }
        eta *= 0.5;
    }
    Ok(None)
}

/// Ratios `C_{p,q}(P, Q, {u_i}) / alpha_i - 1` in absolute value.
fn residuals(cpq: &[Option<f64>], alpha: &[f64], scale: f64) -> Vec<f64> {
    cpq.iter()
        .zip(alpha)
        .map(|(c, a)| match c {
            Some(c) => (c * scale - a).abs() / a,
            None => f64::INFINITY,
        })
        .collect()
}

/// Solves `V_q(P0, Q)^{-1} C_{p,q}(P0, Q, .) = mu`.
pub fn solve_normalized(
    mu: &DirectionWeightMeasure,
    star: &StarBody,
    p: f64,
    q: f64,
    opts: &SolveOptions,
) -> Result<(HPolytope, SolveReport)> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidInput(format!("p must exceed 1, got {p}")));
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidInput(format!("q must be positive, got {q}")));
    }
    opts.check()?;
    star.check_dim(mu.dim())?;
    let check = validate_measure(mu);
    if !check.valid {
        let witness = check
            .witness
            .map(|w| w.as_slice().to_vec())
            .unwrap_or_default();
        return Err(Error::MeasureOnHemisphere { witness });
    }
    let prob = Problem {
        mu,
        star,
        p,
        q,
        measure: MeasureOptions::with_rtol(opts.rtol),
        floor: opts.offset_floor,
    };

    let k = mu.len();
    let mut it = prob.evaluate(vec![1.0; k])?;
    let mut trace = vec![it.psi];
    let (mut lambda, mut kkt) = prob.kkt(&it);
    let mut eta = 1.0 / q.max(1.0);
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut at_floor = vec![0usize; k];
    let mut warnings = Vec::new();
    let mut iterations = 0;
    let mut stalled = false;
    let mut newton_after = 0;

    while kkt > opts.grad_tol && iterations < opts.max_iters {
        iterations += 1;
        // Barzilai-Borwein guess from the last accepted step
        if let Some((s, y)) = &prev {
            let ss: f64 = s.iter().map(|v| v * v).sum();
            let sy: f64 = s.iter().zip(y).map(|(a, b)| a * b).sum();
            if sy < 0.0 {
                eta = -ss / sy;
            } else {
                eta *= 2.0;
            }
        }
        let rmax = it.r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        eta = eta.min(MAX_LOG_STEP / rmax);
        let slope = prob.slope(&it);

        let mut accepted = None;
        if kkt < NEWTON_KKT && iterations >= newton_after {
            accepted = newton_step(&prob, &it, opts.armijo_c)?;
            if accepted.is_none() {
                newton_after = iterations + NEWTON_PAUSE;
            }
        }
        for _ in 0..MAX_BACKTRACK {
            if accepted.is_some() {
                break;
            }
            let cand = prob.evaluate(prob.trial(&it, eta))?;
            let armijo = cand.psi > it.psi && cand.psi >= it.psi + opts.armijo_c * eta * slope;
            // below the resolution of Psi, progress is judged by the KKT residual
            let floor_ok = cand.psi >= it.psi && prob.kkt(&cand).1 < FLOOR_DECREASE * kkt;
            if armijo || floor_ok {
                accepted = Some(cand);
                break;
            }
            eta *= opts.armijo_shrink;
        }
        let Some(next) = accepted else {
            stalled = true;
            break;
        };

        let s: Vec<f64> = next
            .z
            .iter()
            .zip(&it.z)
            .map(|(a, b)| (a / b).ln())
            .collect();
        let y: Vec<f64> = next.r.iter().zip(&it.r).map(|(a, b)| a - b).collect();
        prev = Some((s, y));
        for (i, t) in next.z.iter().enumerate() {
            if *t <= opts.offset_floor * 1.000001 {
                at_floor[i] += 1;
                if at_floor[i] > COLLAPSE_STEPS {
                    return Err(Error::FacetCollapse {
                        index: i,
                        steps: at_floor[i],
                    });
                }
            } else {
                at_floor[i] = 0;
            }
        }
        trace.push(next.psi);
        it = next;
        (lambda, kkt) = prob.kkt(&it);
    }

    // once Psi no longer resolves progress, correct the Lagrange equation directly
    let mut polish_steps = 0;
    while stalled && kkt > opts.grad_tol && polish_steps < POLISH_STEPS {
        let Some(d) = prob.newton_direction(&it)? else {
            break;
        };
        let cand = prob.evaluate(prob.shifted(&it, &d, 1.0))?;
        let (l, r) = prob.kkt(&cand);
        if r >= kkt {
            break;
        }
        polish_steps += 1;
        (it, lambda, kkt) = (cand, l, r);
    }

    if kkt > opts.grad_tol {
        if stalled && kkt <= 10.0 * opts.grad_tol {
            warnings.push(format!(
                "stopped at the resolution of the objective with KKT residual {kkt:e}"
            ));
        } else {
            return Err(Error::NotConverged {
                iterations,
                kkt_residual: kkt,
            });
        }
    }

    // lambda C_i / z_i = alpha_i z_i^(p-1) at the optimum; dilating by lambda0
    // turns this into V_q^{-1} C_{p,q} = alpha
    let lambda0 = (lambda * it.psi).powf(-1.0 / p);
    let p0 = it.poly.scaled(lambda0);
    let m = dual_curvature_measure(&p0, star, q, p, &prob.measure)?;
    for (i, t) in p0.offsets().iter().enumerate() {
        if p0.h_to_v().facet_of_normal(i).is_none() {
            warnings.push(format!("normal {i} carries no facet (offset {t:e})"));
        }
    }
    let report = SolveReport {
        iterations,
        polish_steps,
        objective_trace: trace,
        kkt_residual: kkt,
        lagrange_lambda: lambda,
        lambda0,
        final_rescale: 1.0,
        residuals: residuals(&m.per_normal_cpq, mu.weights(), 1.0 / m.vq),
        origin: p0.origin_diagnostics(p0.tolerance()),
        warnings,
        seed: opts.seed,
    };
    Ok((p0, report))
}

/// `lambda = V_q(P0, Q)^{-1/(q-p)}`.
fn rescale_factor(p0: &HPolytope, star: &StarBody, p: f64, q: f64, rtol: f64) -> Result<f64> {
    if p == q {
        return Err(Error::PEqualsQ);
    }
    let vq = crate::dual::dual_intrinsic_volume(p0, star, q, &MeasureOptions::with_rtol(rtol))?;
    Ok(vq.powf(-1.0 / (q - p)))
}

/// `lambda P0` with `lambda = V_q(P0, Q)^{-1/(q-p)}`.
pub fn rescale_solution(
    p0: &HPolytope,
    star: &StarBody,
    p: f64,
    q: f64,
    rtol: f64,
) -> Result<HPolytope> {
    Ok(p0.scaled(rescale_factor(p0, star, p, q, rtol)?))
}

/// Solves `C_{p,q}(P, Q, .) = mu` for `p != q`.
pub fn solve(
    mu: &DirectionWeightMeasure,
    star: &StarBody,
    p: f64,
    q: f64,
    opts: &SolveOptions,
) -> Result<(HPolytope, SolveReport)> {
    if p == q {
        return Err(Error::PEqualsQ);
    }
    let (p0, mut report) = solve_normalized(mu, star, p, q, opts)?;
    let lambda = rescale_factor(&p0, star, p, q, opts.rtol)?;
    let poly = p0.scaled(lambda);
    let m = dual_curvature_measure(&poly, star, q, p, &MeasureOptions::with_rtol(opts.rtol))?;
    report.final_rescale = lambda;
    report.residuals = residuals(&m.per_normal_cpq, mu.weights(), 1.0);
    report.origin = poly.origin_diagnostics(poly.tolerance());
    Ok((poly, report))
}

#[cfg(test)]
mod tests;
