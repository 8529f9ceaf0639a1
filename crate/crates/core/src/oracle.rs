//! Monte-Carlo estimates of dual intrinsic volumes and dual curvature atoms.
//!
//! Directions are normalized Gaussian vectors. Sample `j` is drawn from a
//! ChaCha8 stream keyed by `(seed, j / CHUNK)`, so results do not depend on
//! the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::HPolytope;
use crate::quadrature::pairwise_sum;
use crate::sphere::sphere_area;
use crate::star::StarBody;

const CHUNK: usize = 1 << 14;

/// Smallest sample count accepted by the estimators.
pub const MIN_SAMPLES: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    /// Sample standard deviation over `sqrt(samples)`.
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn gaussian_direction(rng: &mut ChaCha8Rng, buf: &mut [f64]) {
    loop {
        for v in buf.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let norm = buf.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-300 {
            buf.iter_mut().for_each(|v| *v /= norm);
            return;
        }
    }
}

/// `count` uniform directions on `S^{n-1}`, reproducible from `seed`.
pub fn sample_sphere(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let chunks = count.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = CHUNK.min(count - c * CHUNK);
            (0..len).map(move |_| {
                let mut u = vec![0.0; n];
                gaussian_direction(&mut rng, &mut u);
                u
            })
        })
        .collect()
}

/// Per-chunk sums of the estimator and of its square for every facet index.
struct Partial {
    sum: Vec<f64>,
    sumsq: Vec<f64>,
}

fn run(p: &HPolytope, star: &StarBody, q: f64, samples: usize, seed: u64) -> Result<Vec<Partial>> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidInput(format!("q must be positive, got {q}")));
    }
    let n = p.dim();
    star.check_dim(n)?;
    let k = p.len();
    let scale = sphere_area(n) / n as f64;
    let chunks = samples.div_ceil(CHUNK);
    Ok((0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let mut u = vec![0.0; n];
            let mut part = Partial {
                sum: vec![0.0; k],
                sumsq: vec![0.0; k],
            };
            for _ in 0..CHUNK.min(samples - c * CHUNK) {
                gaussian_direction(&mut rng, &mut u);
                let (rho, facet) = p.radial_with_facet(&u);
                let x = scale * rho.powf(q) * star.radial(&u).powf(n as f64 - q);
                part.sum[facet] += x;
                part.sumsq[facet] += x * x;
            }
            part
        })
        .collect())
}

fn finish(sum: f64, sumsq: f64, samples: usize, seed: u64) -> McEstimate {
    let m = samples as f64;
    let mean = sum / m;
    let var = ((sumsq - m * mean * mean) / (m - 1.0)).max(0.0);
    McEstimate {
        value: mean,
        stderr: (var / m).sqrt(),
        samples,
        seed,
    }
}

fn column(parts: &[Partial], pick: impl Fn(&Partial) -> f64) -> f64 {
    pairwise_sum(&parts.iter().map(pick).collect::<Vec<_>>())
}

/// Estimate of `V_q(P, Q) = (1/n) integral of rho_P^q rho_Q^(n-q)`.
pub fn mc_dual_intrinsic_volume(
    p: &HPolytope,
    star: &StarBody,
    q: f64,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    let parts = run(p, star, q, samples, seed)?;
    let sum = column(&parts, |c| pairwise_sum(&c.sum));
    let sumsq = column(&parts, |c| pairwise_sum(&c.sumsq));
    Ok(finish(sum, sumsq, samples, seed))
}

/// Estimates of the `C_q(P, Q, .)` atoms, one per halfspace normal; each
/// sample counts toward the facet hit by its ray.
pub fn mc_dual_curvature(
    p: &HPolytope,
    star: &StarBody,
    q: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    let parts = run(p, star, q, samples, seed)?;
    Ok((0..p.len())
        .map(|i| {
            let sum = column(&parts, |c| c.sum[i]);
            let sumsq = column(&parts, |c| c.sumsq[i]);
            finish(sum, sumsq, samples, seed)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::tests::square;
    use crate::polytope::UnitVector;
    use std::f64::consts::PI;

    fn ball() -> StarBody {
        StarBody::ball(1.0).unwrap()
    }

    fn within(e: &McEstimate, target: f64) -> bool {
        (e.value - target).abs() <= 3.0 * e.stderr + 1e-12
    }

    #[test]
    fn square_at_q_two_and_three() {
        let e = mc_dual_intrinsic_volume(&square(1.0), &ball(), 2.0, 200_000, 1).unwrap();
        assert!(within(&e, 4.0), "{e:?}");
        let e = mc_dual_intrinsic_volume(&square(1.0), &ball(), 3.0, 200_000, 2).unwrap();
        assert!(within(&e, 4.591174), "{e:?}");
        for a in mc_dual_curvature(&square(1.0), &ball(), 2.0, 200_000, 3).unwrap() {
            assert!(within(&a, 1.0), "{a:?}");
        }
    }

    #[test]
    fn box_with_origin_on_boundary() {
        let u = |v: &[f64]| UnitVector::from_slice(v).unwrap();
        let p = HPolytope::new(
            vec![
                u(&[1.0, 0.0]),
                u(&[-1.0, 0.0]),
                u(&[0.0, 1.0]),
                u(&[0.0, -1.0]),
            ],
            vec![1.0, 1.0, 2.0, 0.0],
        )
        .unwrap();
        let atoms = mc_dual_curvature(&p, &ball(), 2.0, 200_000, 4).unwrap();
        for (a, t) in atoms.iter().zip([1.0, 1.0, 2.0, 0.0]) {
            assert!(within(a, t), "{a:?} vs {t}");
        }
        assert_eq!(atoms[3].value, 0.0);
    }

    #[test]
    fn disk_area() {
        let b = crate::polytope::HPolytope::new(
            (0..64)
                .map(|i| {
                    let a = 2.0 * PI * i as f64 / 64.0;
                    UnitVector::from_slice(&[a.cos(), a.sin()]).unwrap()
                })
                .collect(),
            vec![1.0; 64],
        )
        .unwrap();
        let e = mc_dual_intrinsic_volume(&b, &ball(), 2.0, 100_000, 5).unwrap();
        // area of the circumscribed 64-gon
        assert!(within(&e, 64.0 * (PI / 64.0).tan()), "{e:?}");
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let a = mc_dual_curvature(&square(1.0), &ball(), 3.0, 50_000, 9).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| mc_dual_curvature(&square(1.0), &ball(), 3.0, 50_000, 9).unwrap());
        assert_eq!(a, b);
        let c = mc_dual_curvature(&square(1.0), &ball(), 3.0, 50_000, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_small_sample_counts() {
        assert!(mc_dual_intrinsic_volume(&square(1.0), &ball(), 2.0, 10, 0).is_err());
    }

    #[test]
    fn octant_counts_pass_chi_square() {
        let n = 80_000;
        let mut counts = [0usize; 8];
        for u in sample_sphere(3, n, 11) {
            let idx =
                (u[0] > 0.0) as usize | ((u[1] > 0.0) as usize) << 1 | ((u[2] > 0.0) as usize) << 2;
            counts[idx] += 1;
        }
        let expect = n as f64 / 8.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expect).powi(2) / expect)
            .sum();
        // 7 degrees of freedom, significance 0.001
        assert!(chi2 < 24.322, "{chi2}");
    }
}
