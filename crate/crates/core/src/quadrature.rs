//! Globally adaptive cubature over simplices embedded in `R^n`.
//!
//! Each simplex is integrated with a collapsed (Duffy) Gauss-Legendre
//! product rule of 8 points per axis; a 5-point rule on the same simplex
//! supplies the error estimate. The simplex with the largest estimate is
//! bisected across its longest edge until the summed estimate meets the
//! relative target.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::polytope::Simplex;

const HIGH_ORDER: usize = 8;
const LOW_ORDER: usize = 5;
const MAX_REGIONS: usize = 200_000;
const MAX_DEPTH: u32 = 60;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = (1.0 - x) / 2.0;
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Barycentric nodes with weights summing to one on an `m`-simplex.
#[derive(Debug)]
pub struct SimplexRule {
    pub bary: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SimplexRule {
    /// Collapsed product rule with `order` Gauss points per axis.
    pub fn collapsed(m: usize, order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let total = order.pow(m as u32);
        let mut bary = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; m];
        let mfact: f64 = (1..=m).map(|i| i as f64).product();
        for _ in 0..total {
            let mut s = vec![0.0; m];
            let mut remaining = 1.0;
            let mut weight = mfact;
            for j in 0..m {
                let xi = x[idx[j]];
                s[j] = xi * remaining;
                // Duffy Jacobian: one factor of prod_{l<j} (1 - xi_l) per later axis
                weight *= if j == 0 {
                    w[idx[j]]
                } else {
                    w[idx[j]] * remaining
                };
                remaining *= 1.0 - xi;
            }
            let mut lam = Vec::with_capacity(m + 1);
            lam.push(1.0 - s.iter().sum::<f64>());
            lam.extend_from_slice(&s);
            bary.push(lam);
            weights.push(weight);
            for j in (0..m).rev() {
                idx[j] += 1;
                if idx[j] < order {
                    break;
                }
                idx[j] = 0;
            }
        }
        Self { bary, weights }
    }

    fn apply<F: Fn(&[f64]) -> f64>(&self, pts: &[DVector<f64>], f: &F, buf: &mut [f64]) -> f64 {
        let mut acc = 0.0;
        for (lam, w) in self.bary.iter().zip(&self.weights) {
            buf.iter_mut().for_each(|b| *b = 0.0);
            for (l, p) in lam.iter().zip(pts) {
                for (b, c) in buf.iter_mut().zip(p.iter()) {
                    *b += l * c;
                }
            }
            acc += w * f(buf);
        }
        acc
    }
}

fn rules(m: usize) -> &'static (SimplexRule, SimplexRule) {
    static CACHE: [OnceLock<(SimplexRule, SimplexRule)>; 4] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    assert!((1..=3).contains(&m), "simplex dimension {m} unsupported");
    CACHE[m].get_or_init(|| {
        (
            SimplexRule::collapsed(m, HIGH_ORDER),
            SimplexRule::collapsed(m, LOW_ORDER),
        )
    })
}

/// Value and error estimate of an integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

struct Region {
    points: Vec<DVector<f64>>,
    volume: f64,
    value: f64,
    error: f64,
    depth: u32,
    id: usize,
}

impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Region {}
impl PartialOrd for Region {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Region {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.id.cmp(&self.id))
    }
}

fn evaluate<F: Fn(&[f64]) -> f64>(
    points: Vec<DVector<f64>>,
    volume: f64,
    depth: u32,
    id: usize,
    f: &F,
    buf: &mut [f64],
) -> Region {
    let (hi, lo) = rules(points.len() - 1);
    let value = volume * hi.apply(&points, f, buf);
    let low = volume * lo.apply(&points, f, buf);
    Region {
        points,
        volume,
        value,
        error: (value - low).abs(),
        depth,
        id,
    }
}

/// Integrates `f` over the union of `simplices` to relative accuracy `rtol`.
pub fn integrate<F: Fn(&[f64]) -> f64>(
    simplices: &[Simplex],
    f: &F,
    rtol: f64,
) -> Result<Estimate> {
    if simplices.is_empty() {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let n = simplices[0].points[0].len();
    let mut buf = vec![0.0; n];
    let mut heap = BinaryHeap::with_capacity(simplices.len() * 4);
    let mut next_id = 0;
    for s in simplices {
        let vol = s.volume();
        if vol <= 0.0 {
            continue;
        }
        heap.push(evaluate(s.points.clone(), vol, 0, next_id, f, &mut buf));
        next_id += 1;
    }
    let totals = |heap: &BinaryHeap<Region>| {
        heap.iter()
            .fold((0.0, 0.0), |(v, e), r| (v + r.value, e + r.error))
    };
    let (mut value, mut error) = totals(&heap);
    let mut steps = 0usize;
    loop {
        let target = rtol * value.abs();
        if error <= target || heap.is_empty() {
            // refresh the running sums before the final decision
            (value, error) = totals(&heap);
            if error <= rtol * value.abs() || heap.is_empty() {
                return Ok(Estimate {
                    value: ordered_sum(&heap),
                    error,
                });
            }
        }
        if heap.len() >= MAX_REGIONS || heap.peek().is_none_or(|r| r.depth >= MAX_DEPTH) {
            return Err(Error::QuadratureNotConverged {
                estimate: error,
                target: rtol * value.abs(),
            });
        }
        let worst = heap.pop().expect("nonempty heap");
        value -= worst.value;
        error -= worst.error;
        let (a, b) = longest_edge(&worst.points);
        let mid = (&worst.points[a] + &worst.points[b]) * 0.5;
        for replaced in [a, b] {
            let mut pts = worst.points.clone();
            pts[replaced] = mid.clone();
            let child = evaluate(
                pts,
                worst.volume * 0.5,
                worst.depth + 1,
                next_id,
                f,
                &mut buf,
            );
            value += child.value;
            error += child.error;
            heap.push(child);
            next_id += 1;
        }
        steps += 1;
        if steps.is_multiple_of(4096) {
            (value, error) = totals(&heap);
        }
    }
}

fn longest_edge(points: &[DVector<f64>]) -> (usize, usize) {
    let mut best = (0, 1, -1.0);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = (&points[i] - &points[j]).norm_squared();
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    (best.0, best.1)
}

/// Sum in region-id order so the result does not depend on heap layout.
fn ordered_sum(heap: &BinaryHeap<Region>) -> f64 {
    let mut parts: Vec<(usize, f64)> = heap.iter().map(|r| (r.id, r.value)).collect();
    parts.sort_by_key(|p| p.0);
    pairwise_sum(&parts.iter().map(|p| p.1).collect::<Vec<_>>())
}

/// Pairwise (cascade) summation in index order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        len => {
            let (a, b) = values.split_at(len / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}
