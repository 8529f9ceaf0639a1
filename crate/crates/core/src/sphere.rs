//! Sphere utilities: surface area constants, icosahedral grids and fixed
//! direction sets.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DVector, Matrix3, Vector3};

/// Surface area `omega_n = n * kappa_n` of `S^{n-1}`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 2.0) * sphere_area(n - 2),
    }
}

/// Volume `kappa_n` of the unit ball in `R^n`.
pub fn ball_volume(n: usize) -> f64 {
    sphere_area(n) / n as f64
}

/// Geodesic grid on `S^2` from an icosahedron with `level` rounds of
/// 4-to-1 triangle subdivision. Faces are outward oriented.
#[derive(Clone, Debug)]
pub struct IcoGrid {
    vertices: Vec<Vector3<f64>>,
    /// Faces of every level, coarsest first.
    levels: Vec<Vec<[usize; 3]>>,
    /// `children[l][f]`: the four faces of level `l + 1` inside face `f`.
    children: Vec<Vec<[usize; 4]>>,
}

impl IcoGrid {
    pub fn new(level: usize) -> Self {
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        let raw = [
            [-1.0, g, 0.0],
            [1.0, g, 0.0],
            [-1.0, -g, 0.0],
            [1.0, -g, 0.0],
            [0.0, -1.0, g],
            [0.0, 1.0, g],
            [0.0, -1.0, -g],
            [0.0, 1.0, -g],
            [g, 0.0, -1.0],
            [g, 0.0, 1.0],
            [-g, 0.0, -1.0],
            [-g, 0.0, 1.0],
        ];
        let mut vertices: Vec<Vector3<f64>> = raw
            .iter()
            .map(|v| Vector3::new(v[0], v[1], v[2]).normalize())
            .collect();
        let mut faces: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for f in faces.iter_mut() {
            let [a, b, c] = *f;
            if Matrix3::from_columns(&[vertices[a], vertices[b], vertices[c]]).determinant() < 0.0 {
                f.swap(1, 2);
            }
        }
        let mut levels = vec![faces];
        let mut children = Vec::new();
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        for _ in 0..level {
            let prev = levels.last().unwrap();
            let mut next = Vec::with_capacity(prev.len() * 4);
            let mut kids = Vec::with_capacity(prev.len());
            for &[a, b, c] in prev {
                let mut mid = |i: usize, j: usize| -> usize {
                    let key = (i.min(j), i.max(j));
                    *midpoint.entry(key).or_insert_with(|| {
                        vertices.push((vertices[i] + vertices[j]).normalize());
                        vertices.len() - 1
                    })
                };
                let ab = mid(a, b);
                let bc = mid(b, c);
                let ca = mid(c, a);
                let base = next.len();
                next.push([a, ab, ca]);
                next.push([ab, b, bc]);
                next.push([ca, bc, c]);
                next.push([ab, bc, ca]);
                kids.push([base, base + 1, base + 2, base + 3]);
            }
            levels.push(next);
            children.push(kids);
        }
        Self {
            vertices,
            levels,
            children,
        }
    }

    pub fn vertices(&self) -> &[Vector3<f64>] {
        &self.vertices
    }

    /// Faces of the finest level.
    pub fn faces(&self) -> &[[usize; 3]] {
        self.levels.last().unwrap()
    }

    pub fn level(&self) -> usize {
        self.levels.len() - 1
    }

    fn corners(&self, f: [usize; 3]) -> Matrix3<f64> {
        Matrix3::from_columns(&[
            self.vertices[f[0]],
            self.vertices[f[1]],
            self.vertices[f[2]],
        ])
    }

    /// Coefficients of `u` in the basis of the face corners; all nonnegative
    /// exactly when `u` lies in the face's cone.
    fn cone_coords(&self, f: [usize; 3], u: &Vector3<f64>) -> Vector3<f64> {
        self.corners(f)
            .try_inverse()
            .map(|m| m * u)
            .unwrap_or_else(|| Vector3::from_element(f64::NEG_INFINITY))
    }

    /// Finest-level face whose cone contains `u`, and the planar barycentric
    /// coordinates of the ray's hit point on that face.
    pub fn locate(&self, u: &Vector3<f64>) -> (usize, Vector3<f64>) {
        let pick = |candidates: &mut dyn Iterator<Item = usize>,
                    faces: &[[usize; 3]]|
         -> (usize, Vector3<f64>) {
            let mut best = (usize::MAX, Vector3::from_element(f64::NEG_INFINITY));
            for fi in candidates {
                let c = self.cone_coords(faces[fi], u);
                if c.min() > best.1.min() {
                    best = (fi, c);
                }
                if c.min() >= 0.0 {
                    break;
                }
            }
            best
        };
        let mut cur = pick(&mut (0..self.levels[0].len()), &self.levels[0]);
        for l in 0..self.children.len() {
            let kids = self.children[l][cur.0];
            cur = pick(&mut kids.into_iter(), &self.levels[l + 1]);
        }
        let c = cur.1;
        (cur.0, c / c.sum())
    }
}

/// Deterministic, nearly uniform set of `count` directions on `S^{n-1}`.
///
/// `n = 2`: equally spaced angles. `n = 3`: Fibonacci lattice. Higher
/// dimensions: seeded Gaussian samples.
pub fn direction_grid(n: usize, count: usize) -> Vec<DVector<f64>> {
    match n {
        2 => (0..count)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / count as f64;
                DVector::from_vec(vec![a.cos(), a.sin()])
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * i as f64;
                    DVector::from_vec(vec![r * a.cos(), r * a.sin(), z])
                })
                .collect()
        }
        _ => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
            (0..count)
                .map(|_| {
                    let v = DVector::from_fn(n, |_, _| {
                        rng.sample::<f64, _>(rand_distr::StandardNormal)
                    });
                    let norm = v.norm();
                    v / norm
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_constants() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-15);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((ball_volume(3) - 4.0 / 3.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn icosahedron_counts() {
        let g = IcoGrid::new(2);
        assert_eq!(g.faces().len(), 320);
        assert_eq!(g.vertices().len(), 162);
        for f in g.faces() {
            let m = Matrix3::from_columns(&[
                g.vertices()[f[0]],
                g.vertices()[f[1]],
                g.vertices()[f[2]],
            ]);
            assert!(m.determinant() > 0.0);
        }
    }

    #[test]
    fn locate_recovers_vertices_and_interior_points() {
        let g = IcoGrid::new(1);
        for (fi, f) in g.faces().iter().enumerate() {
            let p =
                (g.vertices()[f[0]] * 0.2 + g.vertices()[f[1]] * 0.3 + g.vertices()[f[2]] * 0.5)
                    .normalize();
            let (found, bary) = g.locate(&p);
            assert_eq!(found, fi);
            assert!((bary - Vector3::new(0.2, 0.3, 0.5)).amax() < 1e-12);
        }
    }
}
