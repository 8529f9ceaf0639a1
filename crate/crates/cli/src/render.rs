//! Drawings of solved polytopes: SVG in the plane, OFF meshes in space.

use std::fmt::Write;

use dmk_core::HPolytope;

const SIZE: f64 = 480.0;

fn mean(points: &[&[f64]]) -> Vec<f64> {
    let n = points[0].len();
    (0..n)
        .map(|j| points.iter().map(|p| p[j]).sum::<f64>() / points.len() as f64)
        .collect()
}

/// Indices of planar points sorted counterclockwise around their mean,
/// measured in the frame `(e1, e2)`.
fn cyclic(points: &[&[f64]], idx: &[usize], e1: &[f64], e2: &[f64]) -> Vec<usize> {
    let sel: Vec<&[f64]> = idx.iter().map(|&i| points[i]).collect();
    let c = mean(&sel);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut keyed: Vec<(f64, usize)> = idx
        .iter()
        .map(|&i| {
            let d: Vec<f64> = points[i].iter().zip(&c).map(|(a, b)| a - b).collect();
            (dot(&d, e2).atan2(dot(&d, e1)), i)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    keyed.into_iter().map(|(_, i)| i).collect()
}

/// The polygon, the origin, and each facet normal drawn from the facet
/// midpoint with length proportional to its atom.
pub fn svg(poly: &HPolytope, atoms: &[f64]) -> String {
    let v = poly.h_to_v();
    let pts: Vec<&[f64]> = v.vertices().iter().map(|x| x.as_slice()).collect();
    let order = cyclic(
        &pts,
        &(0..pts.len()).collect::<Vec<_>>(),
        &[1.0, 0.0],
        &[0.0, 1.0],
    );

    let heaviest = atoms
        .iter()
        .copied()
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let reach = 0.5 * poly.scale();
    let mut arrows = Vec::new();
    for f in v.facets() {
        let ends: Vec<&[f64]> = f.vertex_indices.iter().map(|&i| pts[i]).collect();
        let mid = mean(&ends);
        let u = poly.normals()[f.normal_index].as_slice();
        let len = reach * atoms[f.normal_index] / heaviest;
        arrows.push((mid.clone(), vec![mid[0] + len * u[0], mid[1] + len * u[1]]));
    }

    let mut lo = [0.0f64; 2];
    let mut hi = [0.0f64; 2];
    for p in pts
        .iter()
        .copied()
        .chain(arrows.iter().map(|a| a.1.as_slice()))
    {
        for j in 0..2 {
            lo[j] = lo[j].min(p[j]);
            hi[j] = hi[j].max(p[j]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]) * 1.1;
    let k = SIZE / span;
    let pad = 0.05 * span;
    let map = |p: &[f64]| ((p[0] - lo[0] + pad) * k, (hi[1] - p[1] + pad) * k);

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )
    .unwrap();
    let poly_pts: Vec<String> = order
        .iter()
        .map(|&i| {
            let (x, y) = map(pts[i]);
            format!("{x:.3},{y:.3}")
        })
        .collect();
    writeln!(
        out,
        r##"  <polygon points="{}" fill="#dde6f0" stroke="#1f3b5a" stroke-width="1.5"/>"##,
        poly_pts.join(" ")
    )
    .unwrap();
    for (a, b) in &arrows {
        let (x1, y1) = map(a);
        let (x2, y2) = map(b);
        writeln!(
            out,
            r##"  <line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="#b5432b" stroke-width="1.2"/>"##
        )
        .unwrap();
    }
    let (ox, oy) = map(&[0.0, 0.0]);
    writeln!(
        out,
        r#"  <circle cx="{ox:.3}" cy="{oy:.3}" r="3" fill="black"/>"#
    )
    .unwrap();
    out.push_str("</svg>\n");
    out
}

/// OFF mesh with one polygonal face per facet, vertices ordered so that
/// faces are oriented outward.
pub fn off(poly: &HPolytope) -> String {
    let v = poly.h_to_v();
    let pts: Vec<&[f64]> = v.vertices().iter().map(|x| x.as_slice()).collect();
    let mut out = format!("OFF\n{} {} 0\n", pts.len(), v.facets().len());
    for p in &pts {
        writeln!(out, "{} {} {}", p[0], p[1], p[2]).unwrap();
    }
    for f in v.facets() {
        let u = poly.normals()[f.normal_index].as_slice();
        // right-handed frame (e1, e2, u) so counterclockwise means outward
        let seed = if u[0].abs() < 0.9 {
            [1.0, 0.0, 0.0]
        } else {
            [0.0, 1.0, 0.0]
        };
        let e1 = normalize(cross(&seed, u));
        let e2 = cross(u, &e1);
        let order = cyclic(&pts, &f.vertex_indices, &e1, &e2);
        let idx: Vec<String> = order.iter().map(|i| i.to_string()).collect();
        writeln!(out, "{} {}", order.len(), idx.join(" ")).unwrap();
    }
    out
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let r = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    [a[0] / r, a[1] / r, a[2] / r]
}
