//! Quickhull in two and three dimensions.
//!
//! Degenerate inputs are not errors: coincident, collinear and (in 3D)
//! coplanar point sets produce a lower-dimensional description with zero
//! volume and `degenerate = true`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Base tolerance for visibility and degeneracy tests, scaled by the extent of the input.
pub const HULL_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hull {
    pub dims: usize,
    /// Dimension of the affine span of the input (0 to `dims`).
    pub affine_dim: usize,
    /// Indices into the input of the hull vertices. In 2D (and for coplanar
    /// 3D input) these follow the boundary counter-clockwise; otherwise ascending.
    pub vertices: Vec<usize>,
    /// Simplicial facets as input indices: outward-oriented triangles in 3D,
    /// boundary edges in 2D. Lower-dimensional hulls use their own facets.
    pub facets: Vec<Vec<usize>>,
    /// Area in 2D, volume in 3D; zero when degenerate.
    pub volume: f64,
    pub degenerate: bool,
}

type P2 = [f64; 2];
type P3 = [f64; 3];

fn sub3(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: P3, b: P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: P3, b: P3) -> P3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(a: P3) -> f64 {
    dot3(a, a).sqrt()
}

fn cross2(o: P2, a: P2, b: P2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn dist2(a: P2, b: P2) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn tolerance<const D: usize>(points: &[[f64; D]]) -> f64 {
    let mut extent: f64 = 0.0;
    for d in 0..D {
        let (lo, hi) = points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p[d]), hi.max(p[d]))
            });
        extent = extent.max(hi - lo).max(lo.abs()).max(hi.abs());
    }
    HULL_EPS * extent.max(1.0)
}

/// Convex hull of `points` (each of length `dims`, with `dims` 2 or 3).
pub fn quickhull(points: &[Vec<f64>], dims: usize) -> Result<Hull> {
    if !(dims == 2 || dims == 3) {
        return Err(Error::invalid(format!("hull dimension must be 2 or 3, got {dims}")));
    }
    if points.len() < dims + 1 {
        return Err(Error::invalid(format!(
            "a {dims}D hull needs at least {} points, got {}",
            dims + 1,
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| p.len() != dims) {
        return Err(Error::invalid(format!(
            "point of dimension {} in a {dims}D hull",
            p.len()
        )));
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::invalid("non-finite coordinate in hull input"));
    }
    if dims == 2 {
        let pts: Vec<P2> = points.iter().map(|p| [p[0], p[1]]).collect();
        Ok(hull_2d(&pts))
    } else {
        let pts: Vec<P3> = points.iter().map(|p| [p[0], p[1], p[2]]).collect();
        Ok(hull_3d(&pts))
    }
}

fn polygon_area(pts: &[P2], ring: &[usize]) -> f64 {
    let n = ring.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let a = pts[ring[i]];
            let b = pts[ring[(i + 1) % n]];
            a[0] * b[1] - b[0] * a[1]
        })
        .sum();
    (twice / 2.0).abs()
}

fn ring_edges(ring: &[usize]) -> Vec<Vec<usize>> {
    let n = ring.len();
    (0..n).map(|i| vec![ring[i], ring[(i + 1) % n]]).collect()
}

fn hull_2d(pts: &[P2]) -> Hull {
    let eps = tolerance(pts);
    let all: Vec<usize> = (0..pts.len()).collect();

    let a = lowest_lexicographic(pts, &all);
    let b = all
        .iter()
        .copied()
        .max_by(|&i, &j| dist2(pts[a], pts[i]).total_cmp(&dist2(pts[a], pts[j])).then(j.cmp(&i)))
        .expect("non-empty");
    if dist2(pts[a], pts[b]) <= eps {
        return Hull {
            dims: 2,
            affine_dim: 0,
            vertices: vec![a],
            facets: Vec::new(),
            volume: 0.0,
            degenerate: true,
        };
    }
    let len_ab = dist2(pts[a], pts[b]);
    let off_line = all
        .iter()
        .any(|&i| (cross2(pts[a], pts[b], pts[i]) / len_ab).abs() > eps);
    if !off_line {
        let (lo, hi) = segment_extremes_2d(pts, &all, a, b);
        return Hull {
            dims: 2,
            affine_dim: 1,
            vertices: vec![lo, hi],
            facets: vec![vec![lo, hi]],
            volume: 0.0,
            degenerate: true,
        };
    }

    let ring = quickhull_ring(pts, &all, eps);
    Hull {
        dims: 2,
        affine_dim: 2,
        facets: ring_edges(&ring),
        volume: polygon_area(pts, &ring),
        vertices: ring,
        degenerate: false,
    }
}

fn lowest_lexicographic(pts: &[P2], idx: &[usize]) -> usize {
    idx.iter()
        .copied()
        .min_by(|&i, &j| {
            pts[i][0]
                .total_cmp(&pts[j][0])
                .then(pts[i][1].total_cmp(&pts[j][1]))
                .then(i.cmp(&j))
        })
        .expect("non-empty")
}

fn highest_lexicographic(pts: &[P2], idx: &[usize]) -> usize {
    idx.iter()
        .copied()
        .max_by(|&i, &j| {
            pts[i][0]
                .total_cmp(&pts[j][0])
                .then(pts[i][1].total_cmp(&pts[j][1]))
                .then(j.cmp(&i))
        })
        .expect("non-empty")
}

fn segment_extremes_2d(pts: &[P2], idx: &[usize], a: usize, b: usize) -> (usize, usize) {
    let dir = [pts[b][0] - pts[a][0], pts[b][1] - pts[a][1]];
    let proj = |i: usize| (pts[i][0] - pts[a][0]) * dir[0] + (pts[i][1] - pts[a][1]) * dir[1];
    let lo = idx
        .iter()
        .copied()
        .min_by(|&i, &j| proj(i).total_cmp(&proj(j)).then(i.cmp(&j)))
        .expect("non-empty");
    let hi = idx
        .iter()
        .copied()
        .max_by(|&i, &j| proj(i).total_cmp(&proj(j)).then(j.cmp(&i)))
        .expect("non-empty");
    (lo, hi)
}

/// Counter-clockwise boundary of a full-dimensional planar point set.
fn quickhull_ring(pts: &[P2], idx: &[usize], eps: f64) -> Vec<usize> {
    let a = lowest_lexicographic(pts, idx);
    let b = highest_lexicographic(pts, idx);
    let below: Vec<usize> = idx
        .iter()
        .copied()
        .filter(|&i| signed_dist(pts, b, a, i) > eps)
        .collect();
    let above: Vec<usize> = idx
        .iter()
        .copied()
        .filter(|&i| signed_dist(pts, a, b, i) > eps)
        .collect();
    let mut ring = vec![a];
    // `below` lies right of a→b, i.e. left of b→a
    chain(pts, a, b, &below, eps, &mut ring);
    ring.push(b);
    chain(pts, b, a, &above, eps, &mut ring);
    ring
}

/// Distance of `i` to the left of the directed line p→q.
fn signed_dist(pts: &[P2], p: usize, q: usize, i: usize) -> f64 {
    cross2(pts[p], pts[q], pts[i]) / dist2(pts[p], pts[q])
}

/// Hull vertices strictly right of p→q, in order from p to q.
fn chain(pts: &[P2], p: usize, q: usize, set: &[usize], eps: f64, out: &mut Vec<usize>) {
    let Some(c) = set.iter().copied().max_by(|&i, &j| {
        (-signed_dist(pts, p, q, i))
            .total_cmp(&-signed_dist(pts, p, q, j))
            .then(j.cmp(&i))
    }) else {
        return;
    };
    let right_of = |s: usize, t: usize| -> Vec<usize> {
        set.iter()
            .copied()
            .filter(|&i| -signed_dist(pts, s, t, i) > eps)
            .collect()
    };
    let left_set = right_of(p, c);
    let right_set = right_of(c, q);
    chain(pts, p, c, &left_set, eps, out);
    out.push(c);
    chain(pts, c, q, &right_set, eps, out);
}

#[derive(Debug, Clone)]
struct Face {
    v: [usize; 3],
    normal: P3,
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
}

impl Face {
    fn new(pts: &[P3], v: [usize; 3]) -> Self {
        let n = cross3(sub3(pts[v[1]], pts[v[0]]), sub3(pts[v[2]], pts[v[0]]));
        let len = norm3(n);
        let normal = [n[0] / len, n[1] / len, n[2] / len];
        Face {
            v,
            normal,
            offset: dot3(normal, pts[v[0]]),
            outside: Vec::new(),
            alive: true,
        }
    }

    fn dist(&self, p: P3) -> f64 {
        dot3(self.normal, p) - self.offset
    }

    fn edges(&self) -> [(usize, usize); 3] {
        [(self.v[0], self.v[1]), (self.v[1], self.v[2]), (self.v[2], self.v[0])]
    }
}

fn hull_3d(pts: &[P3]) -> Hull {
    let eps = tolerance(pts);
    let n = pts.len();

    // Initial pair: the two most distant among the axis extremes.
    let mut extremes = Vec::with_capacity(6);
    for d in 0..3 {
        let lo = (0..n)
            .min_by(|&i, &j| pts[i][d].total_cmp(&pts[j][d]).then(i.cmp(&j)))
            .expect("non-empty");
        let hi = (0..n)
            .max_by(|&i, &j| pts[i][d].total_cmp(&pts[j][d]).then(j.cmp(&i)))
            .expect("non-empty");
        extremes.push(lo);
        extremes.push(hi);
    }
    let (mut i0, mut i1, mut best) = (extremes[0], extremes[0], -1.0);
    for (k, &a) in extremes.iter().enumerate() {
        for &b in &extremes[k + 1..] {
            let d = norm3(sub3(pts[a], pts[b]));
            if d > best {
                (i0, i1, best) = (a, b, d);
            }
        }
    }
    if best <= eps {
        return Hull {
            dims: 3,
            affine_dim: 0,
            vertices: vec![i0.min(i1)],
            facets: Vec::new(),
            volume: 0.0,
            degenerate: true,
        };
    }

    let axis = sub3(pts[i1], pts[i0]);
    let axis_len = norm3(axis);
    let line_dist = |i: usize| norm3(cross3(axis, sub3(pts[i], pts[i0]))) / axis_len;
    let i2 = (0..n)
        .max_by(|&i, &j| line_dist(i).total_cmp(&line_dist(j)).then(j.cmp(&i)))
        .expect("non-empty");
    if line_dist(i2) <= eps {
        let proj = |i: usize| dot3(sub3(pts[i], pts[i0]), axis);
        let lo = (0..n)
            .min_by(|&i, &j| proj(i).total_cmp(&proj(j)).then(i.cmp(&j)))
            .expect("non-empty");
        let hi = (0..n)
            .max_by(|&i, &j| proj(i).total_cmp(&proj(j)).then(j.cmp(&i)))
            .expect("non-empty");
        return Hull {
            dims: 3,
            affine_dim: 1,
            vertices: vec![lo, hi],
            facets: vec![vec![lo, hi]],
            volume: 0.0,
            degenerate: true,
        };
    }

    let base = Face::new(pts, [i0, i1, i2]);
    let i3 = (0..n)
        .max_by(|&i, &j| {
            base.dist(pts[i])
                .abs()
                .total_cmp(&base.dist(pts[j]).abs())
                .then(j.cmp(&i))
        })
        .expect("non-empty");
    if base.dist(pts[i3]).abs() <= eps {
        return coplanar_hull(pts, base.normal, i0, eps);
    }

    // Orient the tetrahedron so every face normal points away from the fourth vertex.
    let (a, b, c, d) = if base.dist(pts[i3]) > 0.0 {
        (i0, i2, i1, i3)
    } else {
        (i0, i1, i2, i3)
    };
    let mut faces = vec![
        Face::new(pts, [a, b, c]),
        Face::new(pts, [a, d, b]),
        Face::new(pts, [b, d, c]),
        Face::new(pts, [c, d, a]),
    ];
    let mut edge_owner: HashMap<(usize, usize), usize> = HashMap::new();
    for (fi, f) in faces.iter().enumerate() {
        for e in f.edges() {
            edge_owner.insert(e, fi);
        }
    }
    let simplex = [a, b, c, d];
    let candidates: Vec<usize> = (0..n).filter(|i| !simplex.contains(i)).collect();
    assign_outside(pts, &mut faces, &[0, 1, 2, 3], candidates, eps);

    while let Some(start) = faces
        .iter()
        .position(|f| f.alive && !f.outside.is_empty())
    {
        let apex = {
            let f = &faces[start];
            f.outside
                .iter()
                .copied()
                .max_by(|&i, &j| f.dist(pts[i]).total_cmp(&f.dist(pts[j])).then(j.cmp(&i)))
                .expect("non-empty")
        };

        // Visible region: faces reachable from `start` that see the apex.
        let mut visible = vec![start];
        let mut is_visible: HashMap<usize, bool> = HashMap::from([(start, true)]);
        let mut k = 0;
        while k < visible.len() {
            let fi = visible[k];
            k += 1;
            for (u, v) in faces[fi].edges() {
                let Some(&nb) = edge_owner.get(&(v, u)) else {
                    continue;
                };
                if is_visible.contains_key(&nb) {
                    continue;
                }
                let sees = faces[nb].dist(pts[apex]) > eps;
                is_visible.insert(nb, sees);
                if sees {
                    visible.push(nb);
                }
            }
        }

        let mut horizon = Vec::new();
        for &fi in &visible {
            for (u, v) in faces[fi].edges() {
                let nb = edge_owner[&(v, u)];
                if !is_visible.get(&nb).copied().unwrap_or(false) {
                    horizon.push((u, v));
                }
            }
        }

        let mut orphans = Vec::new();
        for &fi in &visible {
            for e in faces[fi].edges() {
                edge_owner.remove(&e);
            }
            let f = &mut faces[fi];
            f.alive = false;
            orphans.extend(f.outside.drain(..).filter(|&i| i != apex));
        }

        let mut created = Vec::with_capacity(horizon.len());
        for (u, v) in horizon {
            let fi = faces.len();
            let f = Face::new(pts, [u, v, apex]);
            for e in f.edges() {
                edge_owner.insert(e, fi);
            }
            faces.push(f);
            created.push(fi);
        }
        orphans.sort_unstable();
        assign_outside(pts, &mut faces, &created, orphans, eps);
    }

    let live: Vec<&Face> = faces.iter().filter(|f| f.alive).collect();
    let mut vertices: Vec<usize> = live.iter().flat_map(|f| f.v).collect();
    vertices.sort_unstable();
    vertices.dedup();
    let centre = {
        let mut c = [0.0; 3];
        for &i in &vertices {
            for d in 0..3 {
                c[d] += pts[i][d];
            }
        }
        c.map(|x| x / vertices.len() as f64)
    };
    let volume: f64 = live
        .iter()
        .map(|f| {
            let [p, q, r] = f.v.map(|i| sub3(pts[i], centre));
            dot3(p, cross3(q, r)) / 6.0
        })
        .sum();
    Hull {
        dims: 3,
        affine_dim: 3,
        vertices,
        facets: live.iter().map(|f| f.v.to_vec()).collect(),
        volume: volume.abs(),
        degenerate: false,
    }
}

fn assign_outside(pts: &[P3], faces: &mut [Face], targets: &[usize], points: Vec<usize>, eps: f64) {
    for i in points {
        let mut best: Option<(usize, f64)> = None;
        for &fi in targets {
            let d = faces[fi].dist(pts[i]);
            if d > eps && best.is_none_or(|(_, bd)| d > bd) {
                best = Some((fi, d));
            }
        }
        if let Some((fi, _)) = best {
            faces[fi].outside.push(i);
        }
    }
}

/// Planar 3D input: hull the points inside their supporting plane.
fn coplanar_hull(pts: &[P3], normal: P3, origin: usize, eps: f64) -> Hull {
    // Orthonormal basis (u, w) spanning the plane.
    let helper = if normal[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let u = {
        let c = cross3(normal, helper);
        let l = norm3(c);
        [c[0] / l, c[1] / l, c[2] / l]
    };
    let w = cross3(normal, u);
    let flat: Vec<P2> = pts
        .iter()
        .map(|p| {
            let r = sub3(*p, pts[origin]);
            [dot3(r, u), dot3(r, w)]
        })
        .collect();
    let all: Vec<usize> = (0..pts.len()).collect();
    let ring = quickhull_ring(&flat, &all, eps);
    Hull {
        dims: 3,
        affine_dim: 2,
        facets: ring_edges(&ring),
        vertices: ring,
        volume: 0.0,
        degenerate: true,
    }
}
