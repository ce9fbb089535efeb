//! Sampling radius of a point set over its eroded hull.
//!
//! For an erosion depth `e`, let `D_e` be the points of the hull at distance
//! at least `e` from its boundary and `F(e) = sup_{x ∈ D_e} d(x, P)`. The
//! distance function restricted to any face of `D_e` is convex on each
//! Voronoi cell, so its maximum over that face is attained where the face
//! meets a Voronoi face of complementary dimension. In the interior these
//! are Delaunay circumcentres; on the boundary they are found by clipping
//! the faces of `D_e` and intersecting them with Delaunay bisectors.
//!
//! `F` is non-increasing, so the sampling radius, the smallest `e` with
//! `F(e) ≤ e`, is located by bisection.

use serde::Serialize;

use crate::delaunay::{ConvexHull, DelaunayResult};
use crate::error::{Error, Result};
use crate::geometry::linalg::{add, dot, norm, orthonormal_basis, scale, sub};
use crate::points::PointSet;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplingReport {
    /// Smallest `ε` such that every point of `D_ε` lies within `ε` of `P`.
    pub epsilon: f64,
    /// Minimum pairwise distance `μ̄`.
    pub sparsity: f64,
    /// `μ̄ / ε`.
    pub mu0: f64,
}

/// Largest ambient dimension for which the boundary of `D_e` is handled.
pub const MAX_SAMPLING_DIM: usize = 3;

const BISECTION_STEPS: usize = 200;

pub(crate) fn sampling_report(
    points: &PointSet,
    del: &DelaunayResult,
    hull: &ConvexHull,
) -> Result<SamplingReport> {
    let m = points.dim();
    if m > MAX_SAMPLING_DIM {
        return Err(Error::InvalidArgument(format!(
            "sampling radius is implemented for m <= {MAX_SAMPLING_DIM}, got {m}"
        )));
    }
    let oracle = SupDistance::new(points, del, hull);
    let diameter = points.diameter();
    let (mut lo, mut hi) = (0.0, diameter);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-14 * diameter {
            break;
        }
        if oracle.eval(mid) > mid {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sparsity = points.sparsity();
    Ok(SamplingReport {
        epsilon: hi,
        sparsity,
        mu0: sparsity / hi,
    })
}

/// Evaluates `F(e)`.
pub(crate) struct SupDistance<'a> {
    points: &'a PointSet,
    hull: &'a ConvexHull,
    /// Delaunay balls: circumcentre and radius.
    balls: Vec<(Vec<f64>, f64)>,
    /// Delaunay edges and triangles as vertex lists.
    edges: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
    /// Distinct facet hyperplanes `n · x ≤ b`.
    planes: Vec<(Vec<f64>, f64)>,
    span: f64,
}

impl<'a> SupDistance<'a> {
    pub(crate) fn new(points: &'a PointSet, del: &DelaunayResult, hull: &'a ConvexHull) -> Self {
        let balls = del
            .balls
            .iter()
            .map(|b| (b.centre.0.clone(), b.radius))
            .collect();
        let edges = del
            .complex
            .simplices_of_dim(1)
            .map(|s| [s.vertices()[0], s.vertices()[1]])
            .collect();
        let triangles = del
            .complex
            .simplices_of_dim(2)
            .map(|s| [s.vertices()[0], s.vertices()[1], s.vertices()[2]])
            .collect();
        let span = points.diameter();
        let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
        for f in hull.facets() {
            let dup = planes.iter().any(|(n, b)| {
                norm(&sub(n, &f.normal)) <= 1e-12 && (b - f.offset).abs() <= 1e-12 * span
            });
            if !dup {
                planes.push((f.normal.clone(), f.offset));
            }
        }
        Self {
            points,
            hull,
            balls,
            edges,
            triangles,
            planes,
            span,
        }
    }

    fn nearest(&self, x: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|p| crate::geometry::linalg::dist(p, x))
            .fold(f64::INFINITY, f64::min)
    }

    fn inside(&self, x: &[f64], e: f64) -> bool {
        self.hull.signed_distance(x) >= e - 1e-12 * self.span
    }

    /// `F(e)`, or 0 when `D_e` is empty.
    pub(crate) fn eval(&self, e: f64) -> f64 {
        let mut best: f64 = 0.0;
        for (c, r) in &self.balls {
            if *r > best && self.inside(c, e) {
                best = *r;
            }
        }
        match self.points.dim() {
            1 => self.boundary_1d(e, &mut best),
            2 => self.boundary_2d(e, &mut best),
            _ => self.boundary_3d(e, &mut best),
        }
        best
    }

    fn consider(&self, x: &[f64], e: f64, upper: f64, best: &mut f64) {
        if upper > *best && self.inside(x, e) {
            *best = best.max(self.nearest(x));
        }
    }

    fn boundary_1d(&self, e: f64, best: &mut f64) {
        for (n, b) in &self.planes {
            let x = [(b - e) * n[0]];
            self.consider(&x, e, f64::INFINITY, best);
        }
    }

    /// Polygon of `D_e` inside the plane `n · x = b − e` (or the whole
    /// plane for `m = 2`), in the plane's own 2D coordinates.
    fn face_polygon(
        &self,
        origin: &[f64],
        basis: &[Vec<f64>],
        skip: Option<usize>,
        e: f64,
    ) -> Vec<[f64; 2]> {
        let r = 2.0 * self.span + norm(origin);
        let mut poly = vec![[-r, -r], [r, -r], [r, r], [-r, r]];
        for (i, (n, b)) in self.planes.iter().enumerate() {
            if Some(i) == skip {
                continue;
            }
            let a = [dot(n, &basis[0]), dot(n, &basis[1])];
            let c = b - e - dot(n, origin);
            poly = clip(&poly, a, c, 1e-12 * self.span);
            if poly.is_empty() {
                break;
            }
        }
        poly
    }

    fn lift(origin: &[f64], basis: &[Vec<f64>], p: [f64; 2]) -> Vec<f64> {
        add(
            &add(origin, &scale(&basis[0], p[0])),
            &scale(&basis[1], p[1]),
        )
    }

    /// Points of the segment `[a, b]` equidistant from `u` and `v`.
    fn bisector_hits(&self, a: &[f64], b: &[f64], e: f64, best: &mut f64) {
        let d = sub(b, a);
        for &[u, v] in &self.edges {
            let pu = self.points.point(u);
            let pv = self.points.point(v);
            let w = sub(pv, pu);
            let denom = 2.0 * dot(&d, &w);
            if denom == 0.0 {
                continue;
            }
            let t = (dot(pv, pv) - dot(pu, pu) - 2.0 * dot(a, &w)) / denom;
            if (0.0..=1.0).contains(&t) {
                let x = add(a, &scale(&d, t));
                let upper = crate::geometry::linalg::dist(&x, pu);
                self.consider(&x, e, upper, best);
            }
        }
    }

    fn boundary_2d(&self, e: f64, best: &mut f64) {
        let origin = vec![0.0, 0.0];
        let basis = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let poly = self.face_polygon(&origin, &basis, None, e);
        for i in 0..poly.len() {
            let a = Self::lift(&origin, &basis, poly[i]);
            let b = Self::lift(&origin, &basis, poly[(i + 1) % poly.len()]);
            self.consider(&a, e, f64::INFINITY, best);
            self.bisector_hits(&a, &b, e, best);
        }
    }

    fn boundary_3d(&self, e: f64, best: &mut f64) {
        for (i, (n, b)) in self.planes.iter().enumerate() {
            let origin = scale(n, b - e);
            let basis = orthonormal_complement(n);
            let poly = self.face_polygon(&origin, &basis, Some(i), e);
            if poly.len() < 3 {
                continue;
            }
            for k in 0..poly.len() {
                let a = Self::lift(&origin, &basis, poly[k]);
                let bb = Self::lift(&origin, &basis, poly[(k + 1) % poly.len()]);
                self.consider(&a, e, f64::INFINITY, best);
                self.bisector_hits(&a, &bb, e, best);
            }
            // Voronoi edges of Delaunay triangles crossing the face.
            for &[u, v, w] in &self.triangles {
                let tri = self.points.simplex(&[u, v, w]);
                let Ok(ball) = tri.circumcentre() else {
                    continue;
                };
                if ball.radius <= *best {
                    continue;
                }
                let pu = self.points.point(u);
                let dir = cross(
                    &sub(self.points.point(v), pu),
                    &sub(self.points.point(w), pu),
                );
                let denom = dot(n, &dir);
                if denom == 0.0 {
                    continue;
                }
                let t = (b - e - dot(n, &ball.centre)) / denom;
                let x = add(&ball.centre, &scale(&dir, t));
                let upper = crate::geometry::linalg::dist(&x, pu);
                self.consider(&x, e, upper, best);
            }
        }
    }
}

fn cross(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn orthonormal_complement(n: &[f64]) -> Vec<Vec<f64>> {
    let mut seeds = vec![n.to_vec()];
    for k in 0..3 {
        let mut e = vec![0.0; 3];
        e[k] = 1.0;
        seeds.push(e);
    }
    orthonormal_basis(3, &seeds, 1e-9)
        .into_iter()
        .skip(1)
        .take(2)
        .collect()
}

/// Clips a convex polygon to `a · p ≤ c`.
fn clip(poly: &[[f64; 2]], a: [f64; 2], c: f64, tol: f64) -> Vec<[f64; 2]> {
    let val = |p: &[f64; 2]| a[0] * p[0] + a[1] * p[1] - c;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let (vp, vq) = (val(&p), val(&q));
        if vp <= tol {
            out.push(p);
        }
        if (vp < -tol && vq > tol) || (vp > tol && vq < -tol) {
            let t = vp / (vp - vq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clipping_a_square() {
        let sq = vec![[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]];
        let half = clip(&sq, [1.0, 0.0], 1.0, 0.0);
        assert_eq!(half, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 2.0], [0.0, 2.0]]);
        assert!(clip(&sq, [1.0, 0.0], -1.0, 0.0).is_empty());
    }
}
