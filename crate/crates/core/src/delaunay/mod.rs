//! Euclidean, relaxed and metric Delaunay complexes.
//!
//! Two constructions of the Euclidean complex are provided. The brute-force
//! oracle tests the circumball of every `(m+1)`-subset. The fast path gift
//! wraps the lower hull of the paraboloid lift: starting from one Delaunay
//! simplex it pivots across each ridge to the neighbour whose circumsphere
//! is first reached by the pencil of spheres through that ridge. Both paths
//! share the same acceptance tolerance and the same handling of cospherical
//! groups, so they agree as simplex sets.

mod hull;
mod metric;
mod relaxed;

pub use hull::{ConvexHull, HullFacet};
pub use metric::{
    metric_circumcentre, metric_delaunay, DisplacementField, MetricBall, MetricDelaunayOptions,
    MetricDelaunayResult, MetricKind, MetricModel, MetricPath, MetricPathResult, Wave,
};
pub use relaxed::{relaxed_delaunay, RelaxedOptions, RelaxedResult, WitnessOutcome};

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::complex::{AbstractSimplex, SimplicialComplex};
use crate::error::{Error, Result};
use crate::geometry::linalg::{
    axpy, dist, dist_sq, dot, norm, orthonormal_basis, reject, scale, sub,
};
use crate::geometry::predicates::{insphere, orient};
use crate::geometry::{Point, DEGENERACY_REL_TOL};
use crate::points::{PointSet, VertexId};

/// Relative (to the point-set diameter) tolerance for cosphericality.
pub const COSPHERICAL_REL_TOL: f64 = 1e-9;

/// The acceptance tolerance `τ` used for a point set.
pub fn tolerance(points: &PointSet) -> f64 {
    COSPHERICAL_REL_TOL * points.diameter()
}

/// The circumball of a Delaunay `m`-simplex and its protection margin.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DelaunayBallRecord {
    pub simplex: AbstractSimplex,
    pub centre: Point,
    pub radius: f64,
    /// `min_{q ∉ σ} ‖q − c‖ − r`; values within `±τ` of zero mean the
    /// simplex is degenerate within tolerance.
    pub protection: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DelaunayResult {
    #[serde(serialize_with = "serialize_complex")]
    pub complex: SimplicialComplex,
    /// One record per `m`-simplex, sorted by simplex.
    pub balls: Vec<DelaunayBallRecord>,
    /// Sorted vertex groups of more than `m + 1` points lying on a common
    /// empty sphere within tolerance.
    pub degeneracy_flags: Vec<Vec<VertexId>>,
    pub generic: bool,
    pub tolerance: f64,
    /// `(m−1)`-simplices on the boundary of the convex hull.
    pub hull_facets: Vec<AbstractSimplex>,
}

pub(crate) fn serialize_complex<S: serde::Serializer>(
    k: &SimplicialComplex,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    k.to_vertex_lists().serialize(s)
}

impl DelaunayResult {
    pub fn ball(&self, simplex: &AbstractSimplex) -> Option<&DelaunayBallRecord> {
        self.balls
            .binary_search_by(|b| b.simplex.cmp(simplex))
            .ok()
            .map(|i| &self.balls[i])
    }

    /// Smallest protection over all `m`-simplices.
    pub fn min_protection(&self) -> f64 {
        self.balls
            .iter()
            .map(|b| b.protection)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn hull(&self, points: &PointSet) -> ConvexHull {
        ConvexHull::from_facets(points, self.hull_facets.iter().cloned())
    }

    /// `m`-simplices of the complex.
    pub fn top_simplices(&self) -> impl Iterator<Item = &AbstractSimplex> {
        self.balls.iter().map(|b| &b.simplex)
    }
}

/// Emptiness test shared by both constructions: the circumball of `ids`
/// when no point lies inside it by more than `tau`, together with its
/// protection and the outside points within `tau` of its sphere.
struct Candidate {
    centre: Point,
    radius: f64,
    protection: f64,
    cospherical: Vec<VertexId>,
}

fn evaluate(points: &PointSet, ids: &[VertexId], tau: f64) -> Option<Candidate> {
    let s = points.simplex(ids);
    if s.is_degenerate() {
        return None;
    }
    let ball = s.circumcentre().ok()?;
    let mut protection = f64::INFINITY;
    let mut cospherical = Vec::new();
    for (q, p) in points.iter().enumerate() {
        if ids.contains(&q) {
            continue;
        }
        let margin = dist(p, &ball.centre) - ball.radius;
        if margin < -tau {
            return None;
        }
        if margin <= tau {
            cospherical.push(q);
        }
        protection = protection.min(margin);
    }
    Some(Candidate {
        centre: ball.centre,
        radius: ball.radius,
        protection,
        cospherical,
    })
}

fn record(ids: &[VertexId], c: &Candidate) -> DelaunayBallRecord {
    DelaunayBallRecord {
        simplex: AbstractSimplex::new(ids.to_vec()).expect("non-empty"),
        centre: c.centre.clone(),
        radius: c.radius,
        protection: c.protection,
    }
}

fn group_of(ids: &[VertexId], c: &Candidate) -> Option<Vec<VertexId>> {
    if c.cospherical.is_empty() {
        return None;
    }
    let mut g: Vec<VertexId> = ids.iter().chain(&c.cospherical).copied().collect();
    g.sort_unstable();
    Some(g)
}

fn finish(
    records: BTreeMap<AbstractSimplex, DelaunayBallRecord>,
    groups: BTreeSet<Vec<VertexId>>,
    hull_facets: Vec<AbstractSimplex>,
    tau: f64,
) -> DelaunayResult {
    let complex = SimplicialComplex::from_simplices(records.keys().cloned());
    DelaunayResult {
        complex,
        balls: records.into_values().collect(),
        generic: groups.is_empty(),
        degeneracy_flags: groups.into_iter().collect(),
        tolerance: tau,
        hull_facets,
    }
}

/// Tests every `(m+1)`-subset of `points`.
pub fn delaunay_bruteforce(points: &PointSet) -> Result<DelaunayResult> {
    points.require_full_rank()?;
    let m = points.dim();
    let tau = tolerance(points);
    let subsets: Vec<Vec<VertexId>> = (0..points.len()).combinations(m + 1).collect();
    let accepted: Vec<(Vec<VertexId>, Candidate)> = subsets
        .into_par_iter()
        .filter_map(|ids| evaluate(points, &ids, tau).map(|c| (ids, c)))
        .collect();
    let mut records = BTreeMap::new();
    let mut groups = BTreeSet::new();
    for (ids, c) in &accepted {
        if let Some(g) = group_of(ids, c) {
            groups.insert(g);
        }
        let r = record(ids, c);
        records.insert(r.simplex.clone(), r);
    }
    let hull = ConvexHull::bruteforce(points)?;
    let facets = hull.facets().iter().map(|f| f.simplex.clone()).collect();
    Ok(finish(records, groups, facets, tau))
}

/// Gift wrapping on the paraboloid lift, followed by completion of
/// cospherical groups.
pub fn delaunay_lifted(points: &PointSet) -> Result<DelaunayResult> {
    points.require_full_rank()?;
    let m = points.dim();
    let tau = tolerance(points);
    let diameter = points.diameter();
    let start = initial_simplex(points)?;

    let mut found: BTreeSet<AbstractSimplex> = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    let mut hull_facets = BTreeSet::new();
    while let Some(s) = queue.pop_front() {
        for (k, &apex) in s.vertices().iter().enumerate() {
            let ridge: Vec<VertexId> = s
                .vertices()
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != k)
                .map(|(_, &v)| v)
                .collect();
            match pivot(points, &ridge, apex, diameter) {
                None => {
                    hull_facets.insert(AbstractSimplex::new(ridge).expect("non-empty"));
                }
                Some(q) => {
                    let mut ids = ridge;
                    ids.push(q);
                    let next = AbstractSimplex::new(ids).expect("non-empty");
                    if found.insert(next.clone()) {
                        queue.push_back(next);
                    }
                }
            }
        }
    }

    let mut records = BTreeMap::new();
    let mut groups = BTreeSet::new();
    let mut pending: Vec<AbstractSimplex> = found.into_iter().collect();
    while !pending.is_empty() {
        let evaluated: Vec<(AbstractSimplex, Option<Candidate>)> = pending
            .par_iter()
            .map(|s| (s.clone(), evaluate(points, s.vertices(), tau)))
            .collect();
        let mut new_groups = Vec::new();
        for (s, c) in evaluated {
            let Some(c) = c else { continue };
            if let Some(g) = group_of(s.vertices(), &c) {
                if groups.insert(g.clone()) {
                    new_groups.push(g);
                }
            }
            records.insert(s.clone(), record(s.vertices(), &c));
        }
        let mut next = BTreeSet::new();
        for g in new_groups {
            for ids in g.iter().copied().combinations(m + 1) {
                let s = AbstractSimplex::new(ids).expect("non-empty");
                if !records.contains_key(&s) {
                    next.insert(s);
                }
            }
        }
        pending = next.into_iter().collect();
    }
    Ok(finish(
        records,
        groups,
        hull_facets.into_iter().collect(),
        tau,
    ))
}

/// Grows an empty ball from a single point until `m + 1` points lie on its
/// boundary. Each step moves the centre orthogonally to the affine hull of
/// the points already on the sphere, so they stay equidistant.
fn initial_simplex(points: &PointSet) -> Result<AbstractSimplex> {
    let m = points.dim();
    let n = points.len();
    let mut ids = vec![0];
    let mut centre = points.point(0).coords().to_vec();
    while ids.len() < m + 1 {
        let s0 = points.point(ids[0]).coords();
        let dirs: Vec<Vec<f64>> = ids[1..].iter().map(|&i| sub(points.point(i), s0)).collect();
        let basis = orthonormal_basis(m, &dirs, DEGENERACY_REL_TOL);
        let off = (0..n)
            .filter(|q| !ids.contains(q))
            .map(|q| reject(&sub(points.point(q), s0), &basis))
            .max_by(|a, b| norm(a).total_cmp(&norm(b)))
            .expect("full rank leaves a point off the affine hull");
        let v = scale(&off, 1.0 / norm(&off));
        let r2 = dist_sq(&centre, s0);
        let mut step: Option<(f64, VertexId)> = None;
        for q in (0..n).filter(|q| !ids.contains(q)) {
            let h = dot(&v, &sub(points.point(q), s0));
            if h <= 0.0 {
                continue;
            }
            let e = (dist_sq(&centre, points.point(q)) - r2).max(0.0);
            let t = e / (2.0 * h);
            if step.is_none_or(|(bt, _)| t < bt) {
                step = Some((t, q));
            }
        }
        let (t, q) = step.expect("the direction points towards the farthest point");
        centre = axpy(&centre, t, &v);
        ids.push(q);
    }
    let s = AbstractSimplex::new(ids).expect("non-empty");
    if is_empty_exact(points, s.vertices()) {
        return Ok(s);
    }
    // Rounding defeated the growth step; fall back to a scan.
    (0..n)
        .combinations(m + 1)
        .find(|ids| !points.simplex(ids).is_degenerate() && is_empty_exact(points, ids))
        .map(|ids| AbstractSimplex::new(ids).expect("non-empty"))
        .ok_or_else(|| Error::Degenerate("no Delaunay simplex found".into()))
}

fn is_empty_exact(points: &PointSet, ids: &[VertexId]) -> bool {
    let verts: Vec<&[f64]> = ids.iter().map(|&v| points.point(v).coords()).collect();
    if orient(&verts) == Ordering::Equal {
        return false;
    }
    (0..points.len())
        .filter(|q| !ids.contains(q))
        .all(|q| insphere(&verts, points.point(q)) != Ordering::Greater)
}

/// The vertex completing `ridge` on the side opposite to `apex`, or `None`
/// when `ridge` is a hull facet.
fn pivot(points: &PointSet, ridge: &[VertexId], apex: VertexId, diameter: f64) -> Option<VertexId> {
    let m = points.dim();
    let f0 = points.point(ridge[0]).coords();
    let dirs: Vec<Vec<f64>> = ridge[1..]
        .iter()
        .map(|&i| sub(points.point(i), f0))
        .collect();
    let basis = orthonormal_basis(m, &dirs, DEGENERACY_REL_TOL);
    let towards_apex = reject(&sub(points.point(apex), f0), &basis);
    let v = scale(&towards_apex, -1.0 / norm(&towards_apex));
    // smallest sphere through the ridge: centre in aff(ridge)
    let ridge_centre = if ridge.len() == 1 {
        f0.to_vec()
    } else {
        points
            .simplex(ridge)
            .circumcentre()
            .map(|b| b.centre.0)
            .unwrap_or_else(|_| f0.to_vec())
    };
    let r2 = dist_sq(&ridge_centre, f0);

    let mut verts: Vec<&[f64]> = ridge.iter().map(|&i| points.point(i).coords()).collect();
    verts.push(points.point(apex).coords());
    let apex_side = orient(&verts);

    let mut cands: Vec<(f64, VertexId)> = Vec::new();
    for q in 0..points.len() {
        if q == apex || ridge.contains(&q) {
            continue;
        }
        let h = dot(&v, &sub(points.point(q), f0));
        verts[m] = points.point(q).coords();
        let side = orient(&verts);
        if side == Ordering::Equal || side == apex_side {
            continue;
        }
        let e = dist_sq(&ridge_centre, points.point(q)) - r2;
        let t = if h > 0.0 {
            e / (2.0 * h)
        } else {
            f64::INFINITY
        };
        cands.push((t, q));
    }
    let tmin = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let window = 1e-8 * (diameter + tmin.abs());
    let mut best: Option<VertexId> = None;
    for &(t, q) in &cands {
        if t > tmin + window && tmin.is_finite() {
            continue;
        }
        match best {
            None => best = Some(q),
            Some(b) => {
                verts[m] = points.point(b).coords();
                if insphere(&verts, points.point(q)) == Ordering::Greater {
                    best = Some(q);
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[VertexId]) -> AbstractSimplex {
        AbstractSimplex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn unit_square_is_degenerate_in_both_paths() {
        let pts = PointSet::from_coords(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        for r in [
            delaunay_bruteforce(&pts).unwrap(),
            delaunay_lifted(&pts).unwrap(),
        ] {
            assert!(!r.generic);
            assert_eq!(r.degeneracy_flags, vec![vec![0, 1, 2, 3]]);
            assert_eq!(r.balls.len(), 4);
            assert!(r.min_protection().abs() <= r.tolerance);
        }
    }

    #[test]
    fn four_point_example() {
        let pts = PointSet::from_coords(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [2.0, 2.0]]).unwrap();
        let r = delaunay_bruteforce(&pts).unwrap();
        assert!(r.generic);
        let tops: Vec<AbstractSimplex> = r.top_simplices().cloned().collect();
        assert_eq!(tops, vec![s(&[0, 1, 2]), s(&[1, 2, 3])]);
        let b = r.ball(&s(&[0, 1, 2])).unwrap();
        assert!((b.protection - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(delaunay_lifted(&pts).unwrap().complex, r.complex);
        assert_eq!(r.hull_facets.len(), 4);
    }

    #[test]
    fn rejects_affinely_deficient_sets() {
        let line = PointSet::from_coords(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).unwrap();
        assert!(matches!(
            delaunay_bruteforce(&line),
            Err(Error::AffineDeficient { .. })
        ));
        assert!(matches!(
            delaunay_lifted(&line),
            Err(Error::AffineDeficient { .. })
        ));
    }

    #[test]
    fn one_dimensional_sets() {
        let pts = PointSet::new(vec![
            Point::from([0.0]),
            Point::from([3.0]),
            Point::from([1.0]),
        ])
        .unwrap();
        let r = delaunay_lifted(&pts).unwrap();
        assert_eq!(r.complex, delaunay_bruteforce(&pts).unwrap().complex);
        assert_eq!(r.balls.len(), 2);
        assert_eq!(r.hull_facets, vec![s(&[0]), s(&[1])]);
    }
}
