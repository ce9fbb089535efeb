//! Convex hull facets as supporting hyperplanes.

use std::cmp::Ordering;

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::complex::AbstractSimplex;
use crate::error::Result;
use crate::geometry::linalg::{dot, norm, orthonormal_basis, reject, scale, sub};
use crate::geometry::predicates::orient;
use crate::geometry::DEGENERACY_REL_TOL;
use crate::points::{PointSet, VertexId};

/// A hull facet with its outward unit normal; the hull lies in
/// `normal · x ≤ offset`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HullFacet {
    pub simplex: AbstractSimplex,
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// The convex hull of a full-rank point set, stored as facet hyperplanes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexHull {
    facets: Vec<HullFacet>,
}

fn centroid(points: &PointSet) -> Vec<f64> {
    let mut c = vec![0.0; points.dim()];
    for p in points.iter() {
        for (ci, x) in c.iter_mut().zip(p.iter()) {
            *ci += x;
        }
    }
    scale(&c, 1.0 / points.len() as f64)
}

impl ConvexHull {
    /// Builds hyperplanes for facets given as `m`-vertex simplices.
    pub fn from_facets(
        points: &PointSet,
        facets: impl IntoIterator<Item = AbstractSimplex>,
    ) -> Self {
        let inside = centroid(points);
        let facets = facets
            .into_iter()
            .map(|simplex| {
                let f0 = points.point(simplex.vertices()[0]);
                let dirs: Vec<Vec<f64>> = simplex.vertices()[1..]
                    .iter()
                    .map(|&v| sub(points.point(v), f0))
                    .collect();
                let basis = orthonormal_basis(points.dim(), &dirs, DEGENERACY_REL_TOL);
                let inward = reject(&sub(&inside, f0), &basis);
                let normal = scale(&inward, -1.0 / norm(&inward));
                let offset = dot(&normal, f0);
                HullFacet {
                    simplex,
                    normal,
                    offset,
                }
            })
            .collect();
        Self { facets }
    }

    /// Enumerates every `m`-subset whose hyperplane supports the point set,
    /// using exact orientation signs.
    pub fn bruteforce(points: &PointSet) -> Result<Self> {
        points.require_full_rank()?;
        let m = points.dim();
        let subsets: Vec<Vec<VertexId>> = (0..points.len()).combinations(m).collect();
        let facets: Vec<AbstractSimplex> = subsets
            .into_par_iter()
            .filter(|ids| is_supporting(points, ids))
            .map(|ids| AbstractSimplex::new(ids).expect("non-empty subset"))
            .collect();
        Ok(Self::from_facets(points, facets))
    }

    pub fn facets(&self) -> &[HullFacet] {
        &self.facets
    }

    /// `min_f (offset_f − n_f · x)`: the distance to the boundary for points
    /// inside the hull, negative outside.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        self.facets
            .iter()
            .map(|f| f.offset - dot(&f.normal, x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.signed_distance(x) >= 0.0
    }
}

fn is_supporting(points: &PointSet, ids: &[VertexId]) -> bool {
    let m = points.dim();
    if m > 1 && points.simplex(ids).is_degenerate() {
        return false;
    }
    let mut side = Ordering::Equal;
    let mut verts: Vec<&[f64]> = ids.iter().map(|&v| points.point(v).coords()).collect();
    verts.push(&[]);
    for q in 0..points.len() {
        if ids.contains(&q) {
            continue;
        }
        verts[m] = points.point(q).coords();
        let o = orient(&verts);
        if o == Ordering::Equal {
            continue;
        }
        if side == Ordering::Equal {
            side = o;
        } else if side != o {
            return false;
        }
    }
    side != Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_hull_distances() {
        let pts =
            PointSet::from_coords(&[[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0], [1.0, 1.0]])
                .unwrap();
        let hull = ConvexHull::bruteforce(&pts).unwrap();
        assert_eq!(hull.facets().len(), 4);
        assert!((hull.signed_distance(&[1.0, 1.0]) - 1.0).abs() < 1e-15);
        assert!((hull.signed_distance(&[0.5, 1.0]) - 0.5).abs() < 1e-15);
        assert!(hull.signed_distance(&[3.0, 1.0]) < 0.0);
        assert!(hull.contains(&[2.0, 2.0]));
    }
}
