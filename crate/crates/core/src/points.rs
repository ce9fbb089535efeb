use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::linalg::{self, svd, Matrix};
use crate::geometry::{Point, SimplexGeometry, DEGENERACY_REL_TOL};

/// Index of a point in its owning [`PointSet`].
pub type VertexId = usize;

/// An ordered, duplicate-free list of points in `R^m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    points: Vec<Point>,
    dim: usize,
}

impl PointSet {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::InvalidArgument("empty point set".into()));
        };
        let dim = first.dim();
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "points need at least one coordinate".into(),
            ));
        }
        for (i, p) in points.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
            if !p.is_finite() {
                return Err(Error::NonFinite(i));
            }
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| {
            points[a]
                .iter()
                .zip(points[b].iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for w in order.windows(2) {
            if points[w[0]] == points[w[1]] {
                let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
                return Err(Error::DuplicatePoint(a, b));
            }
        }
        Ok(Self { points, dim })
    }

    pub fn from_coords<const N: usize>(coords: &[[f64; N]]) -> Result<Self> {
        Self::new(coords.iter().map(|c| Point::from(*c)).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Ambient dimension `m`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, id: VertexId) -> &Point {
        &self.points[id]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    /// Geometric simplex spanned by the given vertices.
    pub fn simplex(&self, ids: &[VertexId]) -> SimplexGeometry {
        SimplexGeometry::new(ids.iter().map(|&i| self.points[i].clone()).collect())
            .expect("point set invariants guarantee a valid simplex")
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.len() {
            for k in (i + 1)..self.len() {
                d = d.max(self.points[i].dist(&self.points[k]));
            }
        }
        d
    }

    /// Minimum pairwise distance.
    pub fn sparsity(&self) -> f64 {
        let mut d = f64::INFINITY;
        for i in 0..self.len() {
            for k in (i + 1)..self.len() {
                d = d.min(self.points[i].dist(&self.points[k]));
            }
        }
        d
    }

    /// Dimension of the affine hull.
    pub fn affine_rank(&self) -> usize {
        if self.len() < 2 {
            return 0;
        }
        let p0 = &self.points[0];
        let cols: Vec<Vec<f64>> = self.points[1..]
            .iter()
            .map(|p| linalg::sub(p, p0))
            .collect();
        svd(&Matrix::from_columns(self.dim, &cols)).rank(DEGENERACY_REL_TOL)
    }

    /// Errors unless `aff(P) = R^m` and `n ≥ m + 1`.
    pub fn require_full_rank(&self) -> Result<()> {
        let rank = self.affine_rank();
        if self.len() < self.dim + 1 || rank < self.dim {
            return Err(Error::AffineDeficient {
                rank,
                dim: self.dim,
            });
        }
        Ok(())
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in &self.points {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Applies `f` to every point, keeping vertex ids.
    pub fn map_points(&self, f: impl Fn(VertexId, &Point) -> Point) -> Result<PointSet> {
        PointSet::new(
            self.points
                .iter()
                .enumerate()
                .map(|(i, p)| f(i, p))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_mixed_dimensions() {
        let r = PointSet::from_coords(&[[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]]);
        assert!(matches!(r, Err(Error::DuplicatePoint(0, 2))));
        let r = PointSet::new(vec![Point::from([0.0, 0.0]), Point::from([1.0])]);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
        assert!(PointSet::new(vec![]).is_err());
    }

    #[test]
    fn affine_rank_detects_collinear_sets() {
        let line = PointSet::from_coords(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).unwrap();
        assert_eq!(line.affine_rank(), 1);
        assert!(matches!(
            line.require_full_rank(),
            Err(Error::AffineDeficient { rank: 1, dim: 2 })
        ));
        let two = PointSet::from_coords(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        assert!(two.require_full_rank().is_err());
        let tri = PointSet::from_coords(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!(tri.require_full_rank().is_ok());
        assert_eq!(tri.sparsity(), 1.0);
        assert_eq!(tri.diameter(), 2f64.sqrt());
    }
}
