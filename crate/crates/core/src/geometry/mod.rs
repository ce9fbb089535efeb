//! Simplex geometry: circumcentres, altitudes, thickness, singular values,
//! subspace angles and the almost-circumcentre estimates.
//!
//! Everything here is computed in double precision. A simplex is treated as
//! degenerate when the smallest singular value of its edge matrix falls
//! below [`DEGENERACY_REL_TOL`] times the largest.

pub mod linalg;
pub mod predicates;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use linalg::{dist, dot, norm, orthonormal_basis, project, reject, sub, svd, Matrix};

/// Rank threshold, relative to the largest singular value.
pub const DEGENERACY_REL_TOL: f64 = 1e-12;

/// Relative residual allowed when accepting a least-squares circumcentre.
const CIRCUMCENTRE_RESIDUAL: f64 = 1e-10;

/// A point of `R^m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn dist(&self, other: &Point) -> f64 {
        dist(&self.0, &other.0)
    }

    pub fn translated(&self, v: &[f64]) -> Point {
        Point(linalg::add(&self.0, v))
    }
}

impl std::ops::Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(v: [f64; N]) -> Self {
        Point(v.to_vec())
    }
}

/// A centre and radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub centre: Point,
    pub radius: f64,
}

/// An ordered list of `j + 1` vertices. Vertices need not be affinely
/// independent.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexGeometry {
    vertices: Vec<Point>,
}

/// Derived measurements of a simplex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplexMetrics {
    pub longest_edge: f64,
    pub shortest_edge: f64,
    pub circumcentre: Option<Point>,
    pub circumradius: Option<f64>,
    /// `altitudes[i]` is the distance from vertex `i` to the affine hull of
    /// the opposite face.
    pub altitudes: Vec<f64>,
    pub thickness: f64,
    /// Singular values of the edge matrix, non-increasing, padded with zeros
    /// to length `j`.
    pub singular_values: Vec<f64>,
    pub is_degenerate: bool,
}

impl SimplexGeometry {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(Error::InvalidArgument(
                "simplex needs at least one vertex".into(),
            ));
        };
        let m = first.dim();
        for (i, v) in vertices.iter().enumerate() {
            if v.dim() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: v.dim(),
                });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite(i));
            }
        }
        Ok(Self { vertices })
    }

    /// Convenience constructor from raw coordinate arrays.
    pub fn from_coords<const N: usize>(coords: &[[f64; N]]) -> Result<Self> {
        Self::new(coords.iter().map(|c| Point::from(*c)).collect())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Combinatorial dimension `j`.
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn ambient_dim(&self) -> usize {
        self.vertices[0].dim()
    }

    /// The `m x j` matrix whose columns are `p_i - p_0`.
    pub fn edge_matrix(&self) -> Matrix {
        let p0 = &self.vertices[0];
        let cols: Vec<Vec<f64>> = self.vertices[1..].iter().map(|p| sub(p, p0)).collect();
        Matrix::from_columns(self.ambient_dim(), &cols)
    }

    pub fn face(&self, keep: &[usize]) -> SimplexGeometry {
        SimplexGeometry {
            vertices: keep.iter().map(|&i| self.vertices[i].clone()).collect(),
        }
    }

    /// The face opposite vertex `i`.
    pub fn opposite_face(&self, i: usize) -> SimplexGeometry {
        let keep: Vec<usize> = (0..self.vertices.len()).filter(|&k| k != i).collect();
        self.face(&keep)
    }

    pub fn longest_edge(&self) -> f64 {
        self.edge_lengths().fold(0.0, f64::max)
    }

    pub fn shortest_edge(&self) -> f64 {
        self.edge_lengths().fold(f64::INFINITY, f64::min)
    }

    fn edge_lengths(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.vertices.len();
        (0..n)
            .flat_map(move |i| ((i + 1)..n).map(move |k| self.vertices[i].dist(&self.vertices[k])))
    }

    pub fn barycentre(&self) -> Point {
        let m = self.ambient_dim();
        let w = 1.0 / self.vertices.len() as f64;
        let mut c = vec![0.0; m];
        for v in &self.vertices {
            for (ci, x) in c.iter_mut().zip(v.iter()) {
                *ci += w * x;
            }
        }
        Point(c)
    }

    /// Orthonormal basis of the direction space of `aff(σ)`.
    pub fn affine_basis(&self) -> Vec<Vec<f64>> {
        let p0 = &self.vertices[0];
        let dirs: Vec<Vec<f64>> = self.vertices[1..].iter().map(|p| sub(p, p0)).collect();
        orthonormal_basis(self.ambient_dim(), &dirs, DEGENERACY_REL_TOL)
    }

    /// Distance from `x` to the affine hull of the vertices.
    pub fn dist_to_affine_hull(&self, x: &[f64]) -> f64 {
        let basis = self.affine_basis();
        norm(&reject(&sub(x, &self.vertices[0]), &basis))
    }

    /// Whether the edge matrix is rank deficient under the relative
    /// singular-value test.
    pub fn is_degenerate(&self) -> bool {
        let j = self.dim();
        if j == 0 {
            return false;
        }
        let s = self.singular_values();
        s[j - 1] < DEGENERACY_REL_TOL * s[0] || s[0] == 0.0
    }

    pub fn singular_values(&self) -> Vec<f64> {
        let j = self.dim();
        if j == 0 {
            return Vec::new();
        }
        let mut s = svd(&self.edge_matrix()).s;
        s.resize(j, 0.0);
        s
    }

    /// Circumcentre and circumradius: the smallest ball with every vertex on
    /// its boundary. Its centre lies in `aff(σ)`.
    ///
    /// Affinely dependent vertex sets are accepted only if they are
    /// cospherical, in which case the least-squares solution of the
    /// equidistance system is returned.
    pub fn circumcentre(&self) -> Result<Ball> {
        let j = self.dim();
        if j == 0 {
            return Err(Error::InvalidArgument("circumcentre needs j >= 1".into()));
        }
        let p = self.edge_matrix();
        let d = svd(&p);
        let p0 = &self.vertices[0];
        // transpose(P) x = b with b_i = |p_i - p0|^2 / 2, solved as x = U S^+ V^T b.
        let b: Vec<f64> = (0..j)
            .map(|i| 0.5 * dot(p.column(i), p.column(i)))
            .collect();
        let rank = d.rank(DEGENERACY_REL_TOL);
        let full_rank = rank == j;
        let mut x = vec![0.0; self.ambient_dim()];
        for k in 0..rank {
            let coef = dot(d.v.column(k), &b) / d.s[k];
            x = linalg::axpy(&x, coef, d.u.column(k));
        }
        let centre = Point(linalg::add(p0, &x));
        let radius = norm(&x);
        if !full_rank {
            let delta = self.longest_edge();
            let spread = self
                .vertices
                .iter()
                .map(|v| (v.dist(&centre) - radius).abs())
                .fold(0.0, f64::max);
            if spread > CIRCUMCENTRE_RESIDUAL * delta {
                return Err(Error::Degenerate(
                    "affinely dependent vertices are not cospherical".into(),
                ));
            }
        }
        Ok(Ball { centre, radius })
    }

    /// Altitude of vertex `i`: distance to the affine hull of the opposite face.
    pub fn altitude(&self, i: usize) -> f64 {
        let face = self.opposite_face(i);
        face.dist_to_affine_hull(&self.vertices[i])
    }

    /// `min_i D(p_i, σ) / (j Δ)`, 1 for a vertex and 0 for a degenerate simplex.
    pub fn thickness(&self) -> f64 {
        self.metrics().thickness
    }

    pub fn metrics(&self) -> SimplexMetrics {
        let j = self.dim();
        if j == 0 {
            return SimplexMetrics {
                longest_edge: 0.0,
                shortest_edge: 0.0,
                circumcentre: Some(self.vertices[0].clone()),
                circumradius: Some(0.0),
                altitudes: Vec::new(),
                thickness: 1.0,
                singular_values: Vec::new(),
                is_degenerate: false,
            };
        }
        let longest = self.longest_edge();
        let shortest = self.shortest_edge();
        let singular_values = self.singular_values();
        let is_degenerate = singular_values[0] == 0.0
            || singular_values[j - 1] < DEGENERACY_REL_TOL * singular_values[0];
        let altitudes: Vec<f64> = (0..=j).map(|i| self.altitude(i)).collect();
        let thickness = if is_degenerate {
            0.0
        } else {
            let min_alt = altitudes.iter().copied().fold(f64::INFINITY, f64::min);
            (min_alt / (j as f64 * longest)).min(1.0)
        };
        let (circumcentre, circumradius) = match self.circumcentre() {
            Ok(b) => (Some(b.centre), Some(b.radius)),
            Err(_) => (None, None),
        };
        SimplexMetrics {
            longest_edge: longest,
            shortest_edge: shortest,
            circumcentre,
            circumradius,
            altitudes,
            thickness,
            singular_values,
            is_degenerate,
        }
    }

    fn require_non_degenerate(&self, what: &str) -> Result<()> {
        if self.dim() == 0 {
            return Err(Error::InvalidArgument(format!("{what} needs j >= 1")));
        }
        if self.is_degenerate() {
            return Err(Error::Degenerate(format!(
                "{what} rejects degenerate simplices"
            )));
        }
        Ok(())
    }

    /// Compares the smallest singular value of the edge matrix with
    /// `sqrt(j) Υ Δ`.
    pub fn verify_singular_value_bound(&self) -> Result<SingularValueBound> {
        self.require_non_degenerate("singular value bound")?;
        let m = self.metrics();
        let j = self.dim();
        let smallest = m.singular_values[j - 1];
        let bound = (j as f64).sqrt() * m.thickness * m.longest_edge;
        Ok(SingularValueBound {
            smallest,
            largest: m.singular_values[0],
            bound,
            upper_bound: (j as f64).sqrt() * m.longest_edge,
            holds: smallest >= bound - 1e-9 * m.longest_edge,
        })
    }

    /// Bounds the angle between `aff(σ)` and a nearby flat `h`.
    pub fn whitney_bound_check(&self, h: &FlatSubspace) -> Result<WhitneyCheck> {
        self.require_non_degenerate("Whitney bound")?;
        if h.ambient_dim() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: h.ambient_dim(),
            });
        }
        if h.dim() < self.dim() {
            return Err(Error::InvalidArgument(format!(
                "flat of dimension {} cannot contain directions of a {}-simplex",
                h.dim(),
                self.dim()
            )));
        }
        let aff = FlatSubspace::affine_hull(&self.vertices)?;
        let sin_angle = subspace_angle(&aff, h)?.sin();
        let eta = self
            .vertices
            .iter()
            .map(|p| h.distance(p))
            .fold(0.0, f64::max);
        let m = self.metrics();
        let bound = 2.0 * eta / (m.thickness * m.longest_edge);
        Ok(WhitneyCheck {
            sin_angle,
            eta,
            bound,
            holds: sin_angle <= bound + 1e-9,
        })
    }

    /// Distance from `x` to the space `N(σ)` of circumscribing-ball centres,
    /// together with the two almost-centre estimates.
    pub fn almost_centre_distance(&self, x: &[f64]) -> Result<AlmostCentre> {
        self.require_non_degenerate("almost-centre distance")?;
        let ball = self.circumcentre()?;
        let basis = self.affine_basis();
        let dist_to_n = norm(&project(&sub(x, &ball.centre), &basis));

        let dists: Vec<f64> = self.vertices.iter().map(|p| dist(p, x)).collect();
        let dmax = dists.iter().copied().fold(0.0, f64::max);
        let dmin = dists.iter().copied().fold(f64::INFINITY, f64::min);
        let sq_spread = dists
            .iter()
            .map(|d| d * d)
            .fold(f64::NEG_INFINITY, f64::max)
            - dists.iter().map(|d| d * d).fold(f64::INFINITY, f64::min);
        let m = self.metrics();
        let scale = m.thickness * m.longest_edge;
        let bound_sq = sq_spread / (2.0 * scale);
        let bound_centre = dmax * (dmax - dmin) / scale;
        let slack = 1e-9 * m.longest_edge.max(1.0);
        Ok(AlmostCentre {
            dist_to_n,
            xi_sq: sq_spread,
            xi: dmax - dmin,
            bound_sq,
            bound_centre,
            holds: dist_to_n <= bound_sq.min(bound_centre) + slack,
        })
    }

    /// Compares the barycentric in-radius thickness `r(σ)/Δ` with `j/(j+1) Υ`.
    pub fn munkres_relation_check(&self) -> Result<MunkresCheck> {
        self.require_non_degenerate("Munkres relation")?;
        let j = self.dim();
        let b = self.barycentre();
        let inradius = (0..=j)
            .map(|i| self.opposite_face(i).dist_to_affine_hull(&b))
            .fold(f64::INFINITY, f64::min);
        let m = self.metrics();
        let munkres = inradius / m.longest_edge;
        let scaled = j as f64 / (j as f64 + 1.0) * m.thickness;
        Ok(MunkresCheck {
            munkres_thickness: munkres,
            scaled_thickness: scaled,
            holds: (munkres - scaled).abs() <= 1e-9 * scaled.max(f64::MIN_POSITIVE),
        })
    }

    /// `P^+ = (P^T P)^{-1} P^T`, computed through the normal equations so it
    /// stays independent of the SVD.
    pub fn pseudo_inverse(&self) -> Result<Matrix> {
        self.require_non_degenerate("pseudo-inverse")?;
        let p = self.edge_matrix();
        let pt = p.transpose();
        let gram = pt.mul(&p);
        let inv = linalg::inverse(&gram)
            .ok_or_else(|| Error::Degenerate("singular Gram matrix".into()))?;
        Ok(inv.mul(&pt))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularValueBound {
    /// `s_j(P)`
    pub smallest: f64,
    /// `s_1(P)`
    pub largest: f64,
    /// `sqrt(j) Υ Δ`
    pub bound: f64,
    /// `sqrt(j) Δ`, an upper bound for `s_1(P)`.
    pub upper_bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WhitneyCheck {
    pub sin_angle: f64,
    pub eta: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlmostCentre {
    pub dist_to_n: f64,
    /// `max |‖p_i − x‖² − ‖p_k − x‖²|`
    pub xi_sq: f64,
    /// `max |‖p_i − x‖ − ‖p_k − x‖|`
    pub xi: f64,
    pub bound_sq: f64,
    pub bound_centre: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MunkresCheck {
    pub munkres_thickness: f64,
    pub scaled_thickness: f64,
    pub holds: bool,
}

/// An affine flat given by a base point and an orthonormal basis of its
/// direction space.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatSubspace {
    base_point: Point,
    basis: Vec<Vec<f64>>,
}

impl FlatSubspace {
    /// Flat through `base_point` spanned by `directions` (orthonormalized).
    pub fn new(base_point: Point, directions: &[Vec<f64>]) -> Result<Self> {
        let m = base_point.dim();
        if let Some(d) = directions.iter().find(|d| d.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: d.len(),
            });
        }
        let basis = orthonormal_basis(m, directions, DEGENERACY_REL_TOL);
        Ok(Self { base_point, basis })
    }

    /// The affine hull of a point list.
    pub fn affine_hull(points: &[Point]) -> Result<Self> {
        let Some(p0) = points.first() else {
            return Err(Error::InvalidArgument("empty point list".into()));
        };
        let dirs: Vec<Vec<f64>> = points[1..].iter().map(|p| sub(p, p0)).collect();
        Self::new(p0.clone(), &dirs)
    }

    pub fn base_point(&self) -> &Point {
        &self.base_point
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.base_point.dim()
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        norm(&reject(&sub(x, &self.base_point), &self.basis))
    }

    pub fn project(&self, x: &[f64]) -> Point {
        let rel = sub(x, &self.base_point);
        Point(linalg::add(&self.base_point, &project(&rel, &self.basis)))
    }
}

/// Largest principal angle between the direction spaces of `u` and `v`,
/// `asin sup_{|x|=1, x∈U} |x − π_V x|`. Requires `dim u ≤ dim v`.
pub fn subspace_angle(u: &FlatSubspace, v: &FlatSubspace) -> Result<f64> {
    if u.ambient_dim() != v.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: u.ambient_dim(),
            found: v.ambient_dim(),
        });
    }
    if u.dim() > v.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            found: u.dim(),
        });
    }
    if u.dim() == 0 {
        return Ok(0.0);
    }
    let cols: Vec<Vec<f64>> = u.basis.iter().map(|b| reject(b, &v.basis)).collect();
    let x = Matrix::from_columns(u.ambient_dim(), &cols);
    let s1 = svd(&x).s[0];
    Ok(s1.min(1.0).asin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn circumcentre_right_triangle() {
        let s = SimplexGeometry::from_coords(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let b = s.circumcentre().unwrap();
        assert!(close(b.centre[0], 0.5, 1e-15) && close(b.centre[1], 0.5, 1e-15));
        assert!(close(b.radius, SQRT_2 / 2.0, 1e-15));
    }

    #[test]
    fn circumcentre_standard_tetrahedron() {
        let s = SimplexGeometry::from_coords(&[
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ])
        .unwrap();
        let b = s.circumcentre().unwrap();
        for x in b.centre.iter() {
            assert!(close(*x, 0.5, 1e-15));
        }
        assert!(close(b.radius, 3f64.sqrt() / 2.0, 1e-15));
    }

    #[test]
    fn circumcentre_of_lower_dimensional_simplex_lies_in_affine_hull() {
        let s = SimplexGeometry::from_coords(&[[0.0, 0.0, 1.0], [2.0, 0.0, 1.0]]).unwrap();
        let b = s.circumcentre().unwrap();
        assert_eq!(b.centre.coords(), &[1.0, 0.0, 1.0]);
        assert!(close(b.radius, 1.0, 1e-15));
    }

    #[test]
    fn circumcentre_degenerate_cases() {
        let collinear =
            SimplexGeometry::from_coords(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).unwrap();
        assert!(matches!(
            collinear.circumcentre(),
            Err(Error::Degenerate(_))
        ));

        // four cocircular points in the plane: a degenerate 3-simplex that is cospherical
        let square =
            SimplexGeometry::from_coords(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
                .unwrap();
        let b = square.circumcentre().unwrap();
        assert!(close(b.centre[0], 0.5, 1e-12) && close(b.centre[1], 0.5, 1e-12));
        assert!(close(b.radius, SQRT_2 / 2.0, 1e-12));
        assert!(square.is_degenerate());
    }

    #[test]
    fn thickness_closed_forms() {
        let eq = SimplexGeometry::from_coords(&[[0.0, 0.0], [1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]])
            .unwrap();
        assert!(close(eq.thickness(), 3f64.sqrt() / 4.0, 1e-14));

        let right = SimplexGeometry::from_coords(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let m = right.metrics();
        assert!(close(m.altitudes[0], SQRT_2 / 2.0, 1e-15));
        assert!(close(m.altitudes[1], 1.0, 1e-15));
        assert!(close(m.altitudes[2], 1.0, 1e-15));
        assert!(close(m.thickness, 0.25, 1e-15));
        assert!(!m.is_degenerate);

        let collinear =
            SimplexGeometry::from_coords(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).unwrap();
        let m = collinear.metrics();
        assert_eq!(m.thickness, 0.0);
        assert!(m.is_degenerate);
        assert!(m.circumcentre.is_none());

        let vertex = SimplexGeometry::from_coords(&[[3.0, 1.0]]).unwrap();
        assert_eq!(vertex.thickness(), 1.0);
    }

    #[test]
    fn singular_value_bound_examples() {
        let eq = SimplexGeometry::from_coords(&[[0.0, 0.0], [1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]])
            .unwrap();
        let c = eq.verify_singular_value_bound().unwrap();
        assert!(close(c.smallest, 0.5f64.sqrt(), 1e-14));
        assert!(close(c.bound, SQRT_2 * 3f64.sqrt() / 4.0, 1e-14));
        assert!(c.holds);

        let right = SimplexGeometry::from_coords(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let c = right.verify_singular_value_bound().unwrap();
        assert!(close(c.smallest, 1.0, 1e-15));
        assert!(close(c.bound, 0.5, 1e-15));
        assert!(c.holds);

        let flat = SimplexGeometry::from_coords(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).unwrap();
        assert!(flat.verify_singular_value_bound().is_err());
    }

    #[test]
    fn subspace_angle_examples() {
        let x_axis = FlatSubspace::new(Point::origin(2), &[vec![1.0, 0.0]]).unwrap();
        assert_eq!(subspace_angle(&x_axis, &x_axis).unwrap(), 0.0);
        let theta = 0.3f64;
        let rotated =
            FlatSubspace::new(Point::origin(2), &[vec![theta.cos(), theta.sin()]]).unwrap();
        assert!(close(
            subspace_angle(&rotated, &x_axis).unwrap(),
            theta,
            1e-14
        ));
        let y_axis = FlatSubspace::new(Point::from([5.0, 1.0]), &[vec![0.0, 2.0]]).unwrap();
        assert!(close(
            subspace_angle(&y_axis, &x_axis).unwrap(),
            FRAC_PI_2,
            1e-14
        ));
        let plane = FlatSubspace::new(Point::origin(2), &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(subspace_angle(&plane, &x_axis).is_err());
    }

    #[test]
    fn whitney_examples() {
        let x_axis = FlatSubspace::new(Point::origin(2), &[vec![1.0, 0.0]]).unwrap();
        let on = SimplexGeometry::from_coords(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let c = on.whitney_bound_check(&x_axis).unwrap();
        assert_eq!(c.sin_angle, 0.0);
        assert_eq!(c.bound, 0.0);
        assert!(c.holds);

        let h = 0.1;
        let tilted = SimplexGeometry::from_coords(&[[0.0, 0.0], [1.0, h]]).unwrap();
        let c = tilted.whitney_bound_check(&x_axis).unwrap();
        let len = (1.0f64 + h * h).sqrt();
        assert!(close(c.sin_angle, h / len, 1e-14));
        assert!(close(c.bound, 2.0 * h / len, 1e-14));
        assert!(c.holds);
    }

    #[test]
    fn almost_centre_examples() {
        let s = SimplexGeometry::from_coords(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.2, 0.9, 0.0]])
            .unwrap();
        let c = s.circumcentre().unwrap();
        let at_centre = s.almost_centre_distance(&c.centre).unwrap();
        assert!(at_centre.dist_to_n < 1e-14);
        assert!(at_centre.bound_sq >= 0.0 && at_centre.holds);
        // moving along the normal to the triangle's plane stays inside N(σ)
        let off = c.centre.translated(&[0.0, 0.0, 0.7]);
        let r = s.almost_centre_distance(&off).unwrap();
        assert!(r.dist_to_n < 1e-14);
        assert!(r.holds);
    }

    #[test]
    fn munkres_examples() {
        let eq = SimplexGeometry::from_coords(&[[0.0, 0.0], [1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]])
            .unwrap();
        let c = eq.munkres_relation_check().unwrap();
        assert!(close(c.munkres_thickness, 3f64.sqrt() / 6.0, 1e-14));
        assert!(c.holds);
        let right = SimplexGeometry::from_coords(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let c = right.munkres_relation_check().unwrap();
        assert!(close(c.munkres_thickness, 1.0 / 6.0, 1e-15));
        assert!(c.holds);
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let r = SimplexGeometry::new(vec![Point::from([0.0, 0.0]), Point::from([1.0, 0.0, 0.0])]);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
        let r = SimplexGeometry::new(vec![Point::from([f64::NAN, 0.0])]);
        assert!(matches!(r, Err(Error::NonFinite(0))));
    }
}
