//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use delstab::points::PointSet;

pub type Simplex = Vec<usize>;

pub fn edge_matrix(verts: &[Vec<f64>]) -> DMatrix<f64> {
    let m = verts[0].len();
    let j = verts.len() - 1;
    DMatrix::from_fn(m, j, |r, c| verts[c + 1][r] - verts[0][r])
}

/// `j`-volume from the Gram determinant.
pub fn volume(verts: &[Vec<f64>]) -> f64 {
    let j = verts.len() - 1;
    if j == 0 {
        return 1.0;
    }
    let e = edge_matrix(verts);
    let g = e.transpose() * &e;
    let fact: f64 = (1..=j).map(|k| k as f64).product();
    g.determinant().max(0.0).sqrt() / fact
}

/// Distance from vertex `i` to the affine hull of the opposite face,
/// `j · vol_j(σ) / vol_{j−1}(face)`.
pub fn altitude(verts: &[Vec<f64>], i: usize) -> f64 {
    let j = verts.len() - 1;
    let face: Vec<Vec<f64>> = verts
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != i)
        .map(|(_, v)| v.clone())
        .collect();
    j as f64 * volume(verts) / volume(&face)
}

pub fn longest_edge(verts: &[Vec<f64>]) -> f64 {
    verts
        .iter()
        .tuple_combinations()
        .map(|(a, b)| dist(a, b))
        .fold(0.0, f64::max)
}

pub fn shortest_edge(verts: &[Vec<f64>]) -> f64 {
    verts
        .iter()
        .tuple_combinations()
        .map(|(a, b)| dist(a, b))
        .fold(f64::INFINITY, f64::min)
}

pub fn thickness(verts: &[Vec<f64>]) -> f64 {
    let j = verts.len() - 1;
    if j == 0 {
        return 1.0;
    }
    let min_alt = (0..=j)
        .map(|i| altitude(verts, i))
        .fold(f64::INFINITY, f64::min);
    min_alt / (j as f64 * longest_edge(verts))
}

pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = a
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Circumball of a full-dimensional simplex by solving
/// `2 (p_i − p_0) · c = |p_i|² − |p_0|²`.
pub fn circumball(verts: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let m = verts[0].len();
    let a = DMatrix::from_fn(m, m, |r, c| 2.0 * (verts[r + 1][c] - verts[0][c]));
    let sq = |p: &[f64]| p.iter().map(|x| x * x).sum::<f64>();
    let b = DVector::from_fn(m, |r, _| sq(&verts[r + 1]) - sq(&verts[0]));
    let c = a.lu().solve(&b).expect("non-degenerate simplex");
    let c: Vec<f64> = c.iter().copied().collect();
    let r = dist(&c, &verts[0]);
    (c, r)
}

pub fn coords(points: &PointSet, ids: &[usize]) -> Vec<Vec<f64>> {
    ids.iter()
        .map(|&i| points.point(i).coords().to_vec())
        .collect()
}

/// `min_{q ∉ σ} ‖q − c‖ − r` for the circumball of `σ`.
pub fn protection(points: &PointSet, simplex: &[usize]) -> f64 {
    let (c, r) = circumball(&coords(points, simplex));
    (0..points.len())
        .filter(|q| !simplex.contains(q))
        .map(|q| dist(points.point(q).coords(), &c) - r)
        .fold(f64::INFINITY, f64::min)
}

/// Delaunay `m`-simplices by exhaustive search over `(m+1)`-subsets with a
/// strict emptiness test at relative tolerance `1e-9` of the diameter.
pub fn delaunay_top(points: &PointSet) -> BTreeSet<Simplex> {
    let m = points.dim();
    let tau = 1e-9 * points.diameter();
    (0..points.len())
        .combinations(m + 1)
        .filter(|ids| {
            let v = coords(points, ids);
            volume(&v) > 1e-12 * longest_edge(&v).powi(m as i32) && protection(points, ids) > -tau
        })
        .collect()
}

/// Closed star of `q`: every maximal simplex containing a vertex of `q`,
/// with all of its faces.
pub fn closed_star(top: &BTreeSet<Simplex>, q: &BTreeSet<usize>) -> BTreeSet<Simplex> {
    let mut out = BTreeSet::new();
    for s in top.iter().filter(|s| s.iter().any(|v| q.contains(v))) {
        for k in 1..=s.len() {
            for f in s.iter().copied().combinations(k) {
                out.insert(f);
            }
        }
    }
    out
}

pub fn complex_set(k: &delstab::complex::SimplicialComplex) -> BTreeSet<Simplex> {
    k.iter().map(|s| s.vertices().to_vec()).collect()
}

/// Supporting hyperplanes `n · x ≤ b` (unit `n`) through `m`-subsets of
/// the points, found exhaustively.
pub fn hull_planes(points: &PointSet) -> Vec<(Vec<f64>, f64)> {
    let m = points.dim();
    let scale = points.diameter();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for ids in (0..points.len()).combinations(m) {
        let v = coords(points, &ids);
        let e = DMatrix::from_fn(m, m - 1, |r, c| v[c + 1][r] - v[0][r]);
        let rows = DMatrix::from_fn(m, m, |r, c| if r < m - 1 { e[(c, r)] } else { 0.0 });
        let svd = rows.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        if m > 1 && svd.singular_values[order[m - 2]] < 1e-12 * scale {
            continue;
        }
        let k = order[m - 1];
        let n: Vec<f64> = vt.row(k).iter().copied().collect();
        let b: f64 = n.iter().zip(&v[0]).map(|(x, y)| x * y).sum();
        let side: Vec<f64> = points
            .iter()
            .map(|p| p.coords().iter().zip(&n).map(|(x, y)| x * y).sum::<f64>() - b)
            .collect();
        let pos = side.iter().any(|s| *s > 1e-12 * scale);
        let neg = side.iter().any(|s| *s < -1e-12 * scale);
        if pos && neg {
            continue;
        }
        let (n, b) = if pos {
            (n.iter().map(|x| -x).collect(), -b)
        } else {
            (n, b)
        };
        planes.push((n, b));
    }
    planes
}

/// `min (b − n · x)` over the hull planes: the distance to the boundary for
/// points inside.
pub fn hull_depth(planes: &[(Vec<f64>, f64)], x: &[f64]) -> f64 {
    planes
        .iter()
        .map(|(n, b)| b - n.iter().zip(x).map(|(a, c)| a * c).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}
