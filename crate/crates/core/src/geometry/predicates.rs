//! Orientation and in-sphere predicates.
//!
//! Each predicate first evaluates its determinant in floating point and
//! trusts the sign only when it clears a Hadamard-style error bound. Close
//! calls are re-evaluated exactly over the rationals; every finite `f64` is
//! a dyadic rational, so the exact path is always available.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::cmp::Ordering;

/// Relative threshold under which the floating-point determinant is not trusted.
const FILTER: f64 = 1e-10;

fn det_f64(mut rows: Vec<Vec<f64>>) -> f64 {
    let n = rows.len();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| rows[a][col].abs().total_cmp(&rows[b][col].abs()))
            .unwrap();
        if rows[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            rows.swap(piv, col);
            det = -det;
        }
        det *= rows[col][col];
        for r in (col + 1)..n {
            let f = rows[r][col] / rows[col][col];
            for c in col..n {
                rows[r][c] -= f * rows[col][c];
            }
        }
    }
    det
}

fn hadamard(rows: &[Vec<f64>]) -> f64 {
    rows.iter()
        .map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt())
        .product()
}

fn to_rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite coordinate")
}

/// Exact determinant sign by fraction-based Gaussian elimination.
fn det_sign_exact(rows: Vec<Vec<BigRational>>) -> Ordering {
    let mut rows = rows;
    let n = rows.len();
    let mut sign = Ordering::Greater;
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !rows[r][col].is_zero()) else {
            return Ordering::Equal;
        };
        if piv != col {
            rows.swap(piv, col);
            sign = sign.reverse();
        }
        if rows[col][col].is_negative() {
            sign = sign.reverse();
        }
        for r in (col + 1)..n {
            if rows[r][col].is_zero() {
                continue;
            }
            let f = &rows[r][col] / &rows[col][col];
            for c in col..n {
                let t = &f * &rows[col][c];
                rows[r][c] -= t;
            }
        }
    }
    sign
}

fn filtered_sign(rows_f: Vec<Vec<f64>>, exact: impl FnOnce() -> Vec<Vec<BigRational>>) -> Ordering {
    let bound = hadamard(&rows_f);
    let d = det_f64(rows_f);
    if d.is_finite() && d.abs() > FILTER * bound {
        return d.partial_cmp(&0.0).unwrap();
    }
    det_sign_exact(exact())
}

/// Sign of `det[p_1 - p_0, ..., p_d - p_0]` for `d + 1` points in `R^d`.
pub fn orient(points: &[&[f64]]) -> Ordering {
    let d = points.len() - 1;
    assert!(
        points.iter().all(|p| p.len() == d),
        "orient needs d+1 points in R^d"
    );
    let rows_f: Vec<Vec<f64>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(points[0]).map(|(a, b)| a - b).collect())
        .collect();
    filtered_sign(rows_f, || {
        let base: Vec<BigRational> = points[0].iter().map(|&x| to_rational(x)).collect();
        points[1..]
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&base)
                    .map(|(&a, b)| to_rational(a) - b)
                    .collect()
            })
            .collect()
    })
}

fn lifted_rows_f64(simplex: &[&[f64]], q: &[f64]) -> Vec<Vec<f64>> {
    simplex
        .iter()
        .map(|p| {
            let mut row: Vec<f64> = p.iter().zip(q).map(|(a, b)| a - b).collect();
            let sq = row.iter().map(|x| x * x).sum();
            row.push(sq);
            row
        })
        .collect()
}

fn lifted_sign(simplex: &[&[f64]], q: &[f64]) -> Ordering {
    filtered_sign(lifted_rows_f64(simplex, q), || {
        let qr: Vec<BigRational> = q.iter().map(|&x| to_rational(x)).collect();
        simplex
            .iter()
            .map(|p| {
                let mut row: Vec<BigRational> = p
                    .iter()
                    .zip(&qr)
                    .map(|(&a, b)| to_rational(a) - b)
                    .collect();
                let sq = row
                    .iter()
                    .fold(BigRational::from_integer(BigInt::zero()), |acc, x| {
                        acc + x * x
                    });
                row.push(sq);
                row
            })
            .collect()
    })
}

/// Sign convention of the lifted determinant in dimension `d`: evaluates the
/// raw predicate on the standard simplex with its barycentre, which is inside.
fn lifted_convention(d: usize) -> Ordering {
    let mut pts = vec![vec![0.0; d]];
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        pts.push(e);
    }
    let bary = vec![1.0 / (d as f64 + 1.0); d];
    let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
    let raw = combine(lifted_sign(&refs, &bary), orient(&refs));
    debug_assert_ne!(raw, Ordering::Equal);
    raw
}

fn combine(a: Ordering, b: Ordering) -> Ordering {
    match (a, b) {
        (Ordering::Equal, _) | (_, Ordering::Equal) => Ordering::Equal,
        (x, y) if x == y => Ordering::Greater,
        _ => Ordering::Less,
    }
}

/// Position of `q` relative to the circumsphere of a full-dimensional simplex
/// (`d + 1` points in `R^d`): `Greater` strictly inside, `Equal` on the
/// sphere, `Less` strictly outside. Returns `Equal` for a degenerate simplex.
pub fn insphere(simplex: &[&[f64]], q: &[f64]) -> Ordering {
    let d = q.len();
    assert_eq!(simplex.len(), d + 1, "insphere needs d+1 points in R^d");
    let o = orient(simplex);
    if o == Ordering::Equal {
        return Ordering::Equal;
    }
    let raw = combine(lifted_sign(simplex, q), o);
    combine(raw, lifted_convention(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orientation_2d() {
        let a = [0.0, 0.0];
        let b = [1.0, 0.0];
        let c = [0.0, 1.0];
        assert_eq!(orient(&[&a, &b, &c]), Ordering::Greater);
        assert_eq!(orient(&[&a, &c, &b]), Ordering::Less);
        assert_eq!(orient(&[&a, &b, &[2.0, 0.0]]), Ordering::Equal);
    }

    #[test]
    fn orientation_near_collinear_is_exact() {
        let a = [0.5, 0.5];
        let b = [12.0, 12.0];
        let c = [24.0, 24.0 + 2f64.powi(-48)];
        assert_eq!(orient(&[&a, &b, &c]), Ordering::Greater);
        let c2 = [24.0, 24.0];
        assert_eq!(orient(&[&a, &b, &c2]), Ordering::Equal);
    }

    #[test]
    fn insphere_2d_and_3d() {
        let tri: [&[f64]; 3] = [&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]];
        assert_eq!(insphere(&tri, &[0.5, 0.5]), Ordering::Greater);
        assert_eq!(insphere(&tri, &[1.0, 1.0]), Ordering::Equal);
        assert_eq!(insphere(&tri, &[2.0, 2.0]), Ordering::Less);
        let rev: [&[f64]; 3] = [tri[0], tri[2], tri[1]];
        assert_eq!(insphere(&rev, &[0.5, 0.5]), Ordering::Greater);

        let tet: [&[f64]; 4] = [
            &[0.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[0.0, 0.0, 1.0],
        ];
        assert_eq!(insphere(&tet, &[0.5, 0.5, 0.5]), Ordering::Greater);
        assert_eq!(insphere(&tet, &[1.0, 1.0, 0.0]), Ordering::Equal);
        assert_eq!(insphere(&tet, &[1.0, 1.0, 1.0]), Ordering::Equal);
        assert_eq!(insphere(&tet, &[2.0, 2.0, 2.0]), Ordering::Less);
    }
}
