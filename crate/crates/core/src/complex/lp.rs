//! Exact linear programming over the rationals, sized for simplex-pair
//! intersection questions (a dozen variables at most).

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Outcome of `maximize c^T x  s.t.  A x = b, x ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal(BigRational),
}

/// Two-phase tableau simplex with Bland's rule, so it terminates on the
/// degenerate vertices these problems are full of.
pub fn maximize(a: &[Vec<BigRational>], b: &[BigRational], c: &[BigRational]) -> LpOutcome {
    let rows = a.len();
    let n = c.len();
    // Tableau columns: n structural, rows artificial, then rhs.
    let width = n + rows + 1;
    let mut t: Vec<Vec<BigRational>> = Vec::with_capacity(rows);
    for (i, row) in a.iter().enumerate() {
        let flip = b[i].is_negative();
        let mut r = vec![BigRational::zero(); width];
        for j in 0..n {
            r[j] = if flip {
                -row[j].clone()
            } else {
                row[j].clone()
            };
        }
        r[n + i] = BigRational::one();
        r[width - 1] = if flip { -b[i].clone() } else { b[i].clone() };
        t.push(r);
    }
    let mut basis: Vec<usize> = (n..n + rows).collect();

    // Phase one: maximize -(sum of artificials).
    let mut phase1 = vec![BigRational::zero(); n + rows];
    for v in phase1.iter_mut().skip(n) {
        *v = -BigRational::one();
    }
    if run(&mut t, &mut basis, &phase1, n + rows).is_none() {
        return LpOutcome::Unbounded;
    }
    let infeas: BigRational = basis
        .iter()
        .enumerate()
        .filter(|(_, &bj)| bj >= n)
        .map(|(i, _)| t[i][width - 1].clone())
        .fold(BigRational::zero(), |acc, x| acc + x);
    if infeas.is_positive() {
        return LpOutcome::Infeasible;
    }
    // Drive remaining (zero-valued) artificials out of the basis.
    for i in 0..rows {
        if basis[i] < n {
            continue;
        }
        if let Some(j) = (0..n).find(|&j| !t[i][j].is_zero()) {
            pivot(&mut t, &mut basis, i, j);
        }
    }

    let mut obj = c.to_vec();
    obj.extend(std::iter::repeat_n(BigRational::zero(), rows));
    // Artificials may no longer enter.
    match run(&mut t, &mut basis, &obj, n) {
        None => LpOutcome::Unbounded,
        Some(()) => {
            let value = basis
                .iter()
                .enumerate()
                .filter(|(_, &bj)| bj < n)
                .map(|(i, &bj)| &c[bj] * &t[i][width - 1])
                .fold(BigRational::zero(), |acc, x| acc + x);
            LpOutcome::Optimal(value)
        }
    }
}

/// Runs simplex iterations for objective `obj`, allowing only columns below
/// `enter_limit` to enter. Returns `None` when unbounded.
fn run(
    t: &mut [Vec<BigRational>],
    basis: &mut [usize],
    obj: &[BigRational],
    enter_limit: usize,
) -> Option<()> {
    let rows = t.len();
    let width = t.first().map_or(0, Vec::len);
    loop {
        // reduced cost r_j = c_j - c_B^T column_j; enter on the lowest index with r_j > 0
        let entering = (0..enter_limit).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let mut r = obj[j].clone();
            for i in 0..rows {
                let cb = &obj[basis[i]];
                if !cb.is_zero() && !t[i][j].is_zero() {
                    r -= cb * &t[i][j];
                }
            }
            r.is_positive()
        });
        let Some(j) = entering else {
            return Some(());
        };
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..rows {
            if t[i][j].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][j];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (i, _) = leave?;
        pivot(t, basis, i, j);
    }
}

fn pivot(t: &mut [Vec<BigRational>], basis: &mut [usize], row: usize, col: usize) {
    let p = t[row][col].clone();
    for v in t[row].iter_mut() {
        *v /= &p;
    }
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i == row || r[col].is_zero() {
            continue;
        }
        let f = r[col].clone();
        for (x, y) in r.iter_mut().zip(&pivot_row) {
            if !y.is_zero() {
                *x -= &f * y;
            }
        }
    }
    basis[row] = col;
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn small_problems() {
        // max x + y  s.t. x + 2y + s = 4, 3x + y + t = 6
        let a = vec![vec![q(1), q(2), q(1), q(0)], vec![q(3), q(1), q(0), q(1)]];
        let out = maximize(&a, &[q(4), q(6)], &[q(1), q(1), q(0), q(0)]);
        assert_eq!(
            out,
            LpOutcome::Optimal(BigRational::new(BigInt::from(14), BigInt::from(5)))
        );

        // x + y = 1 and x + y = 2 is infeasible
        let a = vec![vec![q(1), q(1)], vec![q(1), q(1)]];
        assert_eq!(
            maximize(&a, &[q(1), q(2)], &[q(0), q(0)]),
            LpOutcome::Infeasible
        );

        // x - y = 0 with max x is unbounded
        let a = vec![vec![q(1), q(-1)]];
        assert_eq!(maximize(&a, &[q(0)], &[q(1), q(0)]), LpOutcome::Unbounded);
    }
}
