//! Seeded point set generators.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::delaunay::delaunay_lifted;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::points::PointSet;
use crate::random;

/// A lattice with `dims[k]` points along axis `k`, each coordinate moved by
/// a uniform offset in `[-jitter·spacing, jitter·spacing]`.
pub fn grid(dims: &[usize], spacing: f64, jitter: f64, seed: u64) -> Result<PointSet> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "invalid grid dimensions {dims:?}"
        )));
    }
    if !(spacing > 0.0) || !(0.0..0.5).contains(&jitter) {
        return Err(Error::InvalidArgument(
            "grid needs a positive spacing and jitter in [0, 0.5)".into(),
        ));
    }
    let mut rng = random::stream(seed, 0x67726964);
    let total: usize = dims.iter().product();
    let mut points = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut x = Vec::with_capacity(dims.len());
        for &d in dims {
            x.push((idx % d) as f64 * spacing);
            idx /= d;
        }
        if jitter > 0.0 {
            for c in &mut x {
                *c += rng.random_range(-jitter..=jitter) * spacing;
            }
        }
        points.push(Point(x));
    }
    PointSet::new(points)
}

/// `n` points uniform in the box `[lo, hi]^dim`.
pub fn uniform(n: usize, dim: usize, lo: f64, hi: f64, seed: u64) -> Result<PointSet> {
    if n == 0 || dim == 0 || !(hi > lo) {
        return Err(Error::InvalidArgument(
            "uniform needs n, dim > 0 and lo < hi".into(),
        ));
    }
    let mut rng = random::stream(seed, 0x756e6966);
    let points = (0..n)
        .map(|_| Point((0..dim).map(|_| rng.random_range(lo..hi)).collect()))
        .collect();
    PointSet::new(points)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaSearch {
    /// Minimum Delaunay protection of every candidate.
    pub candidate_deltas: Vec<f64>,
    pub best_index: usize,
    #[serde(skip)]
    pub best: PointSet,
}

/// Best of `k` jittered grids by minimum protection over all Delaunay
/// `m`-simplices. Candidate `i` uses seed `trial_seed(seed, i)`.
pub fn delta_search(
    dims: &[usize],
    spacing: f64,
    jitter: f64,
    k: usize,
    seed: u64,
) -> Result<DeltaSearch> {
    if k == 0 {
        return Err(Error::InvalidArgument("delta search needs k >= 1".into()));
    }
    let candidates: Vec<(PointSet, f64)> = (0..k as u64)
        .into_par_iter()
        .map(|i| {
            let pts = grid(dims, spacing, jitter, crate::perturb::trial_seed(seed, i))?;
            let delta = delaunay_lifted(&pts)?.min_protection();
            Ok((pts, delta))
        })
        .collect::<Result<_>>()?;
    let best_index = (0..k)
        .max_by(|&a, &b| candidates[a].1.total_cmp(&candidates[b].1).then(b.cmp(&a)))
        .expect("k >= 1");
    Ok(DeltaSearch {
        candidate_deltas: candidates.iter().map(|c| c.1).collect(),
        best: candidates[best_index].0.clone(),
        best_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_grid_points() {
        let g = grid(&[6, 6], 1.0, 0.0, 1).unwrap();
        assert_eq!(g.len(), 36);
        assert!(g.iter().all(|p| p.iter().all(|x| x.fract() == 0.0)));
        assert_eq!(
            grid(&[6, 6], 1.0, 0.1, 1).unwrap(),
            grid(&[6, 6], 1.0, 0.1, 1).unwrap()
        );
        assert_ne!(
            grid(&[6, 6], 1.0, 0.1, 1).unwrap(),
            grid(&[6, 6], 1.0, 0.1, 2).unwrap()
        );
        assert!(grid(&[0, 3], 1.0, 0.0, 1).is_err());
    }

    #[test]
    fn delta_search_picks_the_maximum() {
        let s = delta_search(&[4, 4], 1.0, 0.2, 5, 3).unwrap();
        let max = s
            .candidate_deltas
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(s.candidate_deltas[s.best_index], max);
        assert!(max > 0.0);
    }
}
