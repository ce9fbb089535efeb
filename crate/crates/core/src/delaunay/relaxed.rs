//! The ρ-relaxed Delaunay complex: `σ` is a member iff some centre `c`
//! satisfies `max_{p∈σ} ‖c − p‖ − min_{q∈P} ‖c − q‖ ≤ ρ`.
//!
//! Membership is decided by best-first branch and bound over boxes. The
//! objective is 2-Lipschitz, so a box whose centre value exceeds
//! `ρ + 2·(half diagonal)` cannot contain a witness and is discarded.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::complex::{AbstractSimplex, SimplicialComplex};
use crate::error::{Error, Result};
use crate::geometry::linalg::dist;
use crate::geometry::Point;
use crate::points::{PointSet, VertexId};

#[derive(Clone, Debug, PartialEq)]
pub struct RelaxedOptions {
    /// Sampling radius; sets the search ball (`4ε`) and the candidate
    /// diameter cut-off (`2ε`).
    pub epsilon: f64,
    /// Objective evaluations allowed per candidate before it is reported
    /// as undecided.
    pub max_evaluations: usize,
    /// Acceptance slack added to `ρ` for witnesses; defaults to the
    /// cosphericality tolerance of the point set.
    pub slack: Option<f64>,
}

impl RelaxedOptions {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            max_evaluations: 200_000,
            slack: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum WitnessOutcome {
    /// A centre with objective at most `ρ + slack`.
    Witness { centre: Point, value: f64 },
    /// Every box was discarded: the minimum exceeds `ρ`.
    Excluded { evaluations: usize },
    /// The evaluation budget ran out first.
    Undecided { best_value: f64, evaluations: usize },
    /// A face of an accepted candidate, accepted without a search.
    Inherited,
}

impl WitnessOutcome {
    pub fn accepted(&self) -> bool {
        matches!(
            self,
            WitnessOutcome::Witness { .. } | WitnessOutcome::Inherited
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelaxedResult {
    pub rho: f64,
    /// `St(region; Del^ρ(P))` restricted to the examined candidates.
    #[serde(serialize_with = "super::serialize_complex")]
    pub complex: SimplicialComplex,
    pub decisions: Vec<(AbstractSimplex, WitnessOutcome)>,
    pub undecided: Vec<AbstractSimplex>,
    /// True iff no membership was left undecided.
    pub certified: bool,
}

/// Candidates are the vertex sets of size at most `m + 1` that contain a
/// region vertex and have diameter at most `2ε`.
pub fn relaxed_delaunay(
    points: &PointSet,
    rho: f64,
    region: &BTreeSet<VertexId>,
    opts: &RelaxedOptions,
) -> Result<RelaxedResult> {
    if !(rho >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "relaxation {rho} must be non-negative"
        )));
    }
    if !(opts.epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    if let Some(&v) = region.iter().next_back() {
        if v >= points.len() {
            return Err(Error::InvalidArgument(format!(
                "vertex id {v} out of range"
            )));
        }
    }
    let m = points.dim();
    let tau = super::tolerance(points);
    let slack = opts.slack.unwrap_or(tau);
    let reach = 2.0 * opts.epsilon + tau;

    let mut by_size: Vec<BTreeSet<AbstractSimplex>> = vec![BTreeSet::new(); m + 2];
    for &p in region {
        let near: Vec<VertexId> = (0..points.len())
            .filter(|&q| q != p && points.point(q).dist(points.point(p)) <= reach)
            .collect();
        for k in 0..=m {
            for rest in near.iter().copied().combinations(k) {
                let close = rest
                    .iter()
                    .tuple_combinations()
                    .all(|(&a, &b)| points.point(a).dist(points.point(b)) <= reach);
                if close {
                    let mut ids = rest;
                    ids.push(p);
                    by_size[k + 1].insert(AbstractSimplex::new(ids).expect("non-empty"));
                }
            }
        }
    }

    let mut decisions: Vec<(AbstractSimplex, WitnessOutcome)> = Vec::new();
    let mut covered: BTreeSet<AbstractSimplex> = BTreeSet::new();
    for size in (1..=m + 1).rev() {
        let todo: Vec<&AbstractSimplex> = by_size[size]
            .iter()
            .filter(|s| !covered.contains(*s))
            .collect();
        for s in by_size[size].iter().filter(|s| covered.contains(*s)) {
            decisions.push((s.clone(), WitnessOutcome::Inherited));
        }
        let outcomes: Vec<(AbstractSimplex, WitnessOutcome)> = todo
            .par_iter()
            .map(|s| {
                let out = search_witness(points, s, rho, slack, opts);
                ((*s).clone(), out)
            })
            .collect();
        for (s, out) in outcomes {
            if out.accepted() {
                covered.extend(s.faces());
            }
            decisions.push((s, out));
        }
    }
    decisions.sort_by(|a, b| a.0.cmp(&b.0));
    let undecided: Vec<AbstractSimplex> = decisions
        .iter()
        .filter(|(_, o)| matches!(o, WitnessOutcome::Undecided { .. }))
        .map(|(s, _)| s.clone())
        .collect();
    let complex = SimplicialComplex::from_simplices(
        decisions
            .iter()
            .filter(|(_, o)| o.accepted())
            .map(|(s, _)| s.clone()),
    );
    Ok(RelaxedResult {
        rho,
        complex,
        certified: undecided.is_empty(),
        undecided,
        decisions,
    })
}

struct Cell {
    lower: f64,
    centre: Vec<f64>,
    half: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.lower.total_cmp(&other.lower) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    // reversed so the heap pops the smallest lower bound first
    fn cmp(&self, other: &Self) -> Ordering {
        other.lower.total_cmp(&self.lower)
    }
}

fn search_witness(
    points: &PointSet,
    simplex: &AbstractSimplex,
    rho: f64,
    slack: f64,
    opts: &RelaxedOptions,
) -> WitnessOutcome {
    let m = points.dim();
    let geom = points.simplex(simplex.vertices());
    let origin: Vec<f64> = if simplex.dim() == 0 {
        points.point(simplex.vertices()[0]).coords().to_vec()
    } else {
        match geom.circumcentre() {
            Ok(b) => b.centre.0,
            Err(_) => geom.barycentre().0,
        }
    };
    let radius = 4.0 * opts.epsilon;
    let sqrt_m = (m as f64).sqrt();
    let spread = simplex
        .vertices()
        .iter()
        .map(|&v| dist(points.point(v), &origin))
        .fold(0.0, f64::max);
    let search = radius * (1.0 + sqrt_m);
    let local: Vec<&[f64]> = points
        .iter()
        .filter(|q| dist(q, &origin) <= 2.0 * search + spread)
        .map(|q| q.coords())
        .collect();
    let verts: Vec<&[f64]> = simplex
        .vertices()
        .iter()
        .map(|&v| points.point(v).coords())
        .collect();
    let g = |c: &[f64]| {
        let far = verts.iter().map(|p| dist(c, p)).fold(0.0, f64::max);
        let near = local
            .iter()
            .map(|q| dist(c, q))
            .fold(f64::INFINITY, f64::min);
        far - near
    };

    let mut evaluations = 1;
    let g0 = g(&origin);
    if g0 <= rho + slack {
        return WitnessOutcome::Witness {
            centre: Point(origin),
            value: g0,
        };
    }
    let mut best = g0;
    let mut heap = BinaryHeap::new();
    heap.push(Cell {
        lower: g0 - 2.0 * radius * sqrt_m,
        centre: origin.clone(),
        half: radius,
    });
    while let Some(cell) = heap.pop() {
        if cell.lower > rho {
            break;
        }
        let half = cell.half / 2.0;
        let half_diag = half * sqrt_m;
        for corner in 0..(1usize << m) {
            let centre: Vec<f64> = cell
                .centre
                .iter()
                .enumerate()
                .map(|(k, x)| {
                    if corner >> k & 1 == 1 {
                        x + half
                    } else {
                        x - half
                    }
                })
                .collect();
            if dist(&centre, &origin) - half_diag > radius {
                continue;
            }
            let value = g(&centre);
            evaluations += 1;
            best = best.min(value);
            if value <= rho + slack {
                return WitnessOutcome::Witness {
                    centre: Point(centre),
                    value,
                };
            }
            let lower = value - 2.0 * half_diag;
            if lower <= rho {
                heap.push(Cell {
                    lower,
                    centre,
                    half,
                });
            }
        }
        if evaluations > opts.max_evaluations {
            return WitnessOutcome::Undecided {
                best_value: best,
                evaluations,
            };
        }
    }
    WitnessOutcome::Excluded { evaluations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delaunay::delaunay_bruteforce;

    fn hexagon_with_centre() -> PointSet {
        let mut coords = vec![[0.0, 0.0]];
        for i in 0..6 {
            let a = std::f64::consts::PI / 3.0 * i as f64 + 0.1 * (i as f64).sin();
            let r = 1.0 + 0.07 * i as f64;
            coords.push([r * a.cos(), r * a.sin()]);
        }
        PointSet::from_coords(&coords).unwrap()
    }

    #[test]
    fn zero_relaxation_recovers_the_delaunay_star() {
        let pts = hexagon_with_centre();
        let region = BTreeSet::from([0]);
        let del = delaunay_bruteforce(&pts).unwrap();
        let star = del.complex.star(&region).unwrap();
        let r = relaxed_delaunay(&pts, 0.0, &region, &RelaxedOptions::new(1.5)).unwrap();
        assert!(r.certified);
        assert_eq!(r.complex, star);
    }

    #[test]
    fn huge_relaxation_accepts_every_candidate() {
        let pts = hexagon_with_centre();
        let region = BTreeSet::from([0]);
        let r = relaxed_delaunay(&pts, 10.0, &region, &RelaxedOptions::new(1.5)).unwrap();
        assert!(r.decisions.iter().all(|(_, o)| o.accepted()));
        assert!(relaxed_delaunay(&pts, -1.0, &region, &RelaxedOptions::new(1.5)).is_err());
    }
}
