mod common;

use std::collections::BTreeSet;

use delstab::datasets::{delta_search, grid, uniform};
use delstab::genericity::{deep_interior, sampling_parameters, Analysis, PjSelection};
use delstab::geometry::Point;
use delstab::points::PointSet;
use proptest::prelude::*;

fn generic_grid(seed: u64) -> Analysis {
    let s = delta_search(&[9, 9], 1.0, 0.15, 4, seed).unwrap();
    Analysis::new(s.best).unwrap()
}

/// `inf { e : max_{x ∈ grid, depth(x) ≥ e} d(x, P) ≤ e }` over a uniform
/// `res × res` grid on the bounding box.
fn scan_epsilon(points: &PointSet, res: usize) -> f64 {
    let planes = common::hull_planes(points);
    let (lo, hi) = points.bounding_box();
    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(res * res);
    for i in 0..res {
        for k in 0..res {
            let x = [
                lo[0] + (hi[0] - lo[0]) * i as f64 / (res - 1) as f64,
                lo[1] + (hi[1] - lo[1]) * k as f64 / (res - 1) as f64,
            ];
            let depth = common::hull_depth(&planes, &x);
            if depth >= 0.0 {
                let near = points
                    .iter()
                    .map(|p| common::dist(p.coords(), &x))
                    .fold(f64::INFINITY, f64::min);
                samples.push((depth, near));
            }
        }
    }
    let g = |e: f64| {
        samples
            .iter()
            .filter(|s| s.0 >= e)
            .map(|s| s.1)
            .fold(0.0, f64::max)
    };
    let (mut lo_e, mut hi_e) = (0.0, points.diameter());
    for _ in 0..60 {
        let mid = 0.5 * (lo_e + hi_e);
        if g(mid) > mid {
            lo_e = mid;
        } else {
            hi_e = mid;
        }
    }
    hi_e
}

#[test]
fn sampling_radius_matches_a_grid_scan() {
    let pts = uniform(40, 2, 0.0, 1.0, 11).unwrap();
    let r = sampling_parameters(&pts).unwrap();
    let scan = scan_epsilon(&pts, 400);
    assert!(
        (r.epsilon - scan).abs() < 1e-3,
        "exact {} scan {}",
        r.epsilon,
        scan
    );
    assert!(r.sparsity <= 2.0 * r.epsilon);
    assert!(r.mu0 > 0.0 && r.mu0 <= 2.0);
}

#[test]
fn sampling_needs_full_rank() {
    let two = PointSet::from_coords(&[[0.0, 0.0], [1.0, 1.0]]).unwrap();
    assert!(sampling_parameters(&two).is_err());
}

#[test]
fn deep_interior_matches_direct_distances() {
    let pts = grid(&[9, 9], 1.0, 0.0, 1).unwrap();
    let eps = 0.5f64.sqrt();
    let planes = common::hull_planes(&pts);
    let expected: BTreeSet<usize> = (0..pts.len())
        .filter(|&i| common::hull_depth(&planes, pts.point(i).coords()) >= 4.0 * eps)
        .collect();
    assert_eq!(deep_interior(&pts, eps).unwrap(), expected);
    assert_eq!(expected.len(), 9);

    let circle: Vec<Point> = (0..12)
        .map(|k| {
            let a = k as f64 * std::f64::consts::TAU / 12.0;
            Point(vec![a.cos(), a.sin()])
        })
        .collect();
    assert!(deep_interior(&PointSet::new(circle).unwrap(), 0.1)
        .unwrap()
        .is_empty());

    let lone = PointSet::from_coords(&[
        [-10.0, -10.0],
        [10.0, -10.0],
        [10.0, 10.0],
        [-10.0, 10.0],
        [0.0, 0.0],
    ])
    .unwrap();
    assert_eq!(deep_interior(&lone, 2.5).unwrap(), BTreeSet::from([4]));
    assert!(deep_interior(&lone, 2.6).unwrap().is_empty());
}

#[test]
fn central_vertex_of_a_jittered_grid() {
    let a = generic_grid(5);
    let centre = 40;
    assert!(a.deep_interior.contains(&centre));
    let pj = BTreeSet::from([centre]);
    let (prot, class) = a.classify(&pj).unwrap();
    assert!(prot.generic && prot.delta_measured > 0.0);
    for s in &class.audited {
        let v = common::coords(&a.points, s.vertices());
        let (_, r) = common::circumball(&v);
        assert!(r < a.sampling.epsilon);
        let p = common::protection(&a.points, s.vertices());
        assert!((p - prot.per_simplex[s]).abs() < 1e-9);
    }
    let oracle_delta = class
        .audited
        .iter()
        .map(|s| common::protection(&a.points, s.vertices()))
        .fold(f64::INFINITY, f64::min);
    assert!((oracle_delta - prot.delta_measured).abs() < 1e-9);
    assert!(a.classify(&BTreeSet::new()).is_err());
}

#[test]
fn planted_cocircular_square_is_not_generic() {
    let mut pts: Vec<Point> = delta_search(&[9, 9], 1.0, 0.15, 4, 2)
        .unwrap()
        .best
        .points()
        .to_vec();
    // replace the four vertices around the central cell by an exact square
    for (id, xy) in [
        (40, [4.0, 4.0]),
        (41, [5.0, 4.0]),
        (49, [4.0, 5.0]),
        (50, [5.0, 5.0]),
    ] {
        pts[id] = Point(xy.to_vec());
    }
    let a = Analysis::new(PointSet::new(pts).unwrap()).unwrap();
    let pj = BTreeSet::from([40]);
    let (prot, _) = a.classify(&pj).unwrap();
    assert!(!prot.generic);
    assert!(prot.delta_measured <= prot.tolerance);
}

#[test]
fn thickness_certificate_on_generic_grids() {
    for seed in 0..5 {
        let a = generic_grid(seed);
        let pj = a.select(&PjSelection::auto());
        let cert = a.thickness_certificate(&pj).unwrap();
        let (prot, class) = a.classify(&pj).unwrap();
        let bound = 3f64.sqrt() * prot.nu_tilde * prot.nu_tilde / 4.0;
        assert!((cert.upsilon0 - bound).abs() < 1e-15);
        for s in class.safe_simplices.iter().filter(|s| s.dim() > 0) {
            let t = common::thickness(&common::coords(&a.points, s.vertices()));
            assert!(t >= bound - 1e-9);
        }
        assert!(cert.valid && cert.margin >= -1e-9);
    }
}

#[test]
fn certificate_bound_for_a_given_ratio() {
    let nu: f64 = 0.1;
    assert!((3f64.sqrt() * nu * nu / 4.0 - 0.00433).abs() < 1e-5);
}

#[test]
fn lemma_audit_passes_on_generic_grids() {
    for seed in 10..14 {
        let a = generic_grid(seed);
        let pj = a.select(&PjSelection::auto());
        let audit = a.lemma_audit(&pj).unwrap();
        assert!(audit.generic);
        assert!(audit.checks.all_pass(), "{:?}", audit.checks);
        assert!(audit.simplices.iter().all(|s| s.secure));
        let height = 3f64.sqrt() * audit.delta * audit.delta / (2.0 * audit.epsilon);
        for s in &audit.simplices {
            let v = common::coords(&a.points, s.vertices.vertices());
            assert!(common::shortest_edge(&v) > audit.delta - 1e-9);
            for i in 0..v.len() {
                assert!(common::altitude(&v, i) > height - 1e-9);
            }
        }
    }
}

#[test]
fn exact_grid_audit_makes_no_claims() {
    let a = Analysis::new(grid(&[9, 9], 1.0, 0.0, 1).unwrap()).unwrap();
    let audit = a.lemma_audit(&a.select(&PjSelection::auto())).unwrap();
    assert!(!audit.generic && audit.simplices.is_empty());
    assert!(a
        .thickness_certificate(&a.select(&PjSelection::auto()))
        .is_err());
}

#[test]
fn altitude_margin_collapses_with_protection() {
    // the central cell is a unit square with one corner pushed out by t
    let base = delta_search(&[9, 9], 1.0, 0.15, 4, 7).unwrap().best;
    let mut deltas = Vec::new();
    let mut heights = Vec::new();
    for t in [0.2, 0.05, 0.01, 0.002] {
        let mut pts = base.points().to_vec();
        for (id, xy) in [
            (40, [4.0, 4.0]),
            (41, [5.0, 4.0]),
            (49, [4.0, 5.0]),
            (50, [5.0 + t, 5.0 + t]),
        ] {
            pts[id] = Point(xy.to_vec());
        }
        let a = Analysis::new(PointSet::new(pts).unwrap()).unwrap();
        let audit = a.lemma_audit(&BTreeSet::from([40])).unwrap();
        assert!(audit.generic && audit.checks.all_pass());
        deltas.push(audit.delta);
        heights.push(3f64.sqrt() * audit.delta * audit.delta / (2.0 * audit.epsilon));
    }
    assert!(deltas.last().unwrap() < &(deltas[0] / 10.0));
    assert!(*heights.last().unwrap() < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn measured_parameters_follow_similarities(angle in 0.0..std::f64::consts::TAU, scale in 0.3f64..4.0, tx in -5.0f64..5.0, ty in -5.0f64..5.0) {
        let a = generic_grid(3);
        let (c, s) = (angle.cos(), angle.sin());
        let moved = a.points.map_points(|_, p| Point(vec![scale * (c * p[0] - s * p[1]) + tx, scale * (s * p[0] + c * p[1]) + ty])).unwrap();
        let b = Analysis::new(moved).unwrap();
        prop_assert!((b.sampling.epsilon - scale * a.sampling.epsilon).abs() < 1e-9 * scale);
        prop_assert!((b.sampling.sparsity - scale * a.sampling.sparsity).abs() < 1e-9 * scale);
        prop_assert_eq!(&a.deep_interior, &b.deep_interior);
        let pj = a.select(&PjSelection::auto());
        let (pa, _) = a.classify(&pj).unwrap();
        let (pb, _) = b.classify(&pj).unwrap();
        prop_assert!((pb.delta_measured - scale * pa.delta_measured).abs() < 1e-8 * scale);
        prop_assert!((pb.nu_tilde - pa.nu_tilde).abs() < 1e-7);
        prop_assert!((b.sampling.mu0 - a.sampling.mu0).abs() < 1e-9);
    }
}
