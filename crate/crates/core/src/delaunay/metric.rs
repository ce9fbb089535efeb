//! Delaunay complexes for perturbed metrics.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_PI_2;

use itertools::Itertools;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{delaunay_lifted, DelaunayBallRecord};
use crate::complex::{AbstractSimplex, SimplicialComplex};
use crate::error::{Error, Result};
use crate::geometry::linalg::{axpy, dist, dot, norm, solve, sub, Matrix};
use crate::geometry::{Point, SimplexGeometry};
use crate::points::{PointSet, VertexId};
use crate::random;

/// Lipschitz constant a displacement field must stay below.
pub const MAX_FIELD_LIPSCHITZ: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    pub wave_vector: Vec<f64>,
    pub phase: f64,
    /// Unit vector along which this wave displaces points.
    pub direction: Vec<f64>,
}

/// `φ(x) = x + (a / W) Σ_w u_w sin(k_w · x + θ_w)`, so `‖φ(x) − x‖ ≤ a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisplacementField {
    pub amplitude: f64,
    pub waves: Vec<Wave>,
}

impl DisplacementField {
    pub fn new(amplitude: f64, waves: Vec<Wave>) -> Result<Self> {
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "amplitude {amplitude} must be non-negative"
            )));
        }
        for w in &waves {
            if w.wave_vector.len() != w.direction.len() {
                return Err(Error::DimensionMismatch {
                    expected: w.wave_vector.len(),
                    found: w.direction.len(),
                });
            }
            if (norm(&w.direction) - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(
                    "wave directions must be unit vectors".into(),
                ));
            }
        }
        let field = Self { amplitude, waves };
        if field.lipschitz() >= MAX_FIELD_LIPSCHITZ {
            return Err(Error::InvalidArgument(format!(
                "displacement Lipschitz constant {} is not below {MAX_FIELD_LIPSCHITZ}",
                field.lipschitz()
            )));
        }
        Ok(field)
    }

    /// The zero field.
    pub fn identity() -> Self {
        Self {
            amplitude: 0.0,
            waves: Vec::new(),
        }
    }

    /// The constant displacement `x ↦ x + t`.
    pub fn translation(t: &[f64]) -> Self {
        let a = norm(t);
        if a == 0.0 {
            return Self::identity();
        }
        Self {
            amplitude: a,
            waves: vec![Wave {
                wave_vector: vec![0.0; t.len()],
                phase: FRAC_PI_2,
                direction: t.iter().map(|x| x / a).collect(),
            }],
        }
    }

    /// `count` waves with random directions, phases and wave vectors of
    /// length `2π / wavelength`.
    pub fn random(
        dim: usize,
        amplitude: f64,
        wavelength: f64,
        count: usize,
        seed: u64,
    ) -> Result<Self> {
        if count == 0 || !(wavelength > 0.0) {
            return Err(Error::InvalidArgument(
                "a random field needs waves and a positive wavelength".into(),
            ));
        }
        let mut rng = random::stream(seed, 0x6d65_7472_6963);
        let k = std::f64::consts::TAU / wavelength;
        let waves = (0..count)
            .map(|_| Wave {
                wave_vector: random::unit_vector(&mut rng, dim)
                    .into_iter()
                    .map(|x| k * x)
                    .collect(),
                phase: rng.random_range(0.0..std::f64::consts::TAU),
                direction: random::unit_vector(&mut rng, dim),
            })
            .collect();
        Self::new(amplitude, waves)
    }

    /// Same waves, different amplitude.
    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self> {
        Self::new(amplitude, self.waves.clone())
    }

    /// Bound on the Lipschitz constant of `φ − id`.
    pub fn lipschitz(&self) -> f64 {
        if self.waves.is_empty() {
            return 0.0;
        }
        self.amplitude * self.waves.iter().map(|w| norm(&w.wave_vector)).sum::<f64>()
            / self.waves.len() as f64
    }

    pub fn displacement(&self, x: &[f64]) -> Vec<f64> {
        let mut d = vec![0.0; x.len()];
        if self.waves.is_empty() {
            return d;
        }
        let w = self.amplitude / self.waves.len() as f64;
        for wave in &self.waves {
            let s = (dot(&wave.wave_vector, x) + wave.phase).sin();
            d = axpy(&d, w * s, &wave.direction);
        }
        d
    }

    pub fn apply(&self, x: &[f64]) -> Point {
        Point(crate::geometry::linalg::add(x, &self.displacement(x)))
    }

    /// `φ⁻¹(y)` by the contraction `x ← y − (φ − id)(x)`.
    pub fn inverse(&self, y: &[f64]) -> Point {
        let mut x = y.to_vec();
        let scale = 1.0 + norm(y);
        for _ in 0..200 {
            let next = sub(y, &self.displacement(&x));
            let step = dist(&next, &x);
            x = next;
            if step <= 1e-16 * scale {
                break;
            }
        }
        Point(x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricKind {
    Euclidean,
    /// `d(x, y) = ‖φ(x) − φ(y)‖`.
    Pullback {
        field: DisplacementField,
    },
    /// `d(x, y) = ‖x − y‖ + a · sin(k · (x + y) + θ) · min(1, ‖x − y‖ / ℓ)`:
    /// symmetric and zero on the diagonal, but the triangle inequality is
    /// not checked.
    AdditiveNoise {
        amplitude: f64,
        length: f64,
        wave_vector: Vec<f64>,
        phase: f64,
    },
}

/// A distance on an axis-aligned box `U` with a bound on its deviation from
/// the Euclidean distance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricModel {
    pub kind: MetricKind,
    /// Certified `sup |d − d_E|`.
    pub rho_bound: f64,
    pub domain_lo: Vec<f64>,
    pub domain_hi: Vec<f64>,
}

impl MetricModel {
    /// The bounding box of `points` inflated by `margin`.
    pub fn domain_around(points: &PointSet, margin: f64) -> (Vec<f64>, Vec<f64>) {
        let (lo, hi) = points.bounding_box();
        (
            lo.iter().map(|x| x - margin).collect(),
            hi.iter().map(|x| x + margin).collect(),
        )
    }

    pub fn euclidean(domain: (Vec<f64>, Vec<f64>)) -> Self {
        Self {
            kind: MetricKind::Euclidean,
            rho_bound: 0.0,
            domain_lo: domain.0,
            domain_hi: domain.1,
        }
    }

    pub fn pullback(field: DisplacementField, domain: (Vec<f64>, Vec<f64>)) -> Self {
        Self {
            rho_bound: 2.0 * field.amplitude,
            kind: MetricKind::Pullback { field },
            domain_lo: domain.0,
            domain_hi: domain.1,
        }
    }

    /// Requires `amplitude < length` so that distances stay positive.
    pub fn additive_noise(
        amplitude: f64,
        length: f64,
        seed: u64,
        domain: (Vec<f64>, Vec<f64>),
    ) -> Result<Self> {
        if !(amplitude >= 0.0) || !(length > amplitude) {
            return Err(Error::InvalidArgument(
                "additive noise needs 0 <= amplitude < length".into(),
            ));
        }
        let dim = domain.0.len();
        let mut rng = random::stream(seed, 0x6e_6f69_7365);
        let k = std::f64::consts::TAU / length;
        let wave_vector = random::unit_vector(&mut rng, dim)
            .into_iter()
            .map(|x| k * x)
            .collect();
        Ok(Self {
            kind: MetricKind::AdditiveNoise {
                amplitude,
                length,
                wave_vector,
                phase: rng.random_range(0.0..std::f64::consts::TAU),
            },
            rho_bound: amplitude,
            domain_lo: domain.0,
            domain_hi: domain.1,
        })
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        match &self.kind {
            MetricKind::Euclidean => dist(x, y),
            MetricKind::Pullback { field } => dist(&field.apply(x), &field.apply(y)),
            MetricKind::AdditiveNoise {
                amplitude,
                length,
                wave_vector,
                phase,
            } => {
                let e = dist(x, y);
                let s: f64 = x
                    .iter()
                    .zip(y)
                    .zip(wave_vector)
                    .map(|((a, b), k)| k * (a + b))
                    .sum();
                e + amplitude * (s + phase).sin() * (e / length).min(1.0)
            }
        }
    }

    /// False for the additive-noise model, whose triangle inequality is
    /// not guaranteed.
    pub fn is_genuine_metric(&self) -> bool {
        !matches!(self.kind, MetricKind::AdditiveNoise { .. })
    }

    /// Euclidean distance from `x` to the boundary of the domain box.
    pub fn distance_to_domain_boundary(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.domain_lo.iter().zip(&self.domain_hi))
            .map(|(v, (lo, hi))| (v - lo).min(hi - v))
            .fold(f64::INFINITY, f64::min)
    }
}

/// A centre equidistant (in the metric) from every vertex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricBall {
    pub centre: Point,
    pub radius: f64,
    /// Largest minus smallest metric distance to the vertices.
    pub spread: f64,
    /// Radius of the ball around the Euclidean circumcentre that was searched.
    pub search_radius: f64,
    pub iterations: usize,
}

fn equidistance_residual(d: &MetricModel, verts: &[Point], c: &[f64]) -> Vec<f64> {
    let d0 = d.distance(c, &verts[0]);
    verts[1..].iter().map(|p| d.distance(c, p) - d0).collect()
}

fn spread(d: &MetricModel, verts: &[Point], c: &[f64]) -> (f64, f64) {
    let ds: Vec<f64> = verts.iter().map(|p| d.distance(c, p)).collect();
    let lo = ds.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (hi - lo, ds.iter().sum::<f64>() / ds.len() as f64)
}

/// Damped Newton iteration with a central-difference Jacobian.
fn newton(
    d: &MetricModel,
    verts: &[Point],
    start: &[f64],
    scale: f64,
    tol: f64,
) -> Option<(Vec<f64>, usize)> {
    let m = start.len();
    let h = 1e-6 * scale;
    let mut c = start.to_vec();
    let mut f = equidistance_residual(d, verts, &c);
    for iter in 0..60 {
        if spread(d, verts, &c).0 < tol {
            return Some((c, iter));
        }
        let mut jac = Matrix::zeros(m, m);
        for k in 0..m {
            let mut cp = c.clone();
            let mut cm = c.clone();
            cp[k] += h;
            cm[k] -= h;
            let fp = equidistance_residual(d, verts, &cp);
            let fm = equidistance_residual(d, verts, &cm);
            for i in 0..m {
                jac[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let step = solve(&jac, &f)?;
        let f_norm = norm(&f);
        let mut lambda = 1.0;
        loop {
            let trial = axpy(&c, -lambda, &step);
            let ft = equidistance_residual(d, verts, &trial);
            if norm(&ft) < f_norm || lambda < 1e-4 {
                c = trial;
                f = ft;
                break;
            }
            lambda /= 2.0;
        }
    }
    (spread(d, verts, &c).0 < tol).then_some((c, 60))
}

/// Finds a point equidistant in `d` from the vertices of a full-dimensional
/// simplex, searching the ball of radius `8ρ/(Υ μ₀)` around the Euclidean
/// circumcentre, where `Υ` is the thickness of the simplex and
/// `μ₀ = L/R` its shortest edge relative to its circumradius.
///
/// Returns `Ok(None)` when no root is found in that ball after a
/// multi-start on a `3^m` grid.
pub fn metric_circumcentre(
    simplex: &SimplexGeometry,
    d: &MetricModel,
) -> Result<Option<MetricBall>> {
    let m = simplex.ambient_dim();
    if simplex.dim() != m {
        return Err(Error::Precondition(format!(
            "metric circumcentre needs a full {m}-simplex, got dimension {}",
            simplex.dim()
        )));
    }
    if simplex.is_degenerate() {
        return Err(Error::Degenerate(
            "metric circumcentre of a degenerate simplex".into(),
        ));
    }
    let metrics = simplex.metrics();
    let euclid = simplex.circumcentre()?;
    let r = euclid.radius;
    let mu0 = metrics.shortest_edge / r;
    let bound = 8.0 * d.rho_bound / (metrics.thickness * mu0);
    let search_radius = bound + 1e-6 * r;
    let tol = 1e-9 * r;
    let verts = simplex.vertices();

    let mut starts = vec![euclid.centre.0.clone()];
    for offsets in std::iter::repeat_n([-1.0, 0.0, 1.0], m).multi_cartesian_product() {
        if offsets.iter().all(|&o| o == 0.0) {
            continue;
        }
        starts.push(
            euclid
                .centre
                .iter()
                .zip(&offsets)
                .map(|(c, o)| c + o * search_radius / 2.0)
                .collect(),
        );
    }
    for start in starts {
        if let Some((c, iterations)) = newton(d, verts, &start, r, tol) {
            if dist(&c, &euclid.centre) <= search_radius {
                let (spread, radius) = spread(d, verts, &c);
                return Ok(Some(MetricBall {
                    centre: Point(c),
                    radius,
                    spread,
                    search_radius,
                    iterations,
                }));
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricPath {
    /// Newton circumcentres for every candidate subset.
    Generic,
    /// Euclidean Delaunay complex of `φ(P)`; pullback and Euclidean models only.
    Pullback,
    Both,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricDelaunayOptions {
    pub epsilon: f64,
    pub path: MetricPath,
}

/// Star of the region in the metric Delaunay complex as computed by one path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricPathResult {
    #[serde(serialize_with = "super::serialize_complex")]
    pub complex: SimplicialComplex,
    /// Metric Delaunay balls of the `m`-simplices in the star; centres are
    /// in the original coordinates.
    pub balls: Vec<DelaunayBallRecord>,
    /// Candidates whose metric circumcentre was not found.
    pub not_found: Vec<AbstractSimplex>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricDelaunayResult {
    pub generic: Option<MetricPathResult>,
    pub pullback: Option<MetricPathResult>,
    /// False when some candidate could not be decided.
    pub certified: bool,
}

impl MetricDelaunayResult {
    /// `Some(true)` when both paths ran and produced the same star.
    pub fn paths_agree(&self) -> Option<bool> {
        match (&self.generic, &self.pullback) {
            (Some(a), Some(b)) => Some(a.complex == b.complex),
            _ => None,
        }
    }

    /// The generic-path star if computed, otherwise the pullback star.
    pub fn primary(&self) -> &MetricPathResult {
        self.generic
            .as_ref()
            .or(self.pullback.as_ref())
            .expect("at least one path runs")
    }
}

/// `St(region; Del_d(P))`.
pub fn metric_delaunay(
    points: &PointSet,
    d: &MetricModel,
    region: &BTreeSet<VertexId>,
    opts: &MetricDelaunayOptions,
) -> Result<MetricDelaunayResult> {
    points.require_full_rank()?;
    if region.is_empty() {
        return Err(Error::InvalidArgument(
            "metric Delaunay needs a non-empty region".into(),
        ));
    }
    if let Some(&v) = region.iter().next_back() {
        if v >= points.len() {
            return Err(Error::InvalidArgument(format!(
                "vertex id {v} out of range"
            )));
        }
    }
    let run_generic = matches!(opts.path, MetricPath::Generic | MetricPath::Both);
    let run_pullback = matches!(opts.path, MetricPath::Pullback | MetricPath::Both);
    let generic = run_generic
        .then(|| generic_path(points, d, region, opts.epsilon))
        .transpose()?;
    let pullback = run_pullback
        .then(|| pullback_path(points, d, region))
        .transpose()?;
    let certified = generic.as_ref().is_none_or(|g| g.not_found.is_empty());
    Ok(MetricDelaunayResult {
        generic,
        pullback,
        certified,
    })
}

fn generic_path(
    points: &PointSet,
    d: &MetricModel,
    region: &BTreeSet<VertexId>,
    epsilon: f64,
) -> Result<MetricPathResult> {
    let m = points.dim();
    let tau = super::tolerance(points);
    let reach = 2.0 * epsilon + 4.0 * d.rho_bound + tau;
    let mut candidates = BTreeSet::new();
    for &p in region {
        let near: Vec<VertexId> = (0..points.len())
            .filter(|&q| q != p && points.point(q).dist(points.point(p)) <= reach)
            .collect();
        for rest in near.iter().copied().combinations(m) {
            let close = rest
                .iter()
                .tuple_combinations()
                .all(|(&a, &b)| points.point(a).dist(points.point(b)) <= reach);
            if close {
                let mut ids = rest;
                ids.push(p);
                candidates.insert(AbstractSimplex::new(ids).expect("non-empty"));
            }
        }
    }
    let candidates: Vec<AbstractSimplex> = candidates.into_iter().collect();
    let outcomes: Vec<(AbstractSimplex, Option<Option<DelaunayBallRecord>>)> = candidates
        .par_iter()
        .map(|s| {
            let geom = points.simplex(s.vertices());
            if geom.is_degenerate() {
                return (s.clone(), Some(None));
            }
            let ball = match metric_circumcentre(&geom, d) {
                Ok(Some(b)) => b,
                _ => return (s.clone(), None),
            };
            let mut protection = f64::INFINITY;
            for (q, pq) in points.iter().enumerate() {
                if !s.contains(q) {
                    protection = protection.min(d.distance(&ball.centre, pq) - ball.radius);
                }
            }
            let rec = (protection > -tau).then(|| DelaunayBallRecord {
                simplex: s.clone(),
                centre: ball.centre,
                radius: ball.radius,
                protection,
            });
            (s.clone(), Some(rec))
        })
        .collect();
    let mut balls = Vec::new();
    let mut not_found = Vec::new();
    for (s, out) in outcomes {
        match out {
            None => not_found.push(s),
            Some(Some(rec)) => balls.push(rec),
            Some(None) => {}
        }
    }
    let complex = SimplicialComplex::from_simplices(balls.iter().map(|b| b.simplex.clone()));
    Ok(MetricPathResult {
        complex,
        balls,
        not_found,
    })
}

fn pullback_path(
    points: &PointSet,
    d: &MetricModel,
    region: &BTreeSet<VertexId>,
) -> Result<MetricPathResult> {
    let field = match &d.kind {
        MetricKind::Euclidean => DisplacementField::identity(),
        MetricKind::Pullback { field } => field.clone(),
        MetricKind::AdditiveNoise { .. } => {
            return Err(Error::InvalidArgument(
                "the pullback path needs a Euclidean or pullback metric".into(),
            ))
        }
    };
    let image = points.map_points(|_, p| field.apply(p))?;
    let del = delaunay_lifted(&image)?;
    let complex = del.complex.star(region)?;
    let by_simplex: BTreeMap<&AbstractSimplex, &DelaunayBallRecord> =
        del.balls.iter().map(|b| (&b.simplex, b)).collect();
    let balls = complex
        .simplices_of_dim(points.dim())
        .map(|s| {
            let b = by_simplex[s];
            DelaunayBallRecord {
                simplex: s.clone(),
                centre: field.inverse(&b.centre),
                radius: b.radius,
                protection: b.protection,
            }
        })
        .collect();
    Ok(MetricPathResult {
        complex,
        balls,
        not_found: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn domain() -> (Vec<f64>, Vec<f64>) {
        (vec![-5.0, -5.0], vec![5.0, 5.0])
    }

    fn triangle() -> SimplexGeometry {
        SimplexGeometry::from_coords(&[[0.1, 0.0], [1.0, 0.2], [0.3, 0.9]]).unwrap()
    }

    #[test]
    fn euclidean_metric_returns_the_circumcentre() {
        let s = triangle();
        let c = s.circumcentre().unwrap();
        let b = metric_circumcentre(&s, &MetricModel::euclidean(domain()))
            .unwrap()
            .unwrap();
        assert!(dist(&b.centre, &c.centre) < 1e-10);
    }

    #[test]
    fn translation_pullback_returns_the_circumcentre() {
        let s = triangle();
        let c = s.circumcentre().unwrap();
        let d = MetricModel::pullback(DisplacementField::translation(&[0.3, -0.2]), domain());
        let b = metric_circumcentre(&s, &d).unwrap().unwrap();
        assert!(dist(&b.centre, &c.centre) < 1e-9);
    }

    #[test]
    fn field_inverse_round_trips() {
        let f = DisplacementField::random(2, 0.02, 1.0, 4, 3).unwrap();
        assert!(f.lipschitz() < MAX_FIELD_LIPSCHITZ);
        let x = [0.3, 0.7];
        let y = f.apply(&x);
        assert!(dist(&f.inverse(&y), &x) < 1e-14);
        assert!(DisplacementField::random(2, 1.0, 1.0, 4, 3).is_err());
    }

    #[test]
    fn additive_noise_is_a_labelled_pseudo_metric() {
        let d = MetricModel::additive_noise(0.01, 0.5, 9, domain()).unwrap();
        assert!(!d.is_genuine_metric());
        let x = [0.2, 0.4];
        let y = [0.9, -0.3];
        assert_eq!(d.distance(&x, &x), 0.0);
        assert_eq!(d.distance(&x, &y), d.distance(&y, &x));
        assert!((d.distance(&x, &y) - dist(&x, &y)).abs() <= 0.01);
    }
}
