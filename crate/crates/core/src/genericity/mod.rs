//! Sampling parameters, protection audits and the thickness certificate.

mod sampling;

pub use sampling::{SamplingReport, MAX_SAMPLING_DIM};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::complex::{AbstractSimplex, SimplicialComplex};
use crate::delaunay::{delaunay_lifted, ConvexHull, DelaunayResult};
use crate::error::{Error, Result};
use crate::points::{PointSet, VertexId};

/// Relative tolerance on thickness comparisons.
pub const THICKNESS_TOL: f64 = 1e-9;

/// Factor applied to the measured sampling radius wherever a strict bound
/// `d(x, P) < ε` or `R(σ) < ε` is needed.
pub const EPSILON_INFLATION: f64 = 1.0 + 1e-9;

/// How the subset `P_J` of deep interior points is chosen.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PjSelection {
    /// Every deep interior point.
    Auto(AutoTag),
    Ids(Vec<VertexId>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

impl PjSelection {
    pub fn auto() -> Self {
        PjSelection::Auto(AutoTag::Auto)
    }

    /// Parses `auto` or a comma-separated id list.
    pub fn parse(s: &str) -> Result<Self> {
        if s.trim() == "auto" {
            return Ok(Self::auto());
        }
        let ids: std::result::Result<Vec<VertexId>, _> = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse())
            .collect();
        ids.map(PjSelection::Ids)
            .map_err(|e| Error::InvalidArgument(format!("invalid vertex list {s:?}: {e}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtectionReport {
    /// Protection of every audited `m`-simplex.
    #[serde(serialize_with = "serialize_simplex_map")]
    pub per_simplex: BTreeMap<AbstractSimplex, f64>,
    /// Minimum protection over the audited simplices.
    pub delta_measured: f64,
    /// `min(delta_measured, ε)`.
    pub delta: f64,
    /// `δ / ε`, clamped to `[0, 1]`.
    pub nu_tilde: f64,
    pub generic: bool,
    pub tolerance: f64,
}

fn serialize_simplex_map<S: serde::Serializer>(
    map: &BTreeMap<AbstractSimplex, f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(map.len()))?;
    for (k, v) in map {
        seq.serialize_element(&(k, v))?;
    }
    seq.end()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SafeInteriorClassification {
    /// Deep interior points: distance at least `4ε` from the hull boundary.
    pub p_i: BTreeSet<VertexId>,
    pub p_j: BTreeSet<VertexId>,
    /// `St(P_J; Del(P))`.
    #[serde(serialize_with = "crate::delaunay::serialize_complex")]
    pub safe_simplices: SimplicialComplex,
    /// `m`-simplices of `St(St(P_J))`.
    pub audited: Vec<AbstractSimplex>,
    /// Largest circumradius among the audited simplices.
    pub max_audited_radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThicknessWitness {
    pub simplex: AbstractSimplex,
    pub thickness: f64,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThicknessCertificate {
    /// `√3 ν̃² / 4`.
    pub upsilon0: f64,
    pub nu_tilde: f64,
    pub min_thickness: f64,
    /// `min_thickness − upsilon0`.
    pub margin: f64,
    pub witnesses: Vec<ThicknessWitness>,
    pub valid: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CheckCount {
    pub pass: usize,
    pub fail: usize,
}

impl CheckCount {
    fn record(&mut self, ok: bool) {
        if ok {
            self.pass += 1;
        } else {
            self.fail += 1;
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AuditChecks {
    /// Shortest edge above `δ`.
    pub separation: CheckCount,
    /// Every altitude of an `m`-simplex above `√3δ²/(2ε)`.
    pub altitude: CheckCount,
    /// Circumradius below `ε` for simplices with a `2ε`-deep vertex.
    pub circumradius: CheckCount,
    /// Thickness at least `√3ν̃²/4`.
    pub thickness: CheckCount,
}

impl AuditChecks {
    pub fn all_pass(&self) -> bool {
        [
            self.separation,
            self.altitude,
            self.circumradius,
            self.thickness,
        ]
        .iter()
        .all(|c| c.fail == 0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditedSimplex {
    pub vertices: AbstractSimplex,
    pub radius: f64,
    pub protection: f64,
    pub thickness: f64,
    pub secure: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaAudit {
    pub epsilon: f64,
    pub sparsity: f64,
    pub mu0: f64,
    pub delta: f64,
    pub nu_tilde: f64,
    pub upsilon0: f64,
    pub generic: bool,
    /// Safe interior `m`-simplices.
    pub simplices: Vec<AuditedSimplex>,
    pub checks: AuditChecks,
    /// Smallest `min altitude − √3δ²/(2ε)` over safe `m`-simplices.
    pub altitude_margin: f64,
}

/// Parameters under which the `m`-simplices of a star are secure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SecureParameters {
    pub delta: f64,
    /// Measured sampling radius inflated by [`EPSILON_INFLATION`].
    pub epsilon: f64,
    pub upsilon0: f64,
    pub mu0: f64,
    pub nu_tilde: f64,
    pub mode: ParameterMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParameterMode {
    /// Smallest thickness and shortest edge actually present in the star.
    Measured,
    /// `Υ₀ = √3ν̃²/4`, `μ₀ = ν̃`.
    Certified,
}

/// Everything derived from a point set that the audits share.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub points: PointSet,
    pub delaunay: DelaunayResult,
    pub hull: ConvexHull,
    pub sampling: SamplingReport,
    pub deep_interior: BTreeSet<VertexId>,
}

impl Analysis {
    pub fn new(points: PointSet) -> Result<Self> {
        points.require_full_rank()?;
        let delaunay = delaunay_lifted(&points)?;
        let hull = delaunay.hull(&points);
        let sampling = sampling::sampling_report(&points, &delaunay, &hull)?;
        let deep_interior = deep_interior_with(&points, &hull, sampling.epsilon);
        Ok(Self {
            points,
            delaunay,
            hull,
            sampling,
            deep_interior,
        })
    }

    pub fn tolerance(&self) -> f64 {
        self.delaunay.tolerance
    }

    pub fn select(&self, sel: &PjSelection) -> BTreeSet<VertexId> {
        match sel {
            PjSelection::Auto(_) => self.deep_interior.clone(),
            PjSelection::Ids(ids) => ids.iter().copied().collect(),
        }
    }

    pub fn classify(
        &self,
        pj: &BTreeSet<VertexId>,
    ) -> Result<(ProtectionReport, SafeInteriorClassification)> {
        if pj.is_empty() {
            return Err(Error::Precondition("P_J is empty".into()));
        }
        if let Some(v) = pj.iter().find(|v| !self.deep_interior.contains(v)) {
            return Err(Error::Precondition(format!(
                "vertex {v} is not a deep interior point"
            )));
        }
        let eps = self.sampling.epsilon;
        let tau = self.tolerance();
        let safe = self.delaunay.complex.star(pj)?;
        let two_ring = self.delaunay.complex.star_of_subcomplex(&safe)?;
        let audited: Vec<AbstractSimplex> = two_ring
            .simplices_of_dim(self.points.dim())
            .cloned()
            .collect();
        let mut per_simplex = BTreeMap::new();
        let mut max_audited_radius: f64 = 0.0;
        for s in &audited {
            let b = self
                .delaunay
                .ball(s)
                .expect("every Delaunay m-simplex has a ball");
            per_simplex.insert(s.clone(), b.protection);
            max_audited_radius = max_audited_radius.max(b.radius);
        }
        let delta_measured = per_simplex.values().copied().fold(f64::INFINITY, f64::min);
        let delta = delta_measured.min(eps);
        let report = ProtectionReport {
            per_simplex,
            delta_measured,
            delta,
            nu_tilde: (delta.max(0.0) / eps).min(1.0),
            generic: delta_measured > tau,
            tolerance: tau,
        };
        let class = SafeInteriorClassification {
            p_i: self.deep_interior.clone(),
            p_j: pj.clone(),
            safe_simplices: safe,
            audited,
            max_audited_radius,
        };
        Ok((report, class))
    }

    pub fn thickness_certificate(&self, pj: &BTreeSet<VertexId>) -> Result<ThicknessCertificate> {
        let (prot, class) = self.classify(pj)?;
        if !prot.generic || prot.nu_tilde <= 0.0 {
            return Err(Error::Precondition(format!(
                "point set is not generic for P_J (delta = {:e})",
                prot.delta_measured
            )));
        }
        let upsilon0 = 3f64.sqrt() * prot.nu_tilde * prot.nu_tilde / 4.0;
        let witnesses: Vec<ThicknessWitness> = class
            .safe_simplices
            .iter()
            .filter(|s| s.dim() > 0)
            .map(|s| {
                let thickness = self.points.simplex(s.vertices()).thickness();
                ThicknessWitness {
                    simplex: s.clone(),
                    thickness,
                    passes: thickness >= upsilon0 - THICKNESS_TOL,
                }
            })
            .collect();
        let min_thickness = witnesses
            .iter()
            .map(|w| w.thickness)
            .fold(f64::INFINITY, f64::min);
        Ok(ThicknessCertificate {
            upsilon0,
            nu_tilde: prot.nu_tilde,
            min_thickness,
            margin: min_thickness - upsilon0,
            valid: witnesses.iter().all(|w| w.passes),
            witnesses,
        })
    }

    pub fn lemma_audit(&self, pj: &BTreeSet<VertexId>) -> Result<LemmaAudit> {
        let (prot, class) = self.classify(pj)?;
        let eps = self.sampling.epsilon;
        let tau = self.tolerance();
        let delta = prot.delta;
        let nu = prot.nu_tilde;
        let upsilon0 = 3f64.sqrt() * nu * nu / 4.0;
        let mut audit = LemmaAudit {
            epsilon: eps,
            sparsity: self.sampling.sparsity,
            mu0: self.sampling.mu0,
            delta,
            nu_tilde: nu,
            upsilon0,
            generic: prot.generic,
            simplices: Vec::new(),
            checks: AuditChecks::default(),
            altitude_margin: f64::INFINITY,
        };
        if !prot.generic {
            return Ok(audit);
        }
        let m = self.points.dim();
        let height = 3f64.sqrt() * delta * delta / (2.0 * eps);
        for s in class.safe_simplices.iter().filter(|s| s.dim() > 0) {
            let geom = self.points.simplex(s.vertices());
            let metrics = geom.metrics();
            audit
                .checks
                .separation
                .record(metrics.shortest_edge > delta - tau);
            audit
                .checks
                .thickness
                .record(metrics.thickness >= upsilon0 - THICKNESS_TOL);
            let deep = s
                .vertices()
                .iter()
                .any(|&v| self.hull.signed_distance(self.points.point(v)) >= 2.0 * eps);
            let radius = metrics.circumradius.unwrap_or(f64::INFINITY);
            if deep {
                audit
                    .checks
                    .circumradius
                    .record(radius < eps * EPSILON_INFLATION + tau);
            }
            if s.dim() == m {
                let min_alt = metrics
                    .altitudes
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min);
                audit.altitude_margin = audit.altitude_margin.min(min_alt - height);
                audit.checks.altitude.record(min_alt > height - tau);
                let protection = prot.per_simplex[s];
                let secure = protection >= delta - tau
                    && metrics.thickness >= upsilon0 - THICKNESS_TOL
                    && radius < eps * EPSILON_INFLATION
                    && metrics.shortest_edge >= nu * eps - tau;
                audit.simplices.push(AuditedSimplex {
                    vertices: s.clone(),
                    radius,
                    protection,
                    thickness: metrics.thickness,
                    secure,
                });
            }
        }
        Ok(audit)
    }

    /// Parameters making every `m`-simplex of `St(P_J)` secure.
    pub fn secure_parameters(
        &self,
        pj: &BTreeSet<VertexId>,
        mode: ParameterMode,
    ) -> Result<SecureParameters> {
        let (prot, class) = self.classify(pj)?;
        if !prot.generic || prot.nu_tilde <= 0.0 {
            return Err(Error::Precondition(
                "point set is not generic for P_J".into(),
            ));
        }
        let eps = self.sampling.epsilon * EPSILON_INFLATION;
        let m = self.points.dim();
        let (upsilon0, mu0) = match mode {
            ParameterMode::Certified => (
                3f64.sqrt() * prot.nu_tilde * prot.nu_tilde / 4.0,
                prot.nu_tilde,
            ),
            ParameterMode::Measured => {
                let mut ups = f64::INFINITY;
                let mut shortest = f64::INFINITY;
                for s in class.safe_simplices.simplices_of_dim(m) {
                    let metrics = self.points.simplex(s.vertices()).metrics();
                    ups = ups.min(metrics.thickness);
                    shortest = shortest.min(metrics.shortest_edge);
                }
                (ups.min(1.0), (shortest / eps).min(1.0))
            }
        };
        for s in class.safe_simplices.simplices_of_dim(m) {
            let b = self
                .delaunay
                .ball(s)
                .expect("every Delaunay m-simplex has a ball");
            if b.radius >= eps {
                return Err(Error::Precondition(format!(
                    "simplex {s:?} has circumradius {} >= epsilon {eps}",
                    b.radius
                )));
            }
        }
        Ok(SecureParameters {
            delta: prot.delta,
            epsilon: eps,
            upsilon0,
            mu0,
            nu_tilde: prot.nu_tilde,
            mode,
        })
    }
}

fn deep_interior_with(points: &PointSet, hull: &ConvexHull, eps: f64) -> BTreeSet<VertexId> {
    (0..points.len())
        .filter(|&i| hull.signed_distance(points.point(i)) >= 4.0 * eps)
        .collect()
}

/// Sampling radius, sparsity and their ratio.
pub fn sampling_parameters(points: &PointSet) -> Result<SamplingReport> {
    points.require_full_rank()?;
    let del = delaunay_lifted(points)?;
    let hull = del.hull(points);
    sampling::sampling_report(points, &del, &hull)
}

/// Vertices at distance at least `4 eps` from the hull boundary.
pub fn deep_interior(points: &PointSet, eps: f64) -> Result<BTreeSet<VertexId>> {
    points.require_full_rank()?;
    let hull = ConvexHull::bruteforce(points)?;
    Ok(deep_interior_with(points, &hull, eps))
}

pub fn classify_generic(
    points: &PointSet,
    pj: &BTreeSet<VertexId>,
) -> Result<(ProtectionReport, SafeInteriorClassification)> {
    Analysis::new(points.clone())?.classify(pj)
}

pub fn thickness_certificate(
    points: &PointSet,
    pj: &BTreeSet<VertexId>,
) -> Result<ThicknessCertificate> {
    Analysis::new(points.clone())?.thickness_certificate(pj)
}

pub fn lemma_audit(points: &PointSet, pj: &BTreeSet<VertexId>) -> Result<LemmaAudit> {
    Analysis::new(points.clone())?.lemma_audit(pj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    fn grid(k: usize) -> PointSet {
        let mut pts = Vec::new();
        for i in 0..k {
            for j in 0..k {
                pts.push(Point::from([i as f64, j as f64]));
            }
        }
        PointSet::new(pts).unwrap()
    }

    #[test]
    fn integer_grid_sampling_radius() {
        let r = sampling_parameters(&grid(5)).unwrap();
        assert!((r.epsilon - 0.5f64.sqrt()).abs() < 1e-12, "{}", r.epsilon);
        assert_eq!(r.sparsity, 1.0);
    }

    #[test]
    fn deep_interior_of_a_grid() {
        let pts = grid(9);
        let deep = deep_interior(&pts, 0.5f64.sqrt()).unwrap();
        let expected: BTreeSet<VertexId> = (0..81)
            .filter(|i| (3..=5).contains(&(i / 9)) && (3..=5).contains(&(i % 9)))
            .collect();
        assert_eq!(deep, expected);
    }

    #[test]
    fn exact_grid_is_not_generic() {
        let a = Analysis::new(grid(9)).unwrap();
        let pj = a.select(&PjSelection::auto());
        let (prot, _) = a.classify(&pj).unwrap();
        assert!(!prot.generic);
        assert!(prot.delta_measured <= prot.tolerance);
        assert!(a.thickness_certificate(&pj).is_err());
        let audit = a.lemma_audit(&pj).unwrap();
        assert!(!audit.generic && audit.simplices.is_empty());
        assert!(a.classify(&BTreeSet::new()).is_err());
        assert!(a.classify(&BTreeSet::from([0])).is_err());
    }

    #[test]
    fn pj_selection_parsing() {
        assert_eq!(PjSelection::parse("auto").unwrap(), PjSelection::auto());
        assert_eq!(
            PjSelection::parse("1, 4,7").unwrap(),
            PjSelection::Ids(vec![1, 4, 7])
        );
        assert!(PjSelection::parse("1,x").is_err());
    }
}
