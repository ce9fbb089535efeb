//! Abstract simplicial complexes over vertex ids.
//!
//! A [`SimplicialComplex`] is purely combinatorial; operations that need the
//! geometric realization take the owning [`PointSet`] as an argument.

mod lp;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::points::{PointSet, VertexId};

/// A sorted, duplicate-free vertex set.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<VertexId>", into = "Vec<VertexId>")]
pub struct AbstractSimplex(Vec<VertexId>);

impl AbstractSimplex {
    /// Sorts and deduplicates; fails on an empty set.
    pub fn new(mut ids: Vec<VertexId>) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::InvalidArgument(
                "a simplex needs at least one vertex".into(),
            ));
        }
        ids.sort_unstable();
        ids.dedup();
        Ok(Self(ids))
    }

    pub fn vertex(id: VertexId) -> Self {
        Self(vec![id])
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    /// Combinatorial dimension, `|σ| − 1`.
    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn contains(&self, id: VertexId) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    pub fn is_face_of(&self, other: &AbstractSimplex) -> bool {
        self.0.iter().all(|v| other.contains(*v))
    }

    /// All non-empty subsets, including `self`.
    pub fn faces(&self) -> impl Iterator<Item = AbstractSimplex> + '_ {
        (1..=self.0.len())
            .flat_map(move |k| self.0.iter().copied().combinations(k).map(AbstractSimplex))
    }

    /// Faces of codimension one.
    pub fn facets(&self) -> impl Iterator<Item = AbstractSimplex> + '_ {
        (0..self.0.len()).filter_map(move |skip| {
            if self.0.len() == 1 {
                return None;
            }
            let v: Vec<VertexId> = self
                .0
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &x)| x)
                .collect();
            Some(AbstractSimplex(v))
        })
    }

    pub fn intersection(&self, other: &AbstractSimplex) -> Vec<VertexId> {
        self.0
            .iter()
            .copied()
            .filter(|v| other.contains(*v))
            .collect()
    }

    /// Image under a vertex map; `None` if some vertex is unmapped.
    pub fn map(&self, f: &VertexMap) -> Option<AbstractSimplex> {
        let ids: Option<Vec<VertexId>> = self.0.iter().map(|v| f.get(*v)).collect();
        AbstractSimplex::new(ids?).ok()
    }
}

impl Ord for AbstractSimplex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for AbstractSimplex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for AbstractSimplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl TryFrom<Vec<VertexId>> for AbstractSimplex {
    type Error = Error;
    fn try_from(v: Vec<VertexId>) -> Result<Self> {
        AbstractSimplex::new(v)
    }
}

impl From<AbstractSimplex> for Vec<VertexId> {
    fn from(s: AbstractSimplex) -> Self {
        s.0
    }
}

/// A map between vertex labellings, e.g. a perturbation `P → P̃`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexMap(BTreeMap<VertexId, VertexId>);

impl VertexMap {
    pub fn identity(n: usize) -> Self {
        Self((0..n).map(|i| (i, i)).collect())
    }

    /// `image[i]` is the image of vertex `i`.
    pub fn from_images(image: &[VertexId]) -> Self {
        Self(image.iter().copied().enumerate().collect())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (VertexId, VertexId)>) -> Self {
        Self(pairs.into_iter().collect())
    }

    pub fn get(&self, v: VertexId) -> Option<VertexId> {
        self.0.get(&v).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_injective(&self) -> bool {
        let images: BTreeSet<VertexId> = self.0.values().copied().collect();
        images.len() == self.0.len()
    }

    /// The inverse map; errors if not injective.
    pub fn inverse(&self) -> Result<VertexMap> {
        if !self.is_injective() {
            return Err(Error::InvalidArgument("vertex map is not injective".into()));
        }
        Ok(Self(self.0.iter().map(|(&a, &b)| (b, a)).collect()))
    }
}

/// A downward-closed set of abstract simplices.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct SimplicialComplex {
    simplices: BTreeSet<AbstractSimplex>,
}

impl fmt::Debug for SimplicialComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.simplices.iter()).finish()
    }
}

impl SimplicialComplex {
    pub fn new() -> Self {
        Self::default()
    }

    /// The complex generated by `simplices` and all their faces.
    pub fn from_simplices<I>(simplices: I) -> Self
    where
        I: IntoIterator<Item = AbstractSimplex>,
    {
        let mut k = Self::new();
        for s in simplices {
            k.insert_with_faces(&s);
        }
        k
    }

    /// Builds from raw vertex lists (each sorted and closed under faces).
    pub fn from_vertex_lists(lists: &[Vec<VertexId>]) -> Result<Self> {
        let simplices: Result<Vec<AbstractSimplex>> = lists
            .iter()
            .map(|l| AbstractSimplex::new(l.clone()))
            .collect();
        Ok(Self::from_simplices(simplices?))
    }

    pub fn insert_with_faces(&mut self, s: &AbstractSimplex) {
        if self.simplices.contains(s) {
            return;
        }
        for f in s.faces() {
            self.simplices.insert(f);
        }
    }

    pub fn contains(&self, s: &AbstractSimplex) -> bool {
        self.simplices.contains(s)
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &AbstractSimplex> {
        self.simplices.iter()
    }

    /// Largest simplex dimension, `None` for the empty complex.
    pub fn dimension(&self) -> Option<usize> {
        self.simplices.iter().next_back().map(AbstractSimplex::dim)
    }

    pub fn simplices_of_dim(&self, k: usize) -> impl Iterator<Item = &AbstractSimplex> {
        self.simplices.iter().filter(move |s| s.dim() == k)
    }

    pub fn vertices(&self) -> BTreeSet<VertexId> {
        self.simplices_of_dim(0).map(|s| s.vertices()[0]).collect()
    }

    /// Simplices that are not a proper face of another member.
    pub fn maximal_simplices(&self) -> Vec<&AbstractSimplex> {
        let mut cofaced: BTreeSet<&AbstractSimplex> = BTreeSet::new();
        let mut out = Vec::new();
        for s in self.simplices.iter().rev() {
            if !cofaced.contains(s) {
                out.push(s);
            }
            for f in s.facets() {
                if let Some(f) = self.simplices.get(&f) {
                    cofaced.insert(f);
                }
            }
        }
        out.reverse();
        out
    }

    /// Checks downward closure.
    pub fn is_closed(&self) -> bool {
        self.simplices
            .iter()
            .all(|s| s.facets().all(|f| self.simplices.contains(&f)))
    }

    /// `St(Q; K)`: every simplex that has a vertex in `Q`, together with all
    /// of its faces.
    pub fn star(&self, q: &BTreeSet<VertexId>) -> Result<SimplicialComplex> {
        if q.is_empty() {
            return Err(Error::InvalidArgument("star of an empty vertex set".into()));
        }
        Ok(Self::from_simplices(
            self.simplices
                .iter()
                .filter(|s| s.vertices().iter().any(|v| q.contains(v)))
                .cloned(),
        ))
    }

    /// `St(K'; K)` for a subcomplex `K'`: all simplices of `K` sharing a face
    /// with a simplex of `K'`, with their faces. Sharing a non-empty face is
    /// the same as sharing a vertex, so this is the star of the vertex set
    /// of `K'`.
    pub fn star_of_subcomplex(&self, sub: &SimplicialComplex) -> Result<SimplicialComplex> {
        self.star(&sub.vertices())
    }

    /// True iff every maximal simplex has dimension `m`.
    pub fn is_pure(&self, m: usize) -> bool {
        !self.is_empty() && self.maximal_simplices().iter().all(|s| s.dim() == m)
    }

    /// `bd K` for a pure `m`-complex: the `(m−1)`-simplices with exactly one
    /// `m`-coface, closed under faces.
    pub fn boundary_complex(&self) -> Result<SimplicialComplex> {
        let Some(m) = self.dimension() else {
            return Ok(SimplicialComplex::new());
        };
        if !self.is_pure(m) {
            return Err(Error::Precondition(format!(
                "complex is not a pure {m}-complex"
            )));
        }
        if m == 0 {
            return Ok(SimplicialComplex::new());
        }
        let mut cofaces: BTreeMap<AbstractSimplex, usize> = BTreeMap::new();
        for s in self.simplices_of_dim(m) {
            for f in s.facets() {
                *cofaces.entry(f).or_default() += 1;
            }
        }
        Ok(Self::from_simplices(
            cofaces.into_iter().filter(|&(_, c)| c == 1).map(|(f, _)| f),
        ))
    }

    /// Image of the complex under a vertex map; `None` if a vertex is unmapped.
    pub fn map(&self, f: &VertexMap) -> Option<SimplicialComplex> {
        let mut out = SimplicialComplex::new();
        for s in &self.simplices {
            out.simplices.insert(s.map(f)?);
        }
        Some(out)
    }

    /// Sorted vertex-id lists, ordered by dimension then lexicographically.
    pub fn to_vertex_lists(&self) -> Vec<Vec<VertexId>> {
        self.simplices
            .iter()
            .map(|s| s.vertices().to_vec())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_vertex_lists()).expect("serializing integers cannot fail")
    }

    /// Parses a JSON array of vertex-id arrays; faces are added as needed.
    pub fn from_json(s: &str) -> Result<Self> {
        let lists: Vec<Vec<VertexId>> = serde_json::from_str(s)?;
        Self::from_vertex_lists(&lists)
    }

    /// Decides whether the geometric realization through `points` is an
    /// embedded simplicial complex.
    pub fn is_embedded(&self, points: &PointSet) -> Result<EmbeddingReport> {
        self.check_ids(points)?;
        let maximal = self.maximal_simplices();
        for s in &maximal {
            if points.simplex(s.vertices()).is_degenerate() {
                return Ok(EmbeddingReport {
                    embedded: false,
                    violation: Some(((*s).clone(), (*s).clone())),
                });
            }
        }
        for (i, a) in maximal.iter().enumerate() {
            for b in &maximal[i + 1..] {
                if improper_intersection(points, a, b) {
                    return Ok(EmbeddingReport {
                        embedded: false,
                        violation: Some(((*a).clone(), (*b).clone())),
                    });
                }
            }
        }
        Ok(EmbeddingReport {
            embedded: true,
            violation: None,
        })
    }

    /// Checks the four local conditions under which `K` is a triangulation
    /// at the vertex `p`.
    pub fn is_triangulation_at(
        &self,
        points: &PointSet,
        p: VertexId,
    ) -> Result<TriangulationAtReport> {
        self.check_ids(points)?;
        if p >= points.len() {
            return Err(Error::InvalidArgument(format!(
                "vertex id {p} out of range"
            )));
        }
        let fail = |c: u8, detail: String| {
            Ok(TriangulationAtReport {
                holds: false,
                failed_condition: Some(c),
                detail: Some(detail),
            })
        };
        if !self.contains(&AbstractSimplex::vertex(p)) {
            return fail(1, format!("{p} is not a vertex of the complex"));
        }
        let star = self.star(&BTreeSet::from([p]))?;
        let emb = star.is_embedded(points)?;
        if !emb.embedded {
            return fail(2, format!("star is not embedded: {:?}", emb.violation));
        }
        let m = points.dim();
        if !star.is_pure(m) {
            return fail(3, format!("star of {p} is not a pure {m}-complex"));
        }
        let bd = star.boundary_complex()?;
        if bd.contains(&AbstractSimplex::vertex(p)) {
            return fail(3, format!("{p} lies on the boundary of its star"));
        }
        let star_max: Vec<&AbstractSimplex> = star.maximal_simplices();
        for tau in self.iter().filter(|t| !star.contains(t)) {
            for sigma in &star_max {
                if interior_meets(points, tau, sigma) {
                    return fail(
                        4,
                        format!("interior of {tau:?} meets {sigma:?} of the star"),
                    );
                }
            }
        }
        Ok(TriangulationAtReport {
            holds: true,
            failed_condition: None,
            detail: None,
        })
    }

    fn check_ids(&self, points: &PointSet) -> Result<()> {
        match self.vertices().iter().next_back() {
            Some(&v) if v >= points.len() => Err(Error::InvalidArgument(format!(
                "vertex id {v} out of range for {} points",
                points.len()
            ))),
            _ => Ok(()),
        }
    }
}

impl<'a> IntoIterator for &'a SimplicialComplex {
    type Item = &'a AbstractSimplex;
    type IntoIter = std::collections::btree_set::Iter<'a, AbstractSimplex>;
    fn into_iter(self) -> Self::IntoIter {
        self.simplices.iter()
    }
}

impl FromIterator<AbstractSimplex> for SimplicialComplex {
    fn from_iter<T: IntoIterator<Item = AbstractSimplex>>(iter: T) -> Self {
        Self::from_simplices(iter)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub embedded: bool,
    /// First offending pair in sorted order. A degenerate simplex is reported
    /// paired with itself.
    pub violation: Option<(AbstractSimplex, AbstractSimplex)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TriangulationAtReport {
    pub holds: bool,
    /// 1: vertex membership, 2: embedded star, 3: interior point, 4: no
    /// foreign interior intersections.
    pub failed_condition: Option<u8>,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsomorphismReport {
    pub isomorphic: bool,
    /// Simplices of `St(Q; K)` (labels of `K`) whose image is not in `St(ζ(Q); K2)`.
    pub missing: Vec<AbstractSimplex>,
    /// Simplices of `St(ζ(Q); K2)` (labels of `K2`) that are not images.
    pub extra: Vec<AbstractSimplex>,
}

impl IsomorphismReport {
    pub fn count_of_dim(list: &[AbstractSimplex], k: usize) -> usize {
        list.iter().filter(|s| s.dim() == k).count()
    }
}

/// Whether `zeta` maps `St(Q; K)` bijectively onto `St(ζ(Q); K2)`.
pub fn star_isomorphic(
    k: &SimplicialComplex,
    k2: &SimplicialComplex,
    q: &BTreeSet<VertexId>,
    zeta: &VertexMap,
) -> Result<IsomorphismReport> {
    let star = k.star(q)?;
    let verts = star.vertices();
    if let Some(v) = verts.iter().find(|v| zeta.get(**v).is_none()) {
        return Err(Error::InvalidArgument(format!(
            "vertex map undefined on {v}"
        )));
    }
    let restricted = VertexMap::from_pairs(verts.iter().map(|&v| (v, zeta.get(v).unwrap())));
    if !restricted.is_injective() {
        return Err(Error::InvalidArgument(
            "vertex map is not injective on the star".into(),
        ));
    }
    let zq: BTreeSet<VertexId> = q
        .iter()
        .map(|v| {
            zeta.get(*v)
                .ok_or_else(|| Error::InvalidArgument(format!("vertex map undefined on {v}")))
        })
        .collect::<Result<_>>()?;
    let star2 = k2.star(&zq)?;
    let mut missing = Vec::new();
    let mut images = BTreeSet::new();
    for s in &star {
        let img = s.map(&restricted).expect("restricted map covers the star");
        if !star2.contains(&img) {
            missing.push(s.clone());
        }
        images.insert(img);
    }
    let extra: Vec<AbstractSimplex> = star2
        .iter()
        .filter(|s| !images.contains(*s))
        .cloned()
        .collect();
    Ok(IsomorphismReport {
        isomorphic: missing.is_empty() && extra.is_empty(),
        missing,
        extra,
    })
}

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite coordinate")
}

fn boxes_disjoint(points: &PointSet, a: &[VertexId], b: &[VertexId]) -> bool {
    (0..points.dim()).any(|k| {
        let (alo, ahi) = a
            .iter()
            .map(|&v| points.point(v)[k])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| {
                (l.min(x), h.max(x))
            });
        let (blo, bhi) = b
            .iter()
            .map(|&v| points.point(v)[k])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| {
                (l.min(x), h.max(x))
            });
        ahi < blo || bhi < alo
    })
}

/// Equality rows `Σ λ_a a − Σ μ_b b = 0`, `Σ λ = 1`, `Σ μ = 1` over the
/// variables `[λ (|a|), μ (|b|), extra...]`.
fn combination_rows(
    points: &PointSet,
    a: &[VertexId],
    b: &[VertexId],
    extra: usize,
) -> (Vec<Vec<BigRational>>, Vec<BigRational>) {
    let nv = a.len() + b.len() + extra;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for k in 0..points.dim() {
        let mut r = vec![BigRational::zero(); nv];
        for (i, &v) in a.iter().enumerate() {
            r[i] = rat(points.point(v)[k]);
        }
        for (i, &v) in b.iter().enumerate() {
            r[a.len() + i] = -rat(points.point(v)[k]);
        }
        rows.push(r);
        rhs.push(BigRational::zero());
    }
    let mut sa = vec![BigRational::zero(); nv];
    for x in sa.iter_mut().take(a.len()) {
        *x = BigRational::one();
    }
    rows.push(sa);
    rhs.push(BigRational::one());
    let mut sb = vec![BigRational::zero(); nv];
    for x in sb.iter_mut().skip(a.len()).take(b.len()) {
        *x = BigRational::one();
    }
    rows.push(sb);
    rhs.push(BigRational::one());
    (rows, rhs)
}

/// True unless `conv(a) ∩ conv(b) = conv(a ∩ b)`. Assumes both simplices
/// are non-degenerate, so barycentric coordinates are unique and a common
/// point outside the shared face must put weight on `a \ b`.
fn improper_intersection(points: &PointSet, a: &AbstractSimplex, b: &AbstractSimplex) -> bool {
    if a.is_face_of(b) || b.is_face_of(a) {
        return false;
    }
    if boxes_disjoint(points, a.vertices(), b.vertices()) {
        return false;
    }
    let (rows, rhs) = combination_rows(points, a.vertices(), b.vertices(), 0);
    let nv = a.vertices().len() + b.vertices().len();
    let mut obj = vec![BigRational::zero(); nv];
    for (i, &v) in a.vertices().iter().enumerate() {
        if !b.contains(v) {
            obj[i] = BigRational::one();
        }
    }
    match lp::maximize(&rows, &rhs, &obj) {
        lp::LpOutcome::Optimal(v) => v.is_positive(),
        lp::LpOutcome::Infeasible => false,
        lp::LpOutcome::Unbounded => unreachable!("bounded by the simplex constraints"),
    }
}

/// True iff the relative interior of `tau` (all barycentric weights positive)
/// meets the closed simplex `sigma`.
fn interior_meets(points: &PointSet, tau: &AbstractSimplex, sigma: &AbstractSimplex) -> bool {
    if boxes_disjoint(points, tau.vertices(), sigma.vertices()) {
        return false;
    }
    let kt = tau.vertices().len();
    let ks = sigma.vertices().len();
    // variables: μ (tau), λ (sigma), t, slack_1..slack_kt with μ_i − t − s_i = 0
    let (mut rows, mut rhs) = combination_rows(points, tau.vertices(), sigma.vertices(), 1 + kt);
    let t_col = kt + ks;
    for i in 0..kt {
        let mut r = vec![BigRational::zero(); kt + ks + 1 + kt];
        r[i] = BigRational::one();
        r[t_col] = -BigRational::one();
        r[t_col + 1 + i] = -BigRational::one();
        rows.push(r);
        rhs.push(BigRational::zero());
    }
    let mut obj = vec![BigRational::zero(); kt + ks + 1 + kt];
    obj[t_col] = BigRational::one();
    match lp::maximize(&rows, &rhs, &obj) {
        lp::LpOutcome::Optimal(v) => v.is_positive(),
        lp::LpOutcome::Infeasible => false,
        lp::LpOutcome::Unbounded => unreachable!("bounded by the simplex constraints"),
    }
}
