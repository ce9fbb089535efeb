use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    make_point_perturbation, make_point_perturbation_with, stability_budget, PerturbationModel,
    PointPerturbation, StabilityBudget,
};
use crate::complex::{star_isomorphic, AbstractSimplex, SimplicialComplex, VertexMap};
use crate::delaunay::{
    delaunay_lifted, metric_delaunay, relaxed_delaunay, DelaunayResult, DisplacementField,
    MetricDelaunayOptions, MetricModel, MetricPath, MetricPathResult, RelaxedOptions,
};
use crate::error::{Error, Result};
use crate::genericity::{Analysis, ParameterMode, PjSelection, SecureParameters};
use crate::geometry::linalg::dist;
use crate::geometry::SimplexGeometry;
use crate::points::{PointSet, VertexId};
use crate::random;

/// Relative slack when deciding whether a magnitude is within its budget.
const BUDGET_REL_TOL: f64 = 1e-12;

/// Waves in the random displacement fields of metric trials.
const FIELD_WAVES: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialKind {
    /// Point stability under a uniform perturbation.
    Uniform,
    Radial,
    Adversarial,
    /// Pullback metric with `2a` a fraction of `Υ₀μ₀δ/36`.
    Metric,
    /// Pullback metric with `2a` a fraction of `ν̃³δ/84`.
    MetricGeneric,
    /// Relaxed Delaunay at a fraction of `Υ₀μ₀δ/18`; independent of the seed.
    Relaxation,
}

impl TrialKind {
    pub fn point_model(self) -> Option<PerturbationModel> {
        match self {
            Self::Uniform => Some(PerturbationModel::Uniform),
            Self::Radial => Some(PerturbationModel::Radial),
            Self::Adversarial => Some(PerturbationModel::Adversarial),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricBudgetMode {
    /// `Υ₀μ₀δ/36`, from the secure parameters.
    Secure,
    /// `ν̃³δ/84`, from protection alone.
    Generic,
}

/// Outcome of one trial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialVerdict {
    pub trial: String,
    pub seed: Option<u64>,
    pub budget_fraction: Option<f64>,
    /// Magnitude of the perturbation.
    pub budget_used: f64,
    /// The budget the magnitude is compared against.
    pub budget: f64,
    pub in_budget: bool,
    /// False when some membership could not be decided.
    pub certified: bool,
    pub passed: bool,
    /// An inconsistency between independent computations.
    pub hard_failure: bool,
    pub checks: BTreeMap<String, bool>,
    pub measured: BTreeMap<String, f64>,
    pub details: Vec<String>,
}

impl TrialVerdict {
    fn new(trial: &str, budget_used: f64, budget: f64) -> Self {
        Self {
            trial: trial.to_string(),
            seed: None,
            budget_fraction: None,
            budget_used,
            budget,
            in_budget: budget_used <= budget * (1.0 + BUDGET_REL_TOL),
            certified: true,
            passed: false,
            hard_failure: false,
            checks: BTreeMap::new(),
            measured: BTreeMap::new(),
            details: Vec::new(),
        }
    }

    fn check(&mut self, name: &str, ok: bool) {
        self.checks.insert(name.to_string(), ok);
    }

    fn measure(&mut self, name: &str, value: f64) {
        self.measured.insert(name.to_string(), value);
    }

    fn finish(mut self) -> Self {
        self.passed = self.certified && !self.hard_failure && self.checks.values().all(|&c| c);
        self
    }
}

/// Secure parameters of a lone simplex: its own thickness, `ε` just above
/// its circumradius and `μ₀ = L/ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SimplexSecurity {
    pub upsilon0: f64,
    pub mu0: f64,
    pub epsilon: f64,
}

impl SimplexSecurity {
    pub fn measure(simplex: &SimplexGeometry) -> Result<Self> {
        let metrics = simplex.metrics();
        let radius = metrics
            .circumradius
            .ok_or_else(|| crate::Error::Degenerate("simplex has no circumcentre".into()))?;
        if metrics.is_degenerate || metrics.thickness <= 0.0 {
            return Err(crate::Error::Degenerate("simplex is degenerate".into()));
        }
        let epsilon = radius * crate::genericity::EPSILON_INFLATION;
        Ok(Self {
            upsilon0: metrics.thickness,
            mu0: metrics.shortest_edge / epsilon,
            epsilon,
        })
    }

    /// `Υ₀μ₀ε/8`.
    pub fn budget(&self) -> f64 {
        self.upsilon0 * self.mu0 * self.epsilon / 8.0
    }
}

/// Compares `‖C(ζ(σ)) − C(σ)‖` with `8ρ/(Υ₀μ₀)`; `vertices` are the
/// vertices of `σ`.
pub fn cc_displacement_trial(
    vertices: &PointSet,
    perturbation: &PointPerturbation,
    security: &SimplexSecurity,
) -> Result<TrialVerdict> {
    let ids: Vec<VertexId> = (0..vertices.len()).collect();
    let before = vertices.simplex(&ids).circumcentre()?;
    let moved = perturbation.images(vertices)?;
    let after = moved.simplex(&ids).circumcentre()?;
    let rho = perturbation.rho;
    let displacement = dist(&before.centre, &after.centre);
    let bound = 8.0 * rho / (security.upsilon0 * security.mu0);
    let mut v = TrialVerdict::new("cc_displacement", rho, security.budget());
    v.seed = Some(perturbation.seed);
    v.measure("displacement", displacement);
    v.measure("bound", bound);
    v.measure("margin", bound - displacement);
    v.check(
        "displacement",
        displacement < bound || (rho == 0.0 && displacement == 0.0),
    );
    Ok(v.finish())
}

/// Shared state for trials on one point set and one choice of `P_J`.
#[derive(Clone, Debug)]
pub struct TrialContext {
    pub points: PointSet,
    pub delaunay: DelaunayResult,
    pub pj: BTreeSet<VertexId>,
    /// `St(P_J; Del(P))`.
    pub star: SimplicialComplex,
    pub params: SecureParameters,
    pub budget: StabilityBudget,
    pub tolerance: f64,
    /// Measured sampling radius.
    pub sampling_epsilon: f64,
}

impl TrialContext {
    pub fn new(analysis: &Analysis, selection: &PjSelection, mode: ParameterMode) -> Result<Self> {
        let pj = analysis.select(selection);
        let params = analysis.secure_parameters(&pj, mode)?;
        let budget = stability_budget(
            params.upsilon0,
            params.mu0,
            params.delta,
            params.epsilon,
            params.nu_tilde,
        )?;
        Ok(Self {
            points: analysis.points.clone(),
            delaunay: analysis.delaunay.clone(),
            star: analysis.delaunay.complex.star(&pj)?,
            pj,
            params,
            budget,
            tolerance: analysis.tolerance(),
            sampling_epsilon: analysis.sampling.epsilon,
        })
    }

    fn thick_sparse(&self) -> f64 {
        self.params.upsilon0 * self.params.mu0
    }

    pub fn perturbation(
        &self,
        rho: f64,
        seed: u64,
        model: PerturbationModel,
    ) -> Result<PointPerturbation> {
        make_point_perturbation_with(&self.points, Some(&self.delaunay), rho, seed, model)
    }

    fn top_simplices(&self) -> impl Iterator<Item = &AbstractSimplex> {
        self.star.simplices_of_dim(self.points.dim())
    }

    fn point_decay(&self, moved: &DelaunayResult, rho: f64, v: &mut TrialVerdict) {
        let floor = self.params.delta - 18.0 * rho / self.thick_sparse() - self.tolerance;
        let mut residual = f64::INFINITY;
        let mut ok = true;
        for s in self.top_simplices() {
            match moved.ball(s) {
                Some(b) => {
                    residual = residual.min(b.protection);
                    if b.protection < floor {
                        ok = false;
                        v.details.push(format!(
                            "{:?} protection {:e} below {:e}",
                            s.vertices(),
                            b.protection,
                            floor
                        ));
                    }
                }
                None => {
                    ok = false;
                    v.details.push(format!(
                        "{:?} is not Delaunay after the perturbation",
                        s.vertices()
                    ));
                }
            }
        }
        v.measure("residual_protection", residual);
        v.measure("protection_floor", floor);
        v.check("protection_decay", ok);
    }

    pub fn protection_decay_trial(&self, z: &PointPerturbation) -> Result<TrialVerdict> {
        let moved = delaunay_lifted(&z.images(&self.points)?)?;
        let mut v = TrialVerdict::new("protection_decay", z.rho, self.budget.rho_point);
        v.seed = Some(z.seed);
        self.point_decay(&moved, z.rho, &mut v);
        Ok(v.finish())
    }

    /// Star isomorphism under `ζ` together with the protection decay check.
    pub fn point_stability_trial(&self, z: &PointPerturbation) -> Result<TrialVerdict> {
        let moved = delaunay_lifted(&z.images(&self.points)?)?;
        let mut v = TrialVerdict::new("point_stability", z.rho, self.budget.rho_point);
        v.seed = Some(z.seed);
        v.measure("max_displacement", z.max_displacement(&self.points));
        let iso = star_isomorphic(
            &self.delaunay.complex,
            &moved.complex,
            &self.pj,
            &VertexMap::identity(self.points.len()),
        )?;
        v.measure("missing", iso.missing.len() as f64);
        v.measure("extra", iso.extra.len() as f64);
        for s in &iso.missing {
            v.details.push(format!("missing {:?}", s.vertices()));
        }
        for s in &iso.extra {
            v.details.push(format!("extra {:?}", s.vertices()));
        }
        v.check("isomorphic", iso.isomorphic);
        self.point_decay(&moved, z.rho, &mut v);
        Ok(v.finish())
    }

    /// `St(P_J; Del^ρ(P)) = St(P_J; Del(P))`.
    pub fn relaxation_trial(
        &self,
        rho: f64,
        max_evaluations: Option<usize>,
    ) -> Result<TrialVerdict> {
        let mut opts = RelaxedOptions::new(self.params.epsilon);
        if let Some(cap) = max_evaluations {
            opts.max_evaluations = cap;
        }
        let relaxed = relaxed_delaunay(&self.points, rho, &self.pj, &opts)?;
        let mut v = TrialVerdict::new("relaxation", rho, self.budget.rho_point);
        v.certified = relaxed.certified;
        let extra: Vec<&AbstractSimplex> = relaxed
            .complex
            .iter()
            .filter(|s| !self.star.contains(s))
            .collect();
        let missing: Vec<&AbstractSimplex> = self
            .star
            .iter()
            .filter(|s| !relaxed.complex.contains(s))
            .collect();
        v.measure("extra", extra.len() as f64);
        v.measure("missing", missing.len() as f64);
        v.measure("undecided", relaxed.undecided.len() as f64);
        for s in &extra {
            v.details.push(format!("extra {:?}", s.vertices()));
        }
        for s in &missing {
            v.details.push(format!("missing {:?}", s.vertices()));
        }
        for s in &relaxed.undecided {
            v.details.push(format!("undecided {:?}", s.vertices()));
        }
        v.check("equal", extra.is_empty() && missing.is_empty());
        Ok(v.finish())
    }

    /// Pullback metric of the random field with `2a = rho`.
    pub fn metric_field(&self, rho: f64, seed: u64) -> Result<DisplacementField> {
        DisplacementField::random(
            self.points.dim(),
            rho / 2.0,
            self.sampling_epsilon,
            FIELD_WAVES,
            seed,
        )
    }

    /// Domain `U`: the bounding box inflated by `3ε`.
    pub fn metric_domain(&self) -> (Vec<f64>, Vec<f64>) {
        MetricModel::domain_around(&self.points, 3.0 * self.sampling_epsilon)
    }

    /// Both metric Delaunay paths against the Euclidean star, with the
    /// metric protection decay check.
    pub fn metric_stability_trial(
        &self,
        field: &DisplacementField,
        mode: MetricBudgetMode,
        inject_fault: bool,
    ) -> Result<TrialVerdict> {
        let d = MetricModel::pullback(field.clone(), self.metric_domain());
        let rho = d.rho_bound;
        let budget = match mode {
            MetricBudgetMode::Secure => self.budget.rho_metric,
            MetricBudgetMode::Generic => self.budget.rho_generic,
        };
        let name = match mode {
            MetricBudgetMode::Secure => "metric_stability",
            MetricBudgetMode::Generic => "metric_stability_generic",
        };
        let mut v = TrialVerdict::new(name, rho, budget);
        let margin = self
            .star
            .vertices()
            .iter()
            .map(|&q| d.distance_to_domain_boundary(self.points.point(q)))
            .fold(f64::INFINITY, f64::min);
        v.measure("domain_margin", margin);
        v.check("domain", margin >= 2.0 * self.sampling_epsilon);

        let opts = MetricDelaunayOptions {
            epsilon: self.params.epsilon,
            path: MetricPath::Both,
        };
        let mut result = metric_delaunay(&self.points, &d, &self.pj, &opts)?;
        if inject_fault {
            if let Some(p) = result.pullback.as_mut() {
                drop_one_top_simplex(p);
            }
        }
        v.certified = result.certified;
        let generic = result.generic.as_ref().expect("both paths run");
        let pullback = result.pullback.as_ref().expect("both paths run");
        for s in &generic.not_found {
            v.details
                .push(format!("no metric circumcentre for {:?}", s.vertices()));
        }
        let agree = result.paths_agree() == Some(true);
        if !agree {
            v.hard_failure = true;
            v.details.push(format!(
                "metric paths disagree: generic path has {} simplices, pullback path has {}",
                generic.complex.len(),
                pullback.complex.len()
            ));
        }
        v.check("paths_agree", agree);
        v.check(
            "star_equal",
            generic.complex == self.star && pullback.complex == self.star,
        );

        let floor = self.params.delta - 20.0 * rho / self.thick_sparse() - self.tolerance;
        let mut residual = f64::INFINITY;
        let mut decay_ok = true;
        for path in [generic, pullback] {
            let by: BTreeMap<&AbstractSimplex, f64> = path
                .balls
                .iter()
                .map(|b| (&b.simplex, b.protection))
                .collect();
            for s in self.top_simplices() {
                match by.get(s) {
                    Some(&p) => {
                        residual = residual.min(p);
                        decay_ok &= p >= floor;
                    }
                    None => decay_ok = false,
                }
            }
        }
        v.measure("residual_protection", residual);
        v.measure("protection_floor", floor);
        v.check("protection_decay", decay_ok);
        Ok(v.finish())
    }

    /// One trial of `kind` at `fraction` of its budget.
    pub fn run_trial(
        &self,
        kind: TrialKind,
        fraction: f64,
        seed: u64,
        inject_fault: bool,
    ) -> Result<TrialVerdict> {
        if !(fraction >= 0.0) || !fraction.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "budget fraction {fraction} must be non-negative"
            )));
        }
        let mut v = match kind {
            TrialKind::Uniform | TrialKind::Radial | TrialKind::Adversarial => {
                let model = kind.point_model().expect("point kind");
                let z = self.perturbation(fraction * self.budget.rho_point, seed, model)?;
                let mut v = self.point_stability_trial(&z)?;
                v.trial = format!(
                    "point_stability_{}",
                    serde_json::to_value(model)?.as_str().unwrap_or("")
                );
                v
            }
            TrialKind::Metric | TrialKind::MetricGeneric => {
                let (mode, budget) = if kind == TrialKind::Metric {
                    (MetricBudgetMode::Secure, self.budget.rho_metric)
                } else {
                    (MetricBudgetMode::Generic, self.budget.rho_generic)
                };
                let field = self.metric_field(fraction * budget, seed)?;
                let mut v = self.metric_stability_trial(&field, mode, inject_fault)?;
                v.seed = Some(seed);
                v
            }
            TrialKind::Relaxation => {
                self.relaxation_trial(fraction * self.budget.rho_point, None)?
            }
        };
        v.budget_fraction = Some(fraction);
        Ok(v)
    }
}

fn drop_one_top_simplex(p: &mut MetricPathResult) {
    let mut tops: Vec<AbstractSimplex> =
        p.complex.maximal_simplices().into_iter().cloned().collect();
    if !tops.is_empty() {
        tops.remove(0);
    }
    p.complex = SimplicialComplex::from_simplices(tops);
}

/// A batch of trials over one dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchSpec {
    pub dataset: String,
    #[serde(rename = "P_J")]
    pub pj: PjSelection,
    pub budgets: Vec<f64>,
    pub seeds: u64,
    pub models: Vec<TrialKind>,
}

/// Seed of trial `index` in a batch seeded by `base`.
pub fn trial_seed(base: u64, index: u64) -> u64 {
    random::splitmix64(base ^ random::splitmix64(index))
}

/// Every `(kind, fraction, seed index)` combination, ordered by kind, then
/// fraction, then seed index. Relaxation trials run once per fraction.
pub fn run_batch(
    ctx: &TrialContext,
    kinds: &[TrialKind],
    fractions: &[f64],
    seeds: u64,
    base_seed: u64,
    inject_fault: bool,
) -> Result<Vec<TrialVerdict>> {
    let mut jobs = Vec::new();
    for &kind in kinds {
        for &fraction in fractions {
            let count = if kind == TrialKind::Relaxation {
                1
            } else {
                seeds
            };
            for i in 0..count {
                jobs.push((kind, fraction, trial_seed(base_seed, i)));
            }
        }
    }
    jobs.par_iter()
        .map(|&(kind, fraction, seed)| ctx.run_trial(kind, fraction, seed, inject_fault))
        .collect()
}

/// `cc_displacement_trial` on a random simplex at `fraction` of its budget.
pub fn random_cc_trial(
    dim: usize,
    fraction: f64,
    seed: u64,
    model: PerturbationModel,
) -> Result<TrialVerdict> {
    use rand::Rng;
    let mut rng = random::stream(seed, 0x6363);
    loop {
        let coords: Vec<crate::geometry::Point> = (0..=dim)
            .map(|_| {
                crate::geometry::Point((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
            })
            .collect();
        let Ok(vertices) = PointSet::new(coords) else {
            continue;
        };
        let Ok(security) =
            SimplexSecurity::measure(&vertices.simplex(&(0..=dim).collect::<Vec<_>>()))
        else {
            continue;
        };
        if security.upsilon0 < 1e-3 {
            continue;
        }
        let z = make_point_perturbation(&vertices, fraction * security.budget(), seed, model)?;
        return cc_displacement_trial(&vertices, &z, &security);
    }
}
