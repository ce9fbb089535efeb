//! Stability budgets, point perturbations and stability trials.

mod trials;

pub use trials::{
    cc_displacement_trial, random_cc_trial, run_batch, trial_seed, BatchSpec, MetricBudgetMode,
    SimplexSecurity, TrialContext, TrialKind, TrialVerdict,
};

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::delaunay::{delaunay_lifted, DelaunayResult};
use crate::error::{Error, Result};
use crate::geometry::linalg::{dist, norm, sub};
use crate::geometry::Point;
use crate::points::PointSet;
use crate::random;

/// Largest perturbations covered by each stability statement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityBudget {
    /// `Υ₀μ₀ε/8`: circumcentre displacement.
    pub rho_cc: f64,
    /// `Υ₀μ₀δ/18`: point perturbation.
    pub rho_point: f64,
    /// `Υ₀μ₀δ/20`: protection under metric perturbation.
    pub rho_metric_protect: f64,
    /// `Υ₀μ₀δ/36`: metric perturbation.
    pub rho_metric: f64,
    /// `ν̃³δ/84`: metric perturbation from protection alone.
    pub rho_generic: f64,
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite input")
}

pub fn stability_budget(
    upsilon0: f64,
    mu0: f64,
    delta: f64,
    eps: f64,
    nu_tilde: f64,
) -> Result<StabilityBudget> {
    let named = [
        ("upsilon0", upsilon0),
        ("mu0", mu0),
        ("delta", delta),
        ("epsilon", eps),
        ("nu_tilde", nu_tilde),
    ];
    for (name, v) in named {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "{name} = {v} must be positive"
            )));
        }
    }
    for (name, v) in [("upsilon0", upsilon0), ("mu0", mu0), ("nu_tilde", nu_tilde)] {
        if v > 1.0 {
            return Err(Error::InvalidArgument(format!(
                "{name} = {v} must not exceed 1"
            )));
        }
    }
    if delta > eps {
        return Err(Error::InvalidArgument(format!(
            "delta = {delta} exceeds epsilon = {eps}"
        )));
    }
    let base = exact(upsilon0) * exact(mu0);
    let over = |x: BigRational, k: i64| {
        (x / BigRational::from_integer(k.into()))
            .to_f64()
            .expect("finite")
    };
    let nu = exact(nu_tilde);
    Ok(StabilityBudget {
        rho_cc: over(base.clone() * exact(eps), 8),
        rho_point: over(base.clone() * exact(delta), 18),
        rho_metric_protect: over(base.clone() * exact(delta), 20),
        rho_metric: over(base * exact(delta), 36),
        rho_generic: over(nu.clone() * nu.clone() * nu * exact(delta), 84),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationModel {
    /// Uniform in the ball of radius `ρ`.
    Uniform,
    /// Exactly `ρ` away from the centroid of the point set.
    Radial,
    /// For a random half of the points, exactly `ρ` toward the centre of the
    /// nearest Delaunay ball the point is not a vertex of.
    Adversarial,
}

impl PerturbationModel {
    pub const ALL: [PerturbationModel; 3] = [Self::Uniform, Self::Radial, Self::Adversarial];

    fn label(self) -> u64 {
        match self {
            Self::Uniform => 1,
            Self::Radial => 2,
            Self::Adversarial => 3,
        }
    }
}

/// `ζ(p) = p + ρ · w_p · u_p` with unit directions `u_p` and weights
/// `w_p ∈ [0, 1]`; rescaling `ρ` keeps every direction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointPerturbation {
    pub rho: f64,
    pub seed: u64,
    pub model: PerturbationModel,
    pub directions: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl PointPerturbation {
    /// The same directions and weights at magnitude `rho`.
    pub fn scaled(&self, rho: f64) -> Self {
        Self {
            rho,
            ..self.clone()
        }
    }

    pub fn image(&self, points: &PointSet, id: usize) -> Point {
        let p = points.point(id);
        let s = self.rho * self.weights[id];
        Point(
            p.iter()
                .zip(&self.directions[id])
                .map(|(x, u)| x + s * u)
                .collect(),
        )
    }

    pub fn images(&self, points: &PointSet) -> Result<PointSet> {
        if points.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                found: points.len(),
            });
        }
        points.map_points(|i, _| self.image(points, i))
    }

    pub fn max_displacement(&self, points: &PointSet) -> f64 {
        (0..points.len())
            .map(|i| dist(&self.image(points, i), points.point(i)))
            .fold(0.0, f64::max)
    }
}

/// Requires `ρ < μ̄/2` so that the perturbation is injective.
pub fn make_point_perturbation(
    points: &PointSet,
    rho: f64,
    seed: u64,
    model: PerturbationModel,
) -> Result<PointPerturbation> {
    let del = match model {
        PerturbationModel::Adversarial => Some(delaunay_lifted(points)?),
        _ => None,
    };
    make_point_perturbation_with(points, del.as_ref(), rho, seed, model)
}

/// As [`make_point_perturbation`], reusing a Delaunay complex of `points`
/// for the adversarial model.
pub fn make_point_perturbation_with(
    points: &PointSet,
    del: Option<&DelaunayResult>,
    rho: f64,
    seed: u64,
    model: PerturbationModel,
) -> Result<PointPerturbation> {
    let sparsity = points.sparsity();
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "rho = {rho} must be non-negative"
        )));
    }
    if rho >= sparsity / 2.0 {
        return Err(Error::Precondition(format!(
            "rho = {rho} is not below half the sparsity {sparsity}"
        )));
    }
    let dim = points.dim();
    let n = points.len();
    let mut rng = random::stream(seed, model.label());
    let (directions, weights) = match model {
        PerturbationModel::Uniform => (0..n)
            .map(|_| {
                let u = random::unit_vector(&mut rng, dim);
                let w = rng.random::<f64>().powf(1.0 / dim as f64);
                (u, w)
            })
            .unzip(),
        PerturbationModel::Radial => {
            let mut centroid = vec![0.0; dim];
            for p in points.iter() {
                for (c, x) in centroid.iter_mut().zip(p.iter()) {
                    *c += x / n as f64;
                }
            }
            (0..n)
                .map(|i| {
                    let v = sub(points.point(i), &centroid);
                    let len = norm(&v);
                    if len > 0.0 {
                        (v.iter().map(|x| x / len).collect(), 1.0)
                    } else {
                        (vec![0.0; dim], 0.0)
                    }
                })
                .unzip()
        }
        PerturbationModel::Adversarial => {
            let owned;
            let del = match del {
                Some(d) => d,
                None => {
                    owned = delaunay_lifted(points)?;
                    &owned
                }
            };
            (0..n)
                .map(|i| {
                    let selected = rng.random::<bool>();
                    let target = del
                        .balls
                        .iter()
                        .filter(|b| !b.simplex.contains(i))
                        .map(|b| (dist(points.point(i), &b.centre) - b.radius, &b.centre))
                        .min_by(|a, b| a.0.total_cmp(&b.0));
                    match target {
                        Some((_, c)) if selected => {
                            let v = sub(c, points.point(i));
                            let len = norm(&v);
                            if len > 0.0 {
                                (v.iter().map(|x| x / len).collect(), 1.0)
                            } else {
                                (vec![0.0; dim], 0.0)
                            }
                        }
                        _ => (vec![0.0; dim], 0.0),
                    }
                })
                .unzip()
        }
    };
    Ok(PointPerturbation {
        rho,
        seed,
        model,
        directions,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_arithmetic() {
        let b = stability_budget(0.25, 0.8, 0.05, 0.1, 0.5).unwrap();
        assert!((b.rho_point - 0.25 * 0.8 * 0.05 / 18.0).abs() < 1e-18);
        let g = stability_budget(0.5, 0.5, 0.3, 0.3, 1.0).unwrap();
        assert_eq!(g.rho_generic, 0.3 / 84.0);
        assert!(stability_budget(0.0, 0.5, 0.1, 0.2, 0.5).is_err());
        assert!(stability_budget(0.5, 0.5, 0.3, 0.2, 0.5).is_err());
        assert!(stability_budget(1.5, 0.5, 0.1, 0.2, 0.5).is_err());
    }

    #[test]
    fn perturbation_displacements() {
        let pts =
            PointSet::from_coords(&[[0.0, 0.0], [1.0, 0.1], [0.2, 1.0], [1.1, 1.2], [0.5, 0.45]])
                .unwrap();
        for model in PerturbationModel::ALL {
            let z = make_point_perturbation(&pts, 0.05, 9, model).unwrap();
            assert!(z.max_displacement(&pts) <= 0.05 * (1.0 + 1e-12));
            assert_eq!(z, make_point_perturbation(&pts, 0.05, 9, model).unwrap());
            let id = z.scaled(0.0).images(&pts).unwrap();
            assert_eq!(id, pts);
        }
        let radial = make_point_perturbation(&pts, 0.05, 1, PerturbationModel::Radial).unwrap();
        for i in 0..pts.len() {
            let d = dist(&radial.image(&pts, i), pts.point(i));
            assert!((d - 0.05).abs() < 1e-12);
        }
        assert!(make_point_perturbation(&pts, 0.6, 1, PerturbationModel::Uniform).is_err());
    }
}
