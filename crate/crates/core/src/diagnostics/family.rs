use alloc::vec::Vec;

use crate::geometry::{AffineSet, SetDescriptor, Vector};
use crate::sampling;
use crate::{Error, Result};

/// Inner-loop budget for the surrogate intersection projection.
pub const SURROGATE_MAX_ITER: usize = 10_000;
pub const SURROGATE_TOL: f64 = 1e-10;

/// Distance to `C = n_i C_i`: exact for affine families, or a Dykstra inner
/// loop when explicitly requested for mixed families.
#[derive(Debug, Clone, PartialEq)]
pub enum IntersectionOracle {
    Exact(AffineSet),
    Surrogate(Vec<SetDescriptor>),
}

impl IntersectionOracle {
    /// Exact oracle; refuses families with a non-affine member.
    pub fn exact(sets: &[SetDescriptor]) -> Result<Self> {
        if sets.iter().any(|s| !s.is_affine()) {
            return Err(Error::NotAffine);
        }
        Ok(IntersectionOracle::Exact(AffineSet::intersect_all(sets)?))
    }

    /// Exact when possible, Dykstra surrogate otherwise.
    pub fn with_surrogate(sets: &[SetDescriptor]) -> Result<Self> {
        match Self::exact(sets) {
            Err(Error::NotAffine) => {
                if sets.is_empty() {
                    return Err(Error::EmptyList("sets"));
                }
                Ok(IntersectionOracle::Surrogate(sets.to_vec()))
            }
            other => other,
        }
    }

    pub fn is_surrogate(&self) -> bool {
        matches!(self, IntersectionOracle::Surrogate(_))
    }

    pub fn project(&self, x: &Vector) -> Vector {
        match self {
            IntersectionOracle::Exact(c) => c.project(x),
            IntersectionOracle::Surrogate(sets) => dykstra(sets, x),
        }
    }

    pub fn distance(&self, x: &Vector) -> f64 {
        match self {
            IntersectionOracle::Exact(c) => c.distance(x),
            IntersectionOracle::Surrogate(_) => x.dist(&self.project(x)),
        }
    }
}

/// Dykstra's cyclic projection scheme, which converges to the projection onto
/// the intersection (plain alternating projections only find some point of it).
fn dykstra(sets: &[SetDescriptor], x: &Vector) -> Vector {
    let mut y = x.clone();
    let mut incr: Vec<Vector> = sets.iter().map(|_| Vector::zeros(x.dim())).collect();
    for _ in 0..SURROGATE_MAX_ITER {
        let prev = y.clone();
        for (s, p) in sets.iter().zip(incr.iter_mut()) {
            let w = y.add(p);
            y = s.project_unchecked(&w);
            *p = w.sub(&y);
        }
        if y.dist(&prev) <= SURROGATE_TOL {
            break;
        }
    }
    y
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyRegularityEstimate {
    /// Max sampled `d_C(x) / max_i d_{C_i}(x)`.
    pub mu_hat: f64,
    pub rho: f64,
    /// Samples with a positive denominator.
    pub samples: usize,
    pub argmax: Vector,
    pub surrogate: bool,
}

/// Sampled lower bound on `mu(rho)` in `d_C(x) <= mu max_i d_{C_i}(x)` over `ball(0; rho)`.
pub fn estimate_family_mu(
    sets: &[SetDescriptor],
    intersection: &IntersectionOracle,
    rho: f64,
    n_samples: usize,
    seed: u64,
) -> Result<FamilyRegularityEstimate> {
    let first = sets.first().ok_or(Error::EmptyList("sets"))?;
    let dim = first.dim();
    if let Some(s) = sets.iter().find(|s| s.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: s.dim(),
        });
    }
    if !(rho > 0.0) {
        return Err(Error::invalid("rho", "must be > 0"));
    }
    let mut best: Option<(f64, Vector)> = None;
    let mut used = 0;
    for x in sampling::ball_samples(dim, rho, n_samples, seed) {
        let denom = sets
            .iter()
            .map(|s| s.distance_unchecked(&x))
            .fold(0.0, f64::max);
        if !(denom > 1e-14) {
            continue;
        }
        used += 1;
        let r = intersection.distance(&x) / denom;
        if best.as_ref().map_or(true, |(b, _)| r > *b) {
            best = Some((r, x));
        }
    }
    let (mu_hat, argmax) = best.ok_or(Error::AllSamplesFeasible)?;
    Ok(FamilyRegularityEstimate {
        mu_hat,
        rho,
        samples: used,
        argmax,
        surrogate: intersection.is_surrogate(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::two_lines;

    #[test]
    fn orthogonal_hyperplanes() {
        let sets = [
            SetDescriptor::hyperplane(Vector::from([1.0, 0.0]), 0.5).unwrap(),
            SetDescriptor::hyperplane(Vector::from([0.0, 1.0]), -0.5).unwrap(),
        ];
        let o = IntersectionOracle::exact(&sets).unwrap();
        let e = estimate_family_mu(&sets, &o, 3.0, 5000, 1).unwrap();
        // d_C^2 = d_1^2 + d_2^2 <= 2 max^2, attained on the diagonals through C
        assert!(e.mu_hat <= libm::sqrt(2.0) + 1e-12);
        assert!(e.mu_hat > libm::sqrt(2.0) - 1e-2);
        assert!(e.mu_hat >= 1.0);
    }

    #[test]
    fn identical_sets_give_one() {
        let h = SetDescriptor::hyperplane(Vector::from([1.0, 2.0, 2.0]), 1.0).unwrap();
        let sets = [h.clone(), h];
        let o = IntersectionOracle::exact(&sets).unwrap();
        let e = estimate_family_mu(&sets, &o, 2.0, 300, 2).unwrap();
        assert!((e.mu_hat - 1.0).abs() < 1e-12);
    }

    #[test]
    fn narrow_angles_are_less_regular() {
        let mu = |th: f64| {
            let (u, v) = two_lines(th).unwrap();
            let sets = [u, v];
            let o = IntersectionOracle::exact(&sets).unwrap();
            estimate_family_mu(&sets, &o, 1.0, 4000, 3).unwrap().mu_hat
        };
        let (narrow, wide) = (mu(core::f64::consts::PI / 60.0), mu(core::f64::consts::PI / 3.0));
        assert!(narrow > 5.0 * wide, "{narrow} vs {wide}");
    }

    #[test]
    fn mixed_family_needs_surrogate() {
        let sets = [
            SetDescriptor::ball(Vector::from([0.0, 0.0]), 1.0).unwrap(),
            SetDescriptor::hyperplane(Vector::from([1.0, 0.0]), 0.5).unwrap(),
        ];
        assert_eq!(IntersectionOracle::exact(&sets), Err(Error::NotAffine));
        let o = IntersectionOracle::with_surrogate(&sets).unwrap();
        assert!(o.is_surrogate());
        // nearest point of the chord {x1 = 0.5, |x2| <= sqrt(3)/2} to (3, 3)
        let p = o.project(&Vector::from([3.0, 3.0]));
        assert!(p.dist(&Vector::from([0.5, libm::sqrt(3.0) / 2.0])) < 1e-6, "{p:?}");
        let e = estimate_family_mu(&sets, &o, 2.0, 200, 4).unwrap();
        assert!(e.surrogate && e.mu_hat >= 1.0 - 1e-6);
    }

    #[test]
    fn all_feasible_samples_error() {
        let sets = [SetDescriptor::ball(Vector::from([0.0]), 10.0).unwrap()];
        let o = IntersectionOracle::with_surrogate(&sets).unwrap();
        assert_eq!(estimate_family_mu(&sets, &o, 1.0, 50, 0), Err(Error::AllSamplesFeasible));
    }
}
