use alloc::vec::Vec;

use crate::geometry::{AffineSet, SetDescriptor, Vector, MEMBERSHIP_TOL};
use crate::operators::{dr_operator, FixedPointMap};
use crate::sampling;
use crate::{Error, Result};

/// Ordered pair `(A, B)` for the Douglas–Rachford operator `P_B R_A + Id - P_A`.
#[derive(Debug, Clone, PartialEq)]
pub struct DrPair {
    pub a: SetDescriptor,
    pub b: SetDescriptor,
}

impl DrPair {
    pub fn new(a: SetDescriptor, b: SetDescriptor) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                found: b.dim(),
            });
        }
        Ok(DrPair { a, b })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn operator(&self) -> Result<FixedPointMap> {
        dr_operator(&self.a, &self.b)
    }

    /// `L = aff(A u B)`, available when both sets are affine.
    pub fn affine_hull(&self) -> Result<AffineSet> {
        let a = AffineSet::from_descriptor(&self.a)?;
        let b = AffineSet::from_descriptor(&self.b)?;
        Ok(a.hull(&b))
    }

    /// The DR map with its exact Fix-distance oracle and Fix projector attached.
    pub fn operator_with_oracle(&self) -> Result<FixedPointMap> {
        let oracle = dr_fix_distance(self)?;
        let selector = oracle.clone();
        Ok(self
            .operator()?
            .with_fix_distance(move |x| oracle.distance(x))
            .with_fix_projector(move |x| selector.project(x)))
    }
}

/// Exact `d_{Fix T}` for a DR pair of consistent affine sets:
/// `Fix T = (A n B) + Y^perp` with `Y = L - L`, hence
/// `d_{Fix T} = d_{A n B} o P_L` and `P_{Fix T} = Id - P_L + P_{A n B} P_L`.
#[derive(Debug, Clone, PartialEq)]
pub struct DrFixOracle {
    hull: AffineSet,
    intersection: AffineSet,
}

impl DrFixOracle {
    pub fn hull(&self) -> &AffineSet {
        &self.hull
    }

    pub fn intersection(&self) -> &AffineSet {
        &self.intersection
    }

    pub fn distance(&self, x: &Vector) -> f64 {
        self.intersection.distance(&self.hull.project(x))
    }

    pub fn project(&self, x: &Vector) -> Vector {
        let pl = self.hull.project(x);
        let mut y = x.sub(&pl);
        y.axpy(1.0, &self.intersection.project(&pl));
        y
    }
}

pub fn dr_fix_distance(pair: &DrPair) -> Result<DrFixOracle> {
    if !pair.a.is_affine() || !pair.b.is_affine() {
        return Err(Error::NotAffine);
    }
    let a = AffineSet::from_descriptor(&pair.a)?;
    let b = AffineSet::from_descriptor(&pair.b)?;
    let intersection = a.intersect(&b)?;
    Ok(DrFixOracle {
        hull: a.hull(&b),
        intersection,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransversalityReport {
    /// Smallest `theta >= 0` with `||x - Tx||^2 >= (1 - theta)/5 max(d_A^2, d_B^2)`
    /// on every sample, i.e. `max(0, 1 - 5 min ratio)`.
    pub theta_hat: f64,
    pub min_ratio: f64,
    /// Largest `(1 - theta)/5 max(d_A^2, d_B^2) - ||x - Tx||^2` for the caller's `theta`.
    pub max_violation: f64,
    pub samples: usize,
}

/// Samples `L n ball(center; delta)` (`L = aff(A u B)` for affine pairs, the
/// whole space otherwise) and measures the DR residual against the larger of
/// the two set distances. Empirical only: it does not certify a neighbourhood.
pub fn check_transversality_bound(
    pair: &DrPair,
    center: &Vector,
    delta: f64,
    theta: f64,
    n_samples: usize,
    seed: u64,
) -> Result<TransversalityReport> {
    if center.dim() != pair.dim() {
        return Err(Error::DimensionMismatch {
            expected: pair.dim(),
            found: center.dim(),
        });
    }
    if !(delta > 0.0) {
        return Err(Error::invalid("delta", "must be > 0"));
    }
    let scale = 1.0 + center.max_abs();
    if pair.a.distance(center)? > MEMBERSHIP_TOL * scale || pair.b.distance(center)? > MEMBERSHIP_TOL * scale {
        return Err(Error::Infeasible("center"));
    }
    let directions: Vec<Vector> = match pair.affine_hull() {
        Ok(l) => l.directions().to_vec(),
        Err(_) => (0..pair.dim()).map(|i| Vector::unit(pair.dim(), i)).collect(),
    };
    let t = pair.operator()?;
    let mut min_ratio = f64::INFINITY;
    let mut max_violation = f64::NEG_INFINITY;
    let mut rng = sampling::rng(seed);
    let origin = Vector::zeros(directions.len());
    for _ in 0..n_samples {
        let coeffs = if directions.is_empty() {
            origin.clone()
        } else {
            sampling::in_ball(&mut rng, &origin, delta)
        };
        let mut x = center.clone();
        for (c, d) in coeffs.iter().zip(&directions) {
            x.axpy(*c, d);
        }
        let res = x.sub(&t.apply_unchecked(&x)).norm_sq();
        let da = pair.a.distance_unchecked(&x);
        let db = pair.b.distance_unchecked(&x);
        let m = (da * da).max(db * db);
        max_violation = max_violation.max((1.0 - theta) / 5.0 * m - res);
        if m > 0.0 {
            min_ratio = min_ratio.min(res / m);
        }
    }
    let theta_hat = if min_ratio.is_finite() {
        (1.0 - 5.0 * min_ratio).max(0.0)
    } else {
        0.0
    };
    Ok(TransversalityReport {
        theta_hat,
        min_ratio,
        max_violation,
        samples: n_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::two_lines;

    #[test]
    fn two_lines_oracle_is_the_norm() {
        let (u, v) = two_lines(0.7).unwrap();
        let o = dr_fix_distance(&DrPair::new(u, v).unwrap()).unwrap();
        assert_eq!(o.hull().rank(), 2);
        for x in sampling::ball_samples(2, 3.0, 50, 1) {
            assert!((o.distance(&x) - x.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_hyperplanes_fix_everything() {
        let h = SetDescriptor::hyperplane(Vector::from([1.0, -1.0, 2.0]), 0.3).unwrap();
        let pair = DrPair::new(h.clone(), h).unwrap();
        let o = dr_fix_distance(&pair).unwrap();
        let t = pair.operator().unwrap();
        for x in sampling::ball_samples(3, 5.0, 50, 2) {
            assert!(o.distance(&x) < 1e-12);
            assert!(x.dist(&t.apply(&x).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn non_affine_and_inconsistent_pairs_are_rejected() {
        let b = SetDescriptor::ball(Vector::zeros(2), 1.0).unwrap();
        let h = SetDescriptor::hyperplane(Vector::from([1.0, 0.0]), 0.0).unwrap();
        assert_eq!(dr_fix_distance(&DrPair::new(b, h.clone()).unwrap()), Err(Error::NotAffine));
        let h2 = SetDescriptor::hyperplane(Vector::from([1.0, 0.0]), 1.0).unwrap();
        assert_eq!(dr_fix_distance(&DrPair::new(h, h2).unwrap()), Err(Error::EmptyIntersection));
    }

    #[test]
    fn fix_projector_lands_on_fixed_points() {
        // lines in R^3 meeting at a point: L is a plane, Fix T = point + L^perp
        let a = SetDescriptor::affine(Vector::from([0.0, 0.0, 1.0]), alloc::vec![Vector::from([1.0, 0.0, 0.0])]).unwrap();
        let b = SetDescriptor::affine(Vector::from([0.0, 0.0, 1.0]), alloc::vec![Vector::from([0.0, 1.0, 0.0])]).unwrap();
        let pair = DrPair::new(a, b).unwrap();
        let t = pair.operator_with_oracle().unwrap();
        for x in sampling::ball_samples(3, 4.0, 100, 6) {
            let y = t.fix_point(&x).unwrap().unwrap();
            assert!(y.dist(&t.apply(&y).unwrap()) < 1e-12);
            assert!((t.fix_distance(&x).unwrap().unwrap() - x.dist(&y)).abs() < 1e-12);
        }
    }

    #[test]
    fn transversality_examples() {
        let (u, v) = two_lines(core::f64::consts::FRAC_PI_2).unwrap();
        let pair = DrPair::new(u, v).unwrap();
        let c = Vector::zeros(2);
        let r = check_transversality_bound(&pair, &c, 1.0, 0.0, 500, 3).unwrap();
        assert_eq!(r.theta_hat, 0.0);
        assert!(r.min_ratio >= 1.0 - 1e-12);
        assert!(r.max_violation <= 0.0);

        let (u, v) = two_lines(core::f64::consts::PI / 60.0).unwrap();
        let pair = DrPair::new(u, v).unwrap();
        let r = check_transversality_bound(&pair, &c, 1.0, 0.0, 2000, 3).unwrap();
        assert!(r.theta_hat > 0.98, "{}", r.theta_hat);
        assert!(r.max_violation > 0.0);

        let off = Vector::from([0.0, 1.0]);
        assert_eq!(check_transversality_bound(&pair, &off, 1.0, 0.0, 5, 3), Err(Error::Infeasible("center")));
    }
}
