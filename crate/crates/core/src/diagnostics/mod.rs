//! Empirical estimators for regularity constants and checkers for the
//! inequalities that drive linear convergence.
//!
//! Sampled suprema are lower bounds on the true constants. Every estimator is
//! deterministic given its seed: samples are generated up front.

mod dr;
mod family;

pub use dr::{check_transversality_bound, dr_fix_distance, DrFixOracle, DrPair, TransversalityReport};
pub use family::{estimate_family_mu, FamilyRegularityEstimate, IntersectionOracle};


use crate::geometry::Vector;
use crate::operators::FixedPointMap;
use crate::sampling;
use crate::{Error, Result};

/// Residual below which a sample counts as a fixed point of `T`.
pub const ZERO_RESIDUAL: f64 = 1e-14;
/// Fix-distance above which a zero-residual sample breaks regularity.
pub const POSITIVE_DISTANCE: f64 = 1e-10;
/// Coordinate hill-climb budget used to refine the sampled argmax.
pub const REFINE_STEPS: usize = 100;
pub const REFINE_STEP_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityEstimate {
    pub rho: f64,
    /// Max sampled `d_{Fix T}(x) / ||x - Tx||`; infinite when `violation` is set.
    pub kappa_hat: f64,
    pub sample_count: usize,
    pub argmax: Option<Vector>,
    /// A sample with zero residual and positive Fix-distance.
    pub violation: Option<Vector>,
}

fn regularity_ratio(map: &FixedPointMap, fix_distance: &dyn Fn(&Vector) -> f64, x: &Vector) -> Option<f64> {
    let r = x.dist(&map.apply_unchecked(x));
    let d = fix_distance(x);
    if r < ZERO_RESIDUAL {
        if d > POSITIVE_DISTANCE {
            Some(f64::INFINITY)
        } else {
            None
        }
    } else {
        Some(d / r)
    }
}

/// Sampled lower bound for the constant `kappa(rho)` in
/// `d_{Fix T}(x) <= kappa ||x - Tx||` on `ball(0; rho)`, refined by a short
/// coordinate hill climb around the best sample.
pub fn estimate_kappa(map: &FixedPointMap, rho: f64, n_samples: usize, seed: u64) -> Result<RegularityEstimate> {
    if !map.has_fix_distance() {
        return Err(Error::MissingFixDistance);
    }
    if !(rho > 0.0) {
        return Err(Error::invalid("rho", "must be > 0"));
    }
    if n_samples == 0 {
        return Err(Error::invalid("n_samples", "must be >= 1"));
    }
    let fd = |x: &Vector| map.fix_distance(x).ok().flatten().unwrap_or(0.0);
    let samples = sampling::ball_samples(map.dim(), rho, n_samples, seed);
    let mut best: Option<(f64, Vector)> = None;
    for x in samples {
        match regularity_ratio(map, &fd, &x) {
            Some(r) if r.is_infinite() => {
                return Ok(RegularityEstimate {
                    rho,
                    kappa_hat: f64::INFINITY,
                    sample_count: n_samples,
                    argmax: Some(x.clone()),
                    violation: Some(x),
                })
            }
            Some(r) if best.as_ref().map_or(true, |(b, _)| r > *b) => best = Some((r, x)),
            _ => {}
        }
    }
    let Some((mut kappa, mut arg)) = best else {
        return Ok(RegularityEstimate {
            rho,
            kappa_hat: 0.0,
            sample_count: n_samples,
            argmax: None,
            violation: None,
        });
    };

    let h = REFINE_STEP_FRACTION * rho;
    for _ in 0..REFINE_STEPS {
        let mut improved = false;
        for i in 0..arg.dim() {
            for sign in [1.0, -1.0] {
                let mut cand = arg.clone();
                cand[i] += sign * h;
                if cand.norm() > rho {
                    continue;
                }
                if let Some(r) = regularity_ratio(map, &fd, &cand) {
                    if r > kappa {
                        if r.is_infinite() {
                            return Ok(RegularityEstimate {
                                rho,
                                kappa_hat: f64::INFINITY,
                                sample_count: n_samples,
                                argmax: Some(cand.clone()),
                                violation: Some(cand),
                            });
                        }
                        kappa = r;
                        arg = cand;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok(RegularityEstimate {
        rho,
        kappa_hat: kappa,
        sample_count: n_samples,
        argmax: Some(arg),
        violation: None,
    })
}

/// `sigma = (1 - a) / a` for an `a`-averaged map, the constant in
/// `sigma ||x - Tx||^2 <= ||x - z||^2 - ||Tx - z||^2` for `z` in `Fix T`.
pub fn sigma_of(map: &FixedPointMap) -> Result<f64> {
    let a = map.averagedness().ok_or(Error::MissingAveragedness)?;
    Ok((1.0 - a) / a)
}

/// Largest `sigma ||x - Tx||^2 - (||x - z||^2 - ||Tx - z||^2)` over the pairs.
pub fn averaged_inequality_violation(map: &FixedPointMap, sigma: f64, pairs: &[(Vector, Vector)]) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for (x, z) in pairs {
        let tx = map.apply(x)?;
        let lhs = sigma * x.sub(&tx).norm_sq();
        let rhs = x.sub(z).norm_sq() - tx.sub(z).norm_sq();
        worst = worst.max(lhs - rhs);
    }
    Ok(worst)
}

/// For `y = sum_i w_i T_i x` and a common fixed point `z`, the excesses of
/// `||y - z||^2 + sum_i w_i sigma_i ||x - T_i x||^2` and of
/// `||y - z||^2 + sigma_+ ||x - y||^2` over `||x - z||^2`.
pub fn combination_inequality_violation(
    maps: &[FixedPointMap],
    weights: &[f64],
    x: &Vector,
    z: &Vector,
) -> Result<(f64, f64)> {
    if maps.len() != weights.len() || maps.is_empty() {
        return Err(Error::invalid("weights", "one weight per map is required"));
    }
    let mut y = Vector::zeros(x.dim());
    let mut weighted = 0.0;
    let mut sigma_plus = f64::INFINITY;
    for (t, w) in maps.iter().zip(weights) {
        if *w <= 0.0 {
            continue;
        }
        let s = sigma_of(t)?;
        let tx = t.apply(x)?;
        weighted += w * s * x.sub(&tx).norm_sq();
        sigma_plus = sigma_plus.min(s);
        y.axpy(*w, &tx);
    }
    let lhs = x.sub(z).norm_sq();
    let yz = y.sub(z).norm_sq();
    Ok((yz + weighted - lhs, yz + sigma_plus * x.sub(&y).norm_sq() - lhs))
}

/// Constants of the key inequalities derived from `(kappa, sigma)`:
/// `alpha = sqrt(k2 / (1 + k2))` with `k2 = kappa^2 / sigma`,
/// `beta = (1 - alpha)^2`, `gamma = sigma / kappa^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyConstants {
    pub kappa: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl KeyConstants {
    /// `alpha` alone; defined for `kappa = 0` as well.
    pub fn alpha_for(kappa: f64, sigma: f64) -> f64 {
        let k2 = kappa * kappa / sigma;
        libm::sqrt(k2 / (1.0 + k2))
    }
}

pub fn key_constants(kappa: f64, sigma: f64) -> Result<KeyConstants> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid("sigma", "must be finite and > 0"));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::invalid("kappa", "must be finite and > 0 (gamma = sigma / kappa^2)"));
    }
    let alpha = KeyConstants::alpha_for(kappa, sigma);
    Ok(KeyConstants {
        kappa,
        sigma,
        alpha,
        beta: (1.0 - alpha) * (1.0 - alpha),
        gamma: sigma / (kappa * kappa),
    })
}

/// Max violation of each key inequality over the samples; positive values
/// mean the inequality failed somewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyInequalityReport {
    /// `d(Tx) - alpha d(x)`
    pub key1: f64,
    /// `beta d(x)^2 - (d(x) - d(Tx))^2`
    pub key2_lower: f64,
    /// `(d(x) - d(Tx))^2 - ||x - Tx||^2`
    pub key2_upper: f64,
    /// `d_C(Tx)^2 - d_C(x)^2 + gamma d(x)^2`
    pub key3: f64,
    pub samples: usize,
}

impl KeyInequalityReport {
    pub fn max_violation(&self) -> f64 {
        self.key1.max(self.key2_lower).max(self.key2_upper).max(self.key3)
    }
}

/// Evaluates the three key inequalities on `ball(0; rho)`. `subset_distance`
/// is `d_C` for some nonempty `C` inside `Fix T`.
pub fn verify_key_inequalities<F>(
    map: &FixedPointMap,
    subset_distance: F,
    consts: &KeyConstants,
    rho: f64,
    n_samples: usize,
    seed: u64,
) -> Result<KeyInequalityReport>
where
    F: Fn(&Vector) -> f64,
{
    if !map.has_fix_distance() {
        return Err(Error::MissingFixDistance);
    }
    let points = sampling::ball_samples(map.dim(), rho, n_samples, seed);
    key_inequalities_at(map, subset_distance, consts, &points)
}

pub fn key_inequalities_at<F>(
    map: &FixedPointMap,
    subset_distance: F,
    consts: &KeyConstants,
    points: &[Vector],
) -> Result<KeyInequalityReport>
where
    F: Fn(&Vector) -> f64,
{
    let mut rep = KeyInequalityReport {
        key1: f64::NEG_INFINITY,
        key2_lower: f64::NEG_INFINITY,
        key2_upper: f64::NEG_INFINITY,
        key3: f64::NEG_INFINITY,
        samples: points.len(),
    };
    for x in points {
        let tx = map.apply(x)?;
        let d = map.fix_distance(x)?.ok_or(Error::MissingFixDistance)?;
        let dt = map.fix_distance(&tx)?.ok_or(Error::MissingFixDistance)?;
        let drop = (d - dt) * (d - dt);
        rep.key1 = rep.key1.max(dt - consts.alpha * d);
        rep.key2_lower = rep.key2_lower.max(consts.beta * d * d - drop);
        rep.key2_upper = rep.key2_upper.max(drop - x.sub(&tx).norm_sq());
        let (c, ct) = (subset_distance(x), subset_distance(&tx));
        rep.key3 = rep.key3.max(ct * ct - c * c + consts.gamma * d * d);
    }
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngleReport {
    /// Max sampled cosine of the angle at `y(x)` between `x` and `Tx`.
    pub theta_hat: f64,
    /// `1 / sqrt(1 - theta_hat)`, the regularity constant the angle condition implies.
    pub kappa_bound: f64,
    pub valid_samples: usize,
}

/// Samples `<x - y, Tx - y> / (||x - y|| ||Tx - y||)` with `y` the map's
/// fixed-point selector; samples where either norm vanishes are skipped.
pub fn check_angle_condition(map: &FixedPointMap, rho: f64, n_samples: usize, seed: u64) -> Result<AngleReport> {
    if !map.has_fix_projector() {
        return Err(Error::MissingFixProjector);
    }
    let mut theta = f64::NEG_INFINITY;
    let mut valid = 0;
    for x in sampling::ball_samples(map.dim(), rho, n_samples, seed) {
        let y = map.fix_point(&x)?.ok_or(Error::MissingFixProjector)?;
        let tx = map.apply_unchecked(&x);
        let (u, v) = (x.sub(&y), tx.sub(&y));
        let (nu, nv) = (u.norm(), v.norm());
        if nu < ZERO_RESIDUAL || nv < ZERO_RESIDUAL {
            continue;
        }
        valid += 1;
        theta = theta.max(u.dot(&v) / (nu * nv));
    }
    if valid == 0 {
        theta = 0.0;
    }
    let kappa_bound = if theta < 1.0 {
        1.0 / libm::sqrt(1.0 - theta)
    } else {
        f64::INFINITY
    };
    Ok(AngleReport {
        theta_hat: theta,
        kappa_bound,
        valid_samples: valid,
    })
}

/// Worst-case rate implied by the quasi-cyclic convergence proof:
/// `lambda = p (1 / (w_+ sigma_+ beta_+) + 1 / sigma_+)` and
/// `d_Z^2(x_{(k+1)p}) <= (1 - 1 / (lambda mu^2)) d_Z^2(x_{kp})`.
/// Reported for comparison only; it is far from tight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedRate {
    pub lambda: f64,
    /// Factor on `d_Z^2` per window of `p` steps.
    pub per_window_sq: f64,
    /// Equivalent geometric rate per step for `d_Z`.
    pub per_step: f64,
}

pub fn predicted_rate(window: usize, weight_floor: f64, sigma_plus: f64, beta_plus: f64, mu: f64) -> Result<PredictedRate> {
    if window == 0 || !(weight_floor > 0.0) || !(sigma_plus > 0.0) || !(beta_plus > 0.0) || !(mu > 0.0) {
        return Err(Error::invalid("predicted_rate", "all constants must be positive"));
    }
    let p = window as f64;
    let lambda = p * (1.0 / (weight_floor * sigma_plus * beta_plus) + 1.0 / sigma_plus);
    let per_window_sq = (1.0 - 1.0 / (lambda * mu * mu)).max(0.0);
    Ok(PredictedRate {
        lambda,
        per_window_sq,
        per_step: libm::pow(per_window_sq, 1.0 / (2.0 * p)),
    })
}
