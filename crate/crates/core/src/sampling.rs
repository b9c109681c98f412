//! Seeded random sampling shared by the schedules, diagnostics and the
//! benchmark generator.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Vector;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent child seed, e.g. one per benchmark cell.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer over the combined input
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn uniform(rng: &mut SeededRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

pub fn standard_normal(rng: &mut SeededRng) -> f64 {
    // Box–Muller; 1 - u keeps the logarithm finite
    let u: f64 = 1.0 - rng.gen::<f64>();
    let v: f64 = rng.gen::<f64>();
    libm::sqrt(-2.0 * libm::log(u)) * libm::cos(2.0 * PI * v)
}

pub fn unit_direction(rng: &mut SeededRng, dim: usize) -> Vector {
    loop {
        let g: Vector = (0..dim).map(|_| standard_normal(rng)).collect();
        let n = g.norm();
        if n > 1e-300 {
            return g.scale(1.0 / n);
        }
    }
}

/// Uniform point in `ball(center; radius)`: uniform direction times `radius * u^(1/dim)`.
pub fn in_ball(rng: &mut SeededRng, center: &Vector, radius: f64) -> Vector {
    let dim = center.dim();
    let dir = unit_direction(rng, dim);
    let r = radius * libm::pow(rng.gen::<f64>(), 1.0 / dim as f64);
    let mut x = center.clone();
    x.axpy(r, &dir);
    x
}

/// `count` points uniform in `ball(0; radius)` of `R^dim`, generated up front.
pub fn ball_samples(dim: usize, radius: f64, count: usize, seed: u64) -> Vec<Vector> {
    let mut r = rng(seed);
    let origin = Vector::zeros(dim);
    (0..count).map(|_| in_ball(&mut r, &origin, radius)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_samples_stay_inside_and_repeat() {
        let a = ball_samples(5, 2.5, 500, 7);
        assert!(a.iter().all(|x| x.norm() <= 2.5 + 1e-12));
        assert_eq!(a, ball_samples(5, 2.5, 500, 7));
        assert_ne!(a, ball_samples(5, 2.5, 500, 8));
    }

    #[test]
    fn ball_radius_distribution_in_r1_is_uniform() {
        // in one dimension the sample is uniform on [-r, r]
        let xs = ball_samples(1, 1.0, 20_000, 3);
        let frac = xs.iter().filter(|x| x[0].abs() < 0.5).count() as f64 / 20_000.0;
        assert!((frac - 0.5).abs() < 0.02, "{frac}");
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_eq!(derive_seed(9, 4), derive_seed(9, 4));
    }
}
