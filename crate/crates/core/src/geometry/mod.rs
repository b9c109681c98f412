//! Ambient vector space and exact projections onto the convex-set catalog.

mod affine;
mod set;
mod vector;

pub use affine::{orthogonal_complement, orthonormalize, AffineSet};
pub use set::SetDescriptor;
pub use vector::Vector;

/// Membership residual accepted as "in the set".
pub const MEMBERSHIP_TOL: f64 = 1e-10;
/// Slack for inequality checks (nearest point, firm nonexpansiveness, ...).
pub const INEQUALITY_SLACK: f64 = 1e-9;
/// Allowed deviation of `<b_i, b_j>` from the Kronecker delta.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Floating-point slack used when checking geometric invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub membership: f64,
    pub inequality: f64,
    pub orthonormality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            membership: MEMBERSHIP_TOL,
            inequality: INEQUALITY_SLACK,
            orthonormality: ORTHONORMAL_TOL,
        }
    }
}
