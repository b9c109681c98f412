use alloc::vec::Vec;

use super::{Tolerances, Vector};
use crate::{Error, Result};

/// A closed convex set with a closed-form Euclidean projection.
///
/// Use the checked constructors; they enforce the invariants listed on each
/// variant. `project`, `reflect` and `distance` re-check only the cheap ones
/// (dimensions, nonzero normals).
#[derive(Debug, Clone, PartialEq)]
pub enum SetDescriptor {
    /// `{x : <normal, x> = offset}`
    Hyperplane { normal: Vector, offset: f64 },
    /// `{x : <normal, x> <= offset}`
    Halfspace { normal: Vector, offset: f64 },
    /// Componentwise bounds; infinite entries leave that side open.
    Box { lower: Vector, upper: Vector },
    Ball { center: Vector, radius: f64 },
    /// `basepoint + span(basis)`, basis orthonormal.
    AffineSubspace { basepoint: Vector, basis: Vec<Vector> },
    /// `R^k_+ x {0}^(n-k)`
    OrthantFace { n: usize, k: usize },
}

impl SetDescriptor {
    pub fn hyperplane(normal: Vector, offset: f64) -> Result<Self> {
        let s = SetDescriptor::Hyperplane { normal, offset };
        s.validate(&Tolerances::default())?;
        Ok(s)
    }

    pub fn halfspace(normal: Vector, offset: f64) -> Result<Self> {
        let s = SetDescriptor::Halfspace { normal, offset };
        s.validate(&Tolerances::default())?;
        Ok(s)
    }

    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self> {
        let s = SetDescriptor::Box { lower, upper };
        s.validate(&Tolerances::default())?;
        Ok(s)
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        let s = SetDescriptor::Ball { center, radius };
        s.validate(&Tolerances::default())?;
        Ok(s)
    }

    pub fn affine(basepoint: Vector, basis: Vec<Vector>) -> Result<Self> {
        Self::affine_with(basepoint, basis, &Tolerances::default())
    }

    pub fn affine_with(basepoint: Vector, basis: Vec<Vector>, tol: &Tolerances) -> Result<Self> {
        let s = SetDescriptor::AffineSubspace { basepoint, basis };
        s.validate(tol)?;
        Ok(s)
    }

    pub fn orthant_face(n: usize, k: usize) -> Result<Self> {
        let s = SetDescriptor::OrthantFace { n, k };
        s.validate(&Tolerances::default())?;
        Ok(s)
    }

    /// The line `R * direction` through the origin (direction need not be unit).
    pub fn line_through_origin(direction: Vector) -> Result<Self> {
        let n = direction.norm();
        if n == 0.0 {
            return Err(Error::ZeroNormal);
        }
        let dim = direction.dim();
        Self::affine(Vector::zeros(dim), alloc::vec![direction.scale(1.0 / n)])
    }

    pub fn dim(&self) -> usize {
        match self {
            SetDescriptor::Hyperplane { normal, .. } | SetDescriptor::Halfspace { normal, .. } => {
                normal.dim()
            }
            SetDescriptor::Box { lower, .. } => lower.dim(),
            SetDescriptor::Ball { center, .. } => center.dim(),
            SetDescriptor::AffineSubspace { basepoint, .. } => basepoint.dim(),
            SetDescriptor::OrthantFace { n, .. } => *n,
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(
            self,
            SetDescriptor::Hyperplane { .. } | SetDescriptor::AffineSubspace { .. }
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SetDescriptor::Hyperplane { .. } => "hyperplane",
            SetDescriptor::Halfspace { .. } => "halfspace",
            SetDescriptor::Box { .. } => "box",
            SetDescriptor::Ball { .. } => "ball",
            SetDescriptor::AffineSubspace { .. } => "affine",
            SetDescriptor::OrthantFace { .. } => "orthant_face",
        }
    }

    /// Checks every invariant of the variant.
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        match self {
            SetDescriptor::Hyperplane { normal, offset }
            | SetDescriptor::Halfspace { normal, offset } => {
                if normal.dim() == 0 {
                    return Err(Error::invalid("normal", "empty vector"));
                }
                if !(normal.norm_sq() > 0.0) {
                    return Err(Error::ZeroNormal);
                }
                if !offset.is_finite() || normal.iter().any(|c| !c.is_finite()) {
                    return Err(Error::invalid("normal", "non-finite entry"));
                }
            }
            SetDescriptor::Box { lower, upper } => {
                if lower.dim() != upper.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: lower.dim(),
                        found: upper.dim(),
                    });
                }
                for (l, u) in lower.iter().zip(upper.iter()) {
                    if l.is_nan() || u.is_nan() || l > u {
                        return Err(Error::invalid("lower", "must be <= upper componentwise"));
                    }
                }
            }
            SetDescriptor::Ball { center, radius } => {
                if !(*radius >= 0.0) || !radius.is_finite() {
                    return Err(Error::invalid("radius", "must be finite and >= 0"));
                }
                if center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::invalid("center", "non-finite entry"));
                }
            }
            SetDescriptor::AffineSubspace { basepoint, basis } => {
                for (i, b) in basis.iter().enumerate() {
                    if b.dim() != basepoint.dim() {
                        return Err(Error::DimensionMismatch {
                            expected: basepoint.dim(),
                            found: b.dim(),
                        });
                    }
                    for (j, c) in basis.iter().enumerate().take(i + 1) {
                        let target = if i == j { 1.0 } else { 0.0 };
                        if (b.dot(c) - target).abs() > tol.orthonormality {
                            return Err(Error::invalid("basis", "vectors must be orthonormal"));
                        }
                    }
                }
            }
            SetDescriptor::OrthantFace { n, k } => {
                if k > n {
                    return Err(Error::invalid("k", "must satisfy 0 <= k <= n"));
                }
            }
        }
        Ok(())
    }

    fn check_point(&self, x: &Vector) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        if let SetDescriptor::Hyperplane { normal, .. } | SetDescriptor::Halfspace { normal, .. } =
            self
        {
            if !(normal.norm_sq() > 0.0) {
                return Err(Error::ZeroNormal);
            }
        }
        Ok(())
    }

    /// Nearest point of the set to `x`.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        self.check_point(x)?;
        Ok(self.project_unchecked(x))
    }

    /// `2 P x - x`.
    pub fn reflect(&self, x: &Vector) -> Result<Vector> {
        self.check_point(x)?;
        Ok(self.reflect_unchecked(x))
    }

    pub fn distance(&self, x: &Vector) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.distance_unchecked(x))
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        Ok(self.distance(x)? <= tol)
    }

    pub(crate) fn project_unchecked(&self, x: &Vector) -> Vector {
        match self {
            SetDescriptor::Hyperplane { normal, offset } => hyperplane_step(normal, *offset, x),
            SetDescriptor::Halfspace { normal, offset } => {
                if normal.dot(x) <= *offset {
                    x.clone()
                } else {
                    hyperplane_step(normal, *offset, x)
                }
            }
            SetDescriptor::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .map(|(&v, (&l, &u))| {
                    let v = if l.is_finite() { v.max(l) } else { v };
                    if u.is_finite() {
                        v.min(u)
                    } else {
                        v
                    }
                })
                .collect(),
            SetDescriptor::Ball { center, radius } => {
                let d = x.sub(center);
                let r = d.norm();
                if r <= *radius {
                    x.clone()
                } else {
                    let mut p = center.clone();
                    p.axpy(*radius / r, &d);
                    p
                }
            }
            SetDescriptor::AffineSubspace { basepoint, basis } => {
                let d = x.sub(basepoint);
                let mut p = basepoint.clone();
                for b in basis {
                    p.axpy(d.dot(b), b);
                }
                p
            }
            SetDescriptor::OrthantFace { k, .. } => x
                .iter()
                .enumerate()
                .map(|(i, &v)| if i < *k { v.max(0.0) } else { 0.0 })
                .collect(),
        }
    }

    pub(crate) fn reflect_unchecked(&self, x: &Vector) -> Vector {
        let p = self.project_unchecked(x);
        p.iter().zip(x.iter()).map(|(pi, xi)| 2.0 * pi - xi).collect()
    }

    pub(crate) fn distance_unchecked(&self, x: &Vector) -> f64 {
        match self {
            // closed forms avoid cancellation for far points
            SetDescriptor::Hyperplane { normal, offset } => {
                (normal.dot(x) - offset).abs() / normal.norm()
            }
            SetDescriptor::Halfspace { normal, offset } => {
                (normal.dot(x) - offset).max(0.0) / normal.norm()
            }
            _ => x.dist(&self.project_unchecked(x)),
        }
    }
}

fn hyperplane_step(normal: &Vector, offset: f64, x: &Vector) -> Vector {
    let t = (normal.dot(x) - offset) / normal.norm_sq();
    let mut p = x.clone();
    p.axpy(-t, normal);
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn v<const N: usize>(c: [f64; N]) -> Vector {
        Vector::from(c)
    }

    #[test]
    fn hyperplane_projection_of_origin() {
        let h = SetDescriptor::hyperplane(v([1.0, 1.0]), 2.0).unwrap();
        assert_eq!(h.project(&v([0.0, 0.0])).unwrap(), v([1.0, 1.0]));
        assert_eq!(h.project(&v([1.0, 1.0])).unwrap(), v([1.0, 1.0]));
    }

    #[test]
    fn hyperplane_projection_matches_grid_search() {
        // brute force over the line x1 + x2 = 2 parameterized as (t, 2 - t)
        let x = v([0.0, 0.0]);
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=40_000 {
            let t = -10.0 + i as f64 * 5e-4;
            let d = libm::hypot(x[0] - t, x[1] - (2.0 - t));
            if d < best.0 {
                best = (d, t);
            }
        }
        let h = SetDescriptor::hyperplane(v([1.0, 1.0]), 2.0).unwrap();
        let p = h.project(&x).unwrap();
        assert!((p[0] - best.1).abs() < 1e-3);
        assert!((p[1] - (2.0 - best.1)).abs() < 1e-3);
    }

    #[test]
    fn orthant_face_clamps() {
        let s = SetDescriptor::orthant_face(3, 2).unwrap();
        assert_eq!(s.project(&v([1.0, -2.0, 3.0])).unwrap(), v([1.0, 0.0, 0.0]));
    }

    #[test]
    fn reflect_examples() {
        let h = SetDescriptor::hyperplane(v([1.0, 0.0]), 0.0).unwrap();
        assert_eq!(h.reflect(&v([1.0, 1.0])).unwrap(), v([-1.0, 1.0]));
        let b = SetDescriptor::ball(v([0.0]), 1.0).unwrap();
        // 2 * P(2) - 2 with P(2) = 1
        assert_eq!(b.reflect(&v([2.0])).unwrap(), v([0.0]));
        let inside = v([0.3]);
        assert_eq!(b.reflect(&inside).unwrap(), inside);
    }

    #[test]
    fn distance_examples() {
        let h = SetDescriptor::hyperplane(v([0.0, 1.0]), 0.0).unwrap();
        assert_eq!(h.distance(&v([5.0, 3.0])).unwrap(), 3.0);
        let b = SetDescriptor::ball(v([0.0, 0.0]), 1.0).unwrap();
        assert_eq!(b.distance(&v([3.0, 4.0])).unwrap(), 4.0);
        // sampled boundary points never come closer than 4
        let min = (0..3600)
            .map(|i| {
                let a = i as f64 * core::f64::consts::PI / 1800.0;
                libm::hypot(3.0 - libm::cos(a), 4.0 - libm::sin(a))
            })
            .fold(f64::INFINITY, f64::min);
        assert!((min - 4.0).abs() < 1e-6);
        assert_eq!(b.distance(&v([0.1, 0.2])).unwrap(), 0.0);
    }

    #[test]
    fn ball_center_maps_to_itself() {
        let b = SetDescriptor::ball(v([1.0, 2.0]), 0.5).unwrap();
        assert_eq!(b.project(&v([1.0, 2.0])).unwrap(), v([1.0, 2.0]));
        let z = SetDescriptor::ball(v([0.0]), 0.0).unwrap();
        assert_eq!(z.project(&v([2.0])).unwrap(), v([0.0]));
    }

    #[test]
    fn box_with_infinite_bounds() {
        let s = SetDescriptor::boxed(
            v([0.0, f64::NEG_INFINITY]),
            v([f64::INFINITY, 1.0]),
        )
        .unwrap();
        assert_eq!(s.project(&v([-3.0, 5.0])).unwrap(), v([0.0, 1.0]));
        assert_eq!(s.project(&v([7.0, -9.0])).unwrap(), v([7.0, -9.0]));
    }

    #[test]
    fn halfspace_keeps_interior() {
        let s = SetDescriptor::halfspace(v([0.0, 2.0]), 2.0).unwrap();
        assert_eq!(s.project(&v([4.0, -1.0])).unwrap(), v([4.0, -1.0]));
        assert_eq!(s.project(&v([4.0, 3.0])).unwrap(), v([4.0, 1.0]));
    }

    #[test]
    fn errors() {
        assert_eq!(
            SetDescriptor::hyperplane(v([0.0, 0.0]), 1.0),
            Err(Error::ZeroNormal)
        );
        let raw = SetDescriptor::Hyperplane {
            normal: v([0.0, 0.0]),
            offset: 1.0,
        };
        assert_eq!(raw.project(&v([1.0, 1.0])), Err(Error::ZeroNormal));
        let h = SetDescriptor::hyperplane(v([1.0, 0.0]), 0.0).unwrap();
        assert!(matches!(
            h.project(&v([1.0, 0.0, 0.0])),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
        assert!(SetDescriptor::affine(v([0.0, 0.0]), vec![v([1.0, 0.0]), v([1.0, 1.0])]).is_err());
        assert!(SetDescriptor::orthant_face(2, 3).is_err());
        assert!(SetDescriptor::boxed(v([1.0]), v([0.0])).is_err());
        assert!(SetDescriptor::ball(v([0.0]), -1.0).is_err());
    }
}
