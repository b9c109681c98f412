//! Affine subspaces in both parametric and constraint form: intersections,
//! affine hulls, and the orthonormalization they need.

use alloc::vec::Vec;

use super::{SetDescriptor, Vector};
use crate::{Error, Result};

/// Relative threshold below which a Gram–Schmidt residual counts as dependent.
const RANK_TOL: f64 = 1e-10;

/// Orthonormal basis of `span(vectors)`, dropping dependent vectors.
///
/// Modified Gram–Schmidt with one reorthogonalization pass.
pub fn orthonormalize(vectors: &[Vector]) -> Vec<Vector> {
    let mut basis: Vec<Vector> = Vec::new();
    for v in vectors {
        let scale = v.norm();
        if scale == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = w.dot(q);
                w.axpy(-c, q);
            }
        }
        let n = w.norm();
        if n > RANK_TOL * scale {
            basis.push(w.scale(1.0 / n));
        }
    }
    basis
}

/// Orthonormal basis of the orthogonal complement of `span(basis)` in `R^dim`.
/// `basis` must already be orthonormal.
pub fn orthogonal_complement(basis: &[Vector], dim: usize) -> Vec<Vector> {
    let mut all: Vec<Vector> = basis.to_vec();
    let start = all.len();
    for i in 0..dim {
        if all.len() == dim {
            break;
        }
        let mut w = Vector::unit(dim, i);
        for _ in 0..2 {
            for q in &all {
                let c = w.dot(q);
                w.axpy(-c, q);
            }
        }
        let n = w.norm();
        if n > 1e-8 {
            all.push(w.scale(1.0 / n));
        }
    }
    all.split_off(start)
}

/// `point + span(directions)`, also stored as `{x : <q, x - point> = 0 for q in normals}`.
/// Both bases are orthonormal and together span the ambient space.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSet {
    point: Vector,
    directions: Vec<Vector>,
    normals: Vec<Vector>,
}

impl AffineSet {
    pub fn from_spanning(point: Vector, spanning: &[Vector]) -> Self {
        let directions = orthonormalize(spanning);
        let normals = orthogonal_complement(&directions, point.dim());
        AffineSet {
            point,
            directions,
            normals,
        }
    }

    pub fn whole_space(dim: usize) -> Self {
        let spanning: Vec<Vector> = (0..dim).map(|i| Vector::unit(dim, i)).collect();
        Self::from_spanning(Vector::zeros(dim), &spanning)
    }

    pub fn from_descriptor(s: &SetDescriptor) -> Result<Self> {
        match s {
            SetDescriptor::Hyperplane { normal, offset } => {
                let nn = normal.norm_sq();
                if !(nn > 0.0) {
                    return Err(Error::ZeroNormal);
                }
                let point = normal.scale(offset / nn);
                let normals = orthonormalize(core::slice::from_ref(normal));
                let directions = orthogonal_complement(&normals, normal.dim());
                Ok(AffineSet {
                    point,
                    directions,
                    normals,
                })
            }
            SetDescriptor::AffineSubspace { basepoint, basis } => {
                Ok(Self::from_spanning(basepoint.clone(), basis))
            }
            _ => Err(Error::NotAffine),
        }
    }

    pub fn dim(&self) -> usize {
        self.point.dim()
    }

    /// Dimension of the direction space.
    pub fn rank(&self) -> usize {
        self.directions.len()
    }

    pub fn point(&self) -> &Vector {
        &self.point
    }

    pub fn directions(&self) -> &[Vector] {
        &self.directions
    }

    pub fn normals(&self) -> &[Vector] {
        &self.normals
    }

    pub fn project(&self, x: &Vector) -> Vector {
        let d = x.sub(&self.point);
        if self.directions.len() <= self.normals.len() {
            let mut p = self.point.clone();
            for b in &self.directions {
                p.axpy(d.dot(b), b);
            }
            p
        } else {
            let mut p = x.clone();
            for q in &self.normals {
                p.axpy(-d.dot(q), q);
            }
            p
        }
    }

    pub fn distance(&self, x: &Vector) -> f64 {
        let d = x.sub(&self.point);
        let s: f64 = self.normals.iter().map(|q| {
            let c = d.dot(q);
            c * c
        }).sum();
        libm::sqrt(s)
    }

    pub fn to_descriptor(&self) -> SetDescriptor {
        SetDescriptor::AffineSubspace {
            basepoint: self.point.clone(),
            basis: self.directions.clone(),
        }
    }

    /// Intersection of the two sets, or [`Error::EmptyIntersection`].
    pub fn intersect(&self, other: &AffineSet) -> Result<AffineSet> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        // stacked constraints <q, x> = <q, point>, orthonormalized with their right-hand sides
        let rows = self
            .normals
            .iter()
            .map(|q| (q, q.dot(&self.point)))
            .chain(other.normals.iter().map(|q| (q, q.dot(&other.point))));
        let scale = 1.0 + self.point.max_abs().max(other.point.max_abs());
        let mut qs: Vec<Vector> = Vec::new();
        let mut rhs: Vec<f64> = Vec::new();
        for (row, c) in rows {
            let mut w = row.clone();
            let mut b = c;
            for _ in 0..2 {
                for (q, cq) in qs.iter().zip(&rhs) {
                    let t = w.dot(q);
                    w.axpy(-t, q);
                    b -= t * cq;
                }
            }
            let n = w.norm();
            if n > 1e-8 {
                qs.push(w.scale(1.0 / n));
                rhs.push(b / n);
            } else if b.abs() > 1e-8 * scale {
                return Err(Error::EmptyIntersection);
            }
        }
        let mut point = Vector::zeros(self.dim());
        for (q, c) in qs.iter().zip(&rhs) {
            point.axpy(*c, q);
        }
        let directions = orthogonal_complement(&qs, self.dim());
        Ok(AffineSet {
            point,
            directions,
            normals: qs,
        })
    }

    /// Smallest affine subspace containing both sets.
    pub fn hull(&self, other: &AffineSet) -> AffineSet {
        let mut spanning = self.directions.clone();
        spanning.extend(other.directions.iter().cloned());
        spanning.push(other.point.sub(&self.point));
        AffineSet::from_spanning(self.point.clone(), &spanning)
    }

    /// Intersection of all descriptors, which must be affine.
    pub fn intersect_all(sets: &[SetDescriptor]) -> Result<AffineSet> {
        let (first, rest) = sets.split_first().ok_or(Error::EmptyList("sets"))?;
        let mut acc = AffineSet::from_descriptor(first)?;
        for s in rest {
            acc = acc.intersect(&AffineSet::from_descriptor(s)?)?;
        }
        Ok(acc)
    }
}
