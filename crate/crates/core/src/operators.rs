//! Fixed-point maps with known averagedness, their combinators, and the
//! Douglas–Rachford family of constructions.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{SetDescriptor, Vector};
use crate::{Error, Result};

pub type VectorFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;

/// An operator `T` on `R^dim` together with what is known about it.
///
/// * `averagedness` is `Some(a)` when `T = (1 - a) Id + a N` for some
///   nonexpansive `N`, `a` in `(0, 1)`.
/// * `fix_distance` is an exact oracle for `d_{Fix T}`.
/// * `fix_projector` selects a fixed point for each input (the nearest one
///   when it is available in closed form).
#[derive(Clone)]
pub struct FixedPointMap {
    dim: usize,
    rule: VectorFn,
    averagedness: Option<f64>,
    fix_distance: Option<ScalarFn>,
    fix_projector: Option<VectorFn>,
    label: String,
}

impl fmt::Debug for FixedPointMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FixedPointMap")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("averagedness", &self.averagedness)
            .field("fix_distance", &self.fix_distance.is_some())
            .field("fix_projector", &self.fix_projector.is_some())
            .finish()
    }
}

impl FixedPointMap {
    /// Wraps a rule that maps `R^dim` to itself. No averagedness is claimed.
    pub fn new<F>(dim: usize, label: impl Into<String>, rule: F) -> Self
    where
        F: Fn(&Vector) -> Vector + Send + Sync + 'static,
    {
        FixedPointMap {
            dim,
            rule: Arc::new(rule),
            averagedness: None,
            fix_distance: None,
            fix_projector: None,
            label: label.into(),
        }
    }

    pub fn with_averagedness(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid("averagedness", "must lie in (0, 1)"));
        }
        self.averagedness = Some(alpha);
        Ok(self)
    }

    pub fn with_fix_distance<F>(mut self, oracle: F) -> Self
    where
        F: Fn(&Vector) -> f64 + Send + Sync + 'static,
    {
        self.fix_distance = Some(Arc::new(oracle));
        self
    }

    pub fn with_fix_projector<F>(mut self, selector: F) -> Self
    where
        F: Fn(&Vector) -> Vector + Send + Sync + 'static,
    {
        self.fix_projector = Some(Arc::new(selector));
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn averagedness(&self) -> Option<f64> {
        self.averagedness
    }

    pub fn has_fix_distance(&self) -> bool {
        self.fix_distance.is_some()
    }

    pub fn has_fix_projector(&self) -> bool {
        self.fix_projector.is_some()
    }

    fn check(&self, x: &Vector) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(())
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        self.check(x)?;
        Ok((self.rule)(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &Vector) -> Vector {
        (self.rule)(x)
    }

    /// `||x - Tx||`
    pub fn residual(&self, x: &Vector) -> Result<f64> {
        Ok(x.dist(&self.apply(x)?))
    }

    /// `d_{Fix T}(x)` when an exact oracle is attached.
    pub fn fix_distance(&self, x: &Vector) -> Result<Option<f64>> {
        self.check(x)?;
        Ok(self.fix_distance.as_ref().map(|f| f(x)))
    }

    pub fn fix_point(&self, x: &Vector) -> Result<Option<Vector>> {
        self.check(x)?;
        Ok(self.fix_projector.as_ref().map(|f| f(x)))
    }
}

/// `(1 - relax) Id + relax P_C`, averaged with constant `relax / 2`.
pub fn relaxed_projector(s: &SetDescriptor, relax: f64) -> Result<FixedPointMap> {
    if !(relax > 0.0 && relax < 2.0) {
        return Err(Error::invalid("relax", "must lie in (0, 2); use `reflector` for 2"));
    }
    s.validate(&Default::default())?;
    let set = s.clone();
    let dist = s.clone();
    let proj = s.clone();
    let map = FixedPointMap::new(s.dim(), format!("relaxed_projector({}, {relax})", s.kind()), move |x| {
        let p = set.project_unchecked(x);
        if relax == 1.0 {
            return p;
        }
        x.iter()
            .zip(p.iter())
            .map(|(xi, pi)| (1.0 - relax) * xi + relax * pi)
            .collect()
    })
    .with_averagedness(relax / 2.0)?
    .with_fix_distance(move |x| dist.distance_unchecked(x))
    .with_fix_projector(move |x| proj.project_unchecked(x));
    Ok(map)
}

/// `P_C`.
pub fn projector(s: &SetDescriptor) -> Result<FixedPointMap> {
    relaxed_projector(s, 1.0).map(|m| m.with_label(format!("projector({})", s.kind())))
}

/// `R_C = 2 P_C - Id`. Nonexpansive but not averaged, so no constant is attached.
pub fn reflector(s: &SetDescriptor) -> Result<FixedPointMap> {
    s.validate(&Default::default())?;
    let set = s.clone();
    let dist = s.clone();
    let proj = s.clone();
    Ok(
        FixedPointMap::new(s.dim(), format!("reflector({})", s.kind()), move |x| {
            set.reflect_unchecked(x)
        })
        .with_fix_distance(move |x| dist.distance_unchecked(x))
        .with_fix_projector(move |x| proj.project_unchecked(x)),
    )
}

fn check_same_dim(a: &SetDescriptor, b: &SetDescriptor) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// Douglas–Rachford operator `P_B R_A + Id - P_A` for the ordered pair `(A, B)`.
/// Firmly nonexpansive, so the averagedness constant is 1/2.
pub fn dr_operator(a: &SetDescriptor, b: &SetDescriptor) -> Result<FixedPointMap> {
    check_same_dim(a, b)?;
    a.validate(&Default::default())?;
    b.validate(&Default::default())?;
    let (sa, sb) = (a.clone(), b.clone());
    FixedPointMap::new(a.dim(), format!("dr({}, {})", a.kind(), b.kind()), move |x| {
        let pa = sa.project_unchecked(x);
        let ra: Vector = pa.iter().zip(x.iter()).map(|(p, xi)| 2.0 * p - xi).collect();
        let mut y = sb.project_unchecked(&ra);
        // y + x - pa
        for ((yi, xi), pi) in y.as_mut_slice().iter_mut().zip(x.iter()).zip(pa.iter()) {
            *yi += xi - pi;
        }
        y
    })
    .with_averagedness(0.5)
}

/// Averagedness of `T2 T1` from the constants of `T1` and `T2`.
pub fn composed_averagedness(a1: f64, a2: f64) -> f64 {
    (a1 + a2 - 2.0 * a1 * a2) / (1.0 - a1 * a2)
}

/// `T_m ... T_2 T_1`: the first list element is applied first.
pub fn compose(maps: &[FixedPointMap]) -> Result<FixedPointMap> {
    let (first, rest) = maps.split_first().ok_or(Error::EmptyList("maps"))?;
    if rest.is_empty() {
        return Ok(first.clone());
    }
    for m in rest {
        if m.dim != first.dim {
            return Err(Error::DimensionMismatch {
                expected: first.dim,
                found: m.dim,
            });
        }
    }
    let averagedness = maps
        .iter()
        .map(|m| m.averagedness)
        .try_fold(None::<f64>, |acc, a| {
            let a = a?;
            Some(Some(match acc {
                None => a,
                Some(prev) => composed_averagedness(prev, a),
            }))
        })
        .flatten();
    let chain: Vec<FixedPointMap> = maps.to_vec();
    let label = {
        let names: Vec<&str> = maps.iter().rev().map(|m| m.label.as_str()).collect();
        names.join(" . ")
    };
    let mut out = FixedPointMap::new(first.dim, label, move |x| {
        let mut y = chain[0].apply_unchecked(x);
        for t in &chain[1..] {
            y = t.apply_unchecked(&y);
        }
        y
    });
    if let Some(a) = averagedness {
        // folding can round to 1 when a constituent is nearly nonexpansive only
        if a > 0.0 && a < 1.0 {
            out.averagedness = Some(a);
        }
    }
    Ok(out)
}

/// `x -> sum_i w_i T_i x`, skipping zero weights.
pub fn convex_combination(maps: &[FixedPointMap], weights: &[f64]) -> Result<FixedPointMap> {
    if maps.is_empty() {
        return Err(Error::EmptyList("maps"));
    }
    if maps.len() != weights.len() {
        return Err(Error::invalid("weights", "one weight per map is required"));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::invalid("weights", "must be nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("weights", "must sum to 1"));
    }
    let dim = maps[0].dim;
    if let Some(m) = maps.iter().find(|m| m.dim != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: m.dim,
        });
    }
    let active: Vec<(f64, FixedPointMap)> = weights
        .iter()
        .zip(maps)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, m)| (*w, m.clone()))
        .collect();
    let averagedness = active
        .iter()
        .map(|(w, m)| m.averagedness.map(|a| w * a))
        .sum::<Option<f64>>();
    let label = {
        let parts: Vec<String> = active
            .iter()
            .map(|(w, m)| format!("{w}*{}", m.label))
            .collect();
        parts.join(" + ")
    };
    if let [(w, only)] = active.as_slice() {
        if *w == 1.0 {
            return Ok(only.clone());
        }
    }
    let mut out = FixedPointMap::new(dim, label, move |x| {
        let mut acc = Vector::zeros(x.dim());
        for (w, t) in &active {
            acc.axpy(*w, &t.apply_unchecked(x));
        }
        acc
    });
    if let Some(a) = averagedness {
        if a > 0.0 && a < 1.0 {
            out.averagedness = Some(a);
        }
    }
    Ok(out)
}

/// Borwein–Tam operator `T_m ... T_1` with `T_i = DR(U_i, U_{i+1})` and `U_{m+1} = U_1`.
pub fn btm_chain(sets: &[SetDescriptor]) -> Result<FixedPointMap> {
    let m = sets.len();
    if m < 2 {
        return Err(Error::invalid("sets", "the Borwein-Tam chain needs at least 2 sets"));
    }
    let ops = (0..m)
        .map(|i| dr_operator(&sets[i], &sets[(i + 1) % m]))
        .collect::<Result<Vec<_>>>()?;
    Ok(compose(&ops)?.with_label(format!("btm[m={m}; U1->U2->...->U{m}->U1]")))
}

/// Cyclically anchored DR operator `T_m ... T_1` with `T_i = DR(anchor, walls[i])`.
pub fn cadra_chain(anchor: &SetDescriptor, walls: &[SetDescriptor]) -> Result<FixedPointMap> {
    if walls.is_empty() {
        return Err(Error::EmptyList("walls"));
    }
    let ops = walls
        .iter()
        .map(|b| dr_operator(anchor, b))
        .collect::<Result<Vec<_>>>()?;
    let m = walls.len();
    Ok(compose(&ops)?.with_label(format!("cadra[m={m}; anchor={}]", anchor.kind())))
}

/// Cyclic projections `P_{C_m} ... P_{C_1}` in list order.
pub fn cyclic_projections(sets: &[SetDescriptor]) -> Result<FixedPointMap> {
    let ops = sets.iter().map(projector).collect::<Result<Vec<_>>>()?;
    let m = sets.len();
    Ok(compose(&ops)?.with_label(format!("cyclic_projections[m={m}]")))
}

/// Soft thresholding on `R`: 0 on `[-1, 1]`, `x - 1` above, `x + 1` below.
/// `Fix T = {0}`; it is the proximity map of `|.|`, hence firmly nonexpansive.
pub fn thresholder_fixture() -> FixedPointMap {
    FixedPointMap {
        dim: 1,
        rule: Arc::new(|x: &Vector| {
            let v = x[0];
            let y = if v.abs() <= 1.0 {
                0.0
            } else if v > 1.0 {
                v - 1.0
            } else {
                v + 1.0
            };
            Vector::from([y])
        }),
        averagedness: Some(0.5),
        fix_distance: Some(Arc::new(|x: &Vector| x[0].abs())),
        fix_projector: Some(Arc::new(|_: &Vector| Vector::zeros(1))),
        label: String::from("thresholder"),
    }
}

/// The two lines `U = R(1, 0)` and `V = R(cos theta, sin theta)` in `R^2`.
pub fn two_lines(theta: f64) -> Result<(SetDescriptor, SetDescriptor)> {
    check_theta(theta)?;
    let u = SetDescriptor::line_through_origin(Vector::from([1.0, 0.0]))?;
    let v = SetDescriptor::line_through_origin(Vector::from([libm::cos(theta), libm::sin(theta)]))?;
    Ok((u, v))
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= core::f64::consts::FRAC_PI_2) {
        return Err(Error::invalid("theta", "must lie in (0, pi/2]"));
    }
    Ok(())
}

/// DR operator of two lines at angle `theta` in closed form:
/// `cos(theta)` times the rotation by `theta`. `Fix T = {0}`.
pub fn two_lines_fixture(theta: f64) -> Result<FixedPointMap> {
    check_theta(theta)?;
    // exact zero at the right angle so T is identically 0 there
    let (s, c) = if theta == core::f64::consts::FRAC_PI_2 {
        (1.0, 0.0)
    } else {
        (libm::sin(theta), libm::cos(theta))
    };
    FixedPointMap::new(2, format!("two_lines({theta})"), move |x| {
        Vector::from([c * (x[0] * c - x[1] * s), c * (x[0] * s + x[1] * c)])
    })
    .with_averagedness(0.5)
    .map(|m| {
        m.with_fix_distance(|x| x.norm())
            .with_fix_projector(|_| Vector::zeros(2))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn axes() -> (SetDescriptor, SetDescriptor) {
        (
            SetDescriptor::hyperplane(Vector::from([0.0, 1.0]), 0.0).unwrap(),
            SetDescriptor::hyperplane(Vector::from([1.0, 0.0]), 0.0).unwrap(),
        )
    }

    fn close(a: &Vector, b: &Vector, tol: f64) -> bool {
        a.dist(b) <= tol
    }

    #[test]
    fn relaxed_projector_examples() {
        let origin = SetDescriptor::ball(Vector::from([0.0]), 0.0).unwrap();
        let t = relaxed_projector(&origin, 0.5).unwrap();
        assert_eq!(t.apply(&Vector::from([2.0])).unwrap(), Vector::from([1.0]));
        assert_eq!(t.averagedness(), Some(0.25));

        let h = SetDescriptor::hyperplane(Vector::from([1.0, 0.0]), 0.0).unwrap();
        let t = relaxed_projector(&h, 1.5).unwrap();
        let x = Vector::from([2.0, 0.0]);
        let y = t.apply(&x).unwrap();
        assert_eq!(y, Vector::from([-1.0, 0.0]));
        let ratio = t.fix_distance(&x).unwrap().unwrap() / x.dist(&y);
        assert!((ratio - 1.0 / 1.5).abs() < 1e-15);

        let p = relaxed_projector(&h, 1.0).unwrap();
        let x = Vector::from([3.0, -7.0]);
        assert_eq!(p.apply(&x).unwrap(), h.project(&x).unwrap());
    }

    #[test]
    fn relaxation_out_of_range() {
        let h = SetDescriptor::hyperplane(Vector::from([1.0]), 0.0).unwrap();
        for r in [0.0, 2.0, -1.0, 2.5, f64::NAN] {
            assert!(relaxed_projector(&h, r).is_err());
        }
        assert_eq!(reflector(&h).unwrap().averagedness(), None);
    }

    #[test]
    fn dr_with_equal_sets() {
        // affine A: P_A R_A = P_A, so T = Id and Fix T is the whole space
        let (_, v) = axes();
        let t = dr_operator(&v, &v).unwrap();
        assert_eq!(t.apply(&Vector::from([3.0, 4.0])).unwrap(), Vector::from([3.0, 4.0]));
        // halfspace A: T = P_A outside, Id inside
        let h = SetDescriptor::halfspace(Vector::from([1.0, 0.0]), 0.0).unwrap();
        let t = dr_operator(&h, &h).unwrap();
        assert_eq!(t.apply(&Vector::from([3.0, 4.0])).unwrap(), Vector::from([0.0, 4.0]));
        assert_eq!(t.apply(&Vector::from([-3.0, 4.0])).unwrap(), Vector::from([-3.0, 4.0]));
    }

    #[test]
    fn dr_two_lines_matches_closed_form() {
        let (u, v) = two_lines(core::f64::consts::FRAC_PI_2).unwrap();
        let t = dr_operator(&u, &v).unwrap();
        assert!(t.apply(&Vector::from([1.0, 0.0])).unwrap().norm() < 1e-16);

        let th = core::f64::consts::FRAC_PI_6;
        let expected = Vector::from([0.75, libm::sqrt(3.0) / 4.0]);
        let (u, v) = two_lines(th).unwrap();
        let dr = dr_operator(&u, &v).unwrap();
        let fx = two_lines_fixture(th).unwrap();
        let x = Vector::from([1.0, 0.0]);
        assert!(close(&dr.apply(&x).unwrap(), &expected, 1e-15));
        assert!(close(&fx.apply(&x).unwrap(), &expected, 1e-15));
        // P_V P_U + P_{V^perp} P_{U^perp}
        let (pu, pv) = (u.project(&x).unwrap(), v.project(&x).unwrap());
        let direct = v.project(&pu).unwrap().add(&x.sub(&pu).sub(&v.project(&x.sub(&pu)).unwrap()));
        assert!(close(&direct, &expected, 1e-15));
        let _ = pv;
    }

    #[test]
    fn compose_examples() {
        let (xaxis, yaxis) = axes();
        let p1 = projector(&xaxis).unwrap();
        let p2 = projector(&yaxis).unwrap();
        let single = compose(&[p1.clone()]).unwrap();
        assert_eq!(single.label(), p1.label());
        let x = Vector::from([1.0, 1.0]);
        assert_eq!(compose(&[p1, p2]).unwrap().apply(&x).unwrap(), Vector::from([0.0, 0.0]));
        assert!((composed_averagedness(0.5, 0.5) - 2.0 / 3.0).abs() < 1e-15);
        assert!(compose(&[]).is_err());
    }

    #[test]
    fn compose_order_is_first_applied_first() {
        let add = FixedPointMap::new(1, "add", |x| Vector::from([x[0] + 1.0]));
        let dbl = FixedPointMap::new(1, "dbl", |x| Vector::from([2.0 * x[0]]));
        let c = compose(&[add, dbl]).unwrap();
        assert_eq!(c.apply(&Vector::from([1.0])).unwrap(), Vector::from([4.0]));
        assert_eq!(c.averagedness(), None);
    }

    #[test]
    fn convex_combination_examples() {
        let (xaxis, yaxis) = axes();
        let p1 = projector(&xaxis).unwrap();
        let p2 = projector(&yaxis).unwrap();
        let avg = convex_combination(&[p1.clone(), p2.clone()], &[0.5, 0.5]).unwrap();
        assert_eq!(avg.apply(&Vector::from([2.0, 2.0])).unwrap(), Vector::from([1.0, 1.0]));
        assert_eq!(avg.averagedness(), Some(0.5));
        let only = convex_combination(&[p1.clone(), p2.clone()], &[1.0, 0.0]).unwrap();
        let x = Vector::from([0.3, -2.7]);
        assert_eq!(only.apply(&x).unwrap(), p1.apply(&x).unwrap());
        assert!(convex_combination(&[p1.clone(), p2.clone()], &[1.2, -0.2]).is_err());
        assert!(convex_combination(&[p1, p2], &[0.5, 0.4]).is_err());
    }

    #[test]
    fn btm_examples() {
        let (xaxis, yaxis) = axes();
        // degenerate cycle over one affine set: both DR factors are the identity
        let same = btm_chain(&[xaxis.clone(), xaxis.clone()]).unwrap();
        let x = Vector::from([2.0, -5.0]);
        assert_eq!(same.apply(&x).unwrap(), x);
        let h = SetDescriptor::halfspace(Vector::from([0.0, 1.0]), 0.0).unwrap();
        let same = btm_chain(&[h.clone(), h.clone()]).unwrap();
        assert_eq!(same.apply(&x).unwrap(), x);
        let above = Vector::from([2.0, 5.0]);
        assert_eq!(same.apply(&above).unwrap(), h.project(&above).unwrap());

        // T1 = DR(x-axis, y-axis), T2 = DR(y-axis, x-axis); both equal cos(pi/2) * rotation = 0
        // as 2x2 matrices, so T2 T1 = 0.
        let chain = btm_chain(&[xaxis.clone(), yaxis.clone()]).unwrap();
        for x in [Vector::from([1.0, 0.0]), Vector::from([-3.0, 2.0])] {
            assert!(chain.apply(&x).unwrap().norm() < 1e-15);
        }
        assert!(btm_chain(&[xaxis]).is_err());
    }

    #[test]
    fn btm_matches_matrix_product_for_oblique_lines() {
        // DR(U, V) for lines at angle t is cos(t) rot(t); DR(V, U) is cos(t) rot(-t).
        let th = 0.4;
        let (u, v) = two_lines(th).unwrap();
        let chain = btm_chain(&[u, v]).unwrap();
        let x = Vector::from([0.7, -1.3]);
        let (s, c) = (libm::sin(th), libm::cos(th));
        let y1 = Vector::from([c * (x[0] * c - x[1] * s), c * (x[0] * s + x[1] * c)]);
        let y2 = Vector::from([c * (y1[0] * c + y1[1] * s), c * (-y1[0] * s + y1[1] * c)]);
        assert!(close(&chain.apply(&x).unwrap(), &y2, 1e-14));
    }

    #[test]
    fn cadra_examples() {
        let (xaxis, yaxis) = axes();
        let one = cadra_chain(&xaxis, &[yaxis.clone()]).unwrap();
        let dr = dr_operator(&xaxis, &yaxis).unwrap();
        let x = Vector::from([1.0, 0.0]);
        assert_eq!(one.apply(&x).unwrap(), dr.apply(&x).unwrap());
        assert!(one.apply(&x).unwrap().norm() < 1e-16);
        let same = cadra_chain(&xaxis, &[xaxis.clone()]).unwrap();
        let x = Vector::from([4.0, 9.0]);
        assert_eq!(same.apply(&x).unwrap(), x);
        let ball = SetDescriptor::ball(Vector::from([0.0, 0.0]), 1.0).unwrap();
        let same = cadra_chain(&ball, &[ball.clone()]).unwrap();
        let inside = Vector::from([0.3, -0.4]);
        assert_eq!(same.apply(&inside).unwrap(), inside);
        assert!(cadra_chain(&xaxis, &[]).is_err());
    }

    #[test]
    fn thresholder_values() {
        let t = thresholder_fixture();
        let at = |v: f64| t.apply(&Vector::from([v])).unwrap()[0];
        assert_eq!(at(0.5), 0.0);
        assert_eq!(at(2.0), 1.0);
        assert_eq!(at(-3.0), -2.0);
        assert_eq!(t.fix_distance(&Vector::from([-3.0])).unwrap(), Some(3.0));
    }

    #[test]
    fn two_lines_fixture_values() {
        let t = two_lines_fixture(core::f64::consts::FRAC_PI_2).unwrap();
        assert!(t.apply(&Vector::from([3.0, -1.0])).unwrap().norm() < 1e-15);
        for th in [0.1, 0.5, 1.0, 1.5] {
            let t = two_lines_fixture(th).unwrap();
            let x = Vector::from([1.3, -0.4]);
            assert!((t.residual(&x).unwrap() - libm::sin(th) * x.norm()).abs() < 1e-14);
        }
        assert!(two_lines_fixture(0.0).is_err());
        assert!(two_lines_fixture(2.0).is_err());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = SetDescriptor::hyperplane(Vector::from([1.0, 0.0]), 0.0).unwrap();
        let b = SetDescriptor::hyperplane(Vector::from([1.0, 0.0, 0.0]), 0.0).unwrap();
        assert!(dr_operator(&a, &b).is_err());
        let t = dr_operator(&a, &a).unwrap();
        assert!(t.apply(&Vector::zeros(3)).is_err());
        assert!(compose(&[projector(&a).unwrap(), projector(&b).unwrap()]).is_err());
        let _ = vec![0];
    }
}
