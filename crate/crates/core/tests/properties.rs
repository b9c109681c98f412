use fixfeas_core::control::{validate, Schedule};
use fixfeas_core::diagnostics::{
    combination_inequality_violation, dr_fix_distance, estimate_kappa, sigma_of, DrPair,
};
use fixfeas_core::engine::{run_quasi_cyclic, RunConfig};
use fixfeas_core::geometry::AffineSet;
use fixfeas_core::operators::{
    compose, convex_combination, dr_operator, projector, relaxed_projector, thresholder_fixture, two_lines_fixture,
};
use fixfeas_core::{SetDescriptor, Vector};
use proptest::prelude::*;

const DIM: usize = 4;

fn vec_strategy(dim: usize, scale: f64) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-scale..scale, dim).prop_map(Vector::from)
}

fn normal_strategy(dim: usize) -> impl Strategy<Value = Vector> {
    vec_strategy(dim, 1.0).prop_filter("nonzero normal", |v| v.norm() > 1e-3)
}

fn set_strategy() -> impl Strategy<Value = SetDescriptor> {
    prop_oneof![
        (normal_strategy(DIM), -2.0..2.0).prop_map(|(n, b)| SetDescriptor::hyperplane(n, b).unwrap()),
        (normal_strategy(DIM), -2.0..2.0).prop_map(|(n, b)| SetDescriptor::halfspace(n, b).unwrap()),
        (vec_strategy(DIM, 2.0), vec_strategy(DIM, 2.0)).prop_map(|(a, b)| {
            let lo: Vector = a.iter().zip(b.iter()).map(|(x, y)| x.min(*y)).collect();
            let hi: Vector = a.iter().zip(b.iter()).map(|(x, y)| x.max(*y)).collect();
            SetDescriptor::boxed(lo, hi).unwrap()
        }),
        (vec_strategy(DIM, 2.0), 0.1..3.0).prop_map(|(c, r)| SetDescriptor::ball(c, r).unwrap()),
        (vec_strategy(DIM, 2.0), prop::collection::vec(normal_strategy(DIM), 1..DIM)).prop_map(|(p, span)| {
            AffineSet::from_spanning(p, &span).to_descriptor()
        }),
        (0..=DIM).prop_map(|k| SetDescriptor::orthant_face(DIM, k).unwrap()),
    ]
}

/// Hyperplanes of `R^DIM` through a common point `c`.
fn hyperplanes_through(c: &Vector, normals: &[Vector]) -> Vec<SetDescriptor> {
    normals
        .iter()
        .map(|n| SetDescriptor::hyperplane(n.clone(), n.dot(c)).unwrap())
        .collect()
}

proptest! {
    #[test]
    fn projection_is_idempotent(s in set_strategy(), x in vec_strategy(DIM, 10.0)) {
        let p = s.project(&x).unwrap();
        let pp = s.project(&p).unwrap();
        prop_assert!(p.dist(&pp) <= 1e-9 * (1.0 + p.norm()));
        prop_assert!(s.distance(&p).unwrap() <= 1e-9 * (1.0 + p.norm()));
    }

    #[test]
    fn projection_is_firmly_nonexpansive(s in set_strategy(), x in vec_strategy(DIM, 10.0), y in vec_strategy(DIM, 10.0)) {
        let (px, py) = (s.project(&x).unwrap(), s.project(&y).unwrap());
        let lhs = px.sub(&py).norm_sq() + x.sub(&px).sub(&y.sub(&py)).norm_sq();
        prop_assert!(lhs <= x.sub(&y).norm_sq() + 1e-9);
    }

    #[test]
    fn distance_is_one_lipschitz(s in set_strategy(), x in vec_strategy(DIM, 10.0), y in vec_strategy(DIM, 10.0)) {
        let gap = (s.distance(&x).unwrap() - s.distance(&y).unwrap()).abs();
        prop_assert!(gap <= x.dist(&y) + 1e-9);
    }

    #[test]
    fn reflection_is_an_involution_on_affine_sets(
        p in vec_strategy(DIM, 2.0),
        span in prop::collection::vec(normal_strategy(DIM), 1..DIM),
        x in vec_strategy(DIM, 10.0),
    ) {
        let s = AffineSet::from_spanning(p, &span).to_descriptor();
        let back = s.reflect(&s.reflect(&x).unwrap()).unwrap();
        prop_assert!(back.dist(&x) <= 1e-9 * (1.0 + x.norm()));
    }

    #[test]
    fn reflection_is_nonexpansive(s in set_strategy(), x in vec_strategy(DIM, 10.0), y in vec_strategy(DIM, 10.0)) {
        let (rx, ry) = (s.reflect(&x).unwrap(), s.reflect(&y).unwrap());
        prop_assert!(rx.dist(&ry) <= x.dist(&y) + 1e-9);
    }

    #[test]
    fn sigma_inequality_for_relaxed_projectors(
        s in set_strategy(),
        relax in 0.1..1.9f64,
        x in vec_strategy(DIM, 10.0),
        y in vec_strategy(DIM, 10.0),
    ) {
        let t = relaxed_projector(&s, relax).unwrap();
        let sigma = sigma_of(&t).unwrap();
        prop_assert!((sigma - (2.0 - relax) / relax).abs() < 1e-12);
        let z = s.project(&y).unwrap();
        let tx = t.apply(&x).unwrap();
        let rhs = x.sub(&z).norm_sq() - tx.sub(&z).norm_sq();
        prop_assert!(sigma * x.sub(&tx).norm_sq() <= rhs + 1e-8);
    }

    #[test]
    fn aggregate_inequality_for_combinations(
        c in vec_strategy(DIM, 1.0),
        normals in prop::collection::vec(normal_strategy(DIM), 2..5),
        raw in prop::collection::vec(0.05..1.0f64, 4),
        x in vec_strategy(DIM, 10.0),
    ) {
        let sets = hyperplanes_through(&c, &normals);
        let m = sets.len();
        let maps: Vec<_> = sets.iter().enumerate()
            .map(|(i, s)| relaxed_projector(s, 0.5 + 0.3 * i as f64).unwrap())
            .collect();
        let total: f64 = raw[..m].iter().sum();
        let w: Vec<f64> = raw[..m].iter().map(|r| r / total).collect();
        let (v1, v2) = combination_inequality_violation(&maps, &w, &x, &c).unwrap();
        prop_assert!(v1 <= 1e-8 && v2 <= 1e-8, "{} {}", v1, v2);
    }

    #[test]
    fn composition_and_combination_fix_common_points(
        c in vec_strategy(DIM, 1.0),
        normals in prop::collection::vec(normal_strategy(DIM), 2..4),
    ) {
        let maps: Vec<_> = hyperplanes_through(&c, &normals).iter().map(|s| projector(s).unwrap()).collect();
        let w = vec![1.0 / maps.len() as f64; maps.len()];
        for t in [compose(&maps).unwrap(), convex_combination(&maps, &w).unwrap()] {
            prop_assert!(t.residual(&c).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn dr_oracle_zeros_match_residual_zeros(
        na in normal_strategy(DIM),
        nb in normal_strategy(DIM),
        c in vec_strategy(DIM, 1.0),
        x in vec_strategy(DIM, 5.0),
        on_fix in any::<bool>(),
    ) {
        let a = SetDescriptor::hyperplane(na.clone(), na.dot(&c)).unwrap();
        let b = SetDescriptor::hyperplane(nb.clone(), nb.dot(&c)).unwrap();
        let pair = DrPair::new(a, b).unwrap();
        let oracle = dr_fix_distance(&pair).unwrap();
        let t = pair.operator().unwrap();
        let x = if on_fix { oracle.project(&x) } else { x };
        let d = oracle.distance(&x);
        let r = t.residual(&x).unwrap();
        prop_assert_eq!(d <= 1e-9, r <= 1e-9, "d {} r {}", d, r);
    }

    #[test]
    fn dr_identity_through_the_hull(
        p in vec_strategy(DIM, 1.0),
        sa in prop::collection::vec(normal_strategy(DIM), 1..2),
        sb in prop::collection::vec(normal_strategy(DIM), 1..2),
        x in vec_strategy(DIM, 5.0),
    ) {
        // Tx = x - P_L x + T P_L x for affine A, B with L = aff(A u B)
        let a = AffineSet::from_spanning(p.clone(), &sa).to_descriptor();
        let b = AffineSet::from_spanning(p, &sb).to_descriptor();
        let pair = DrPair::new(a, b).unwrap();
        let l = pair.affine_hull().unwrap();
        let t = pair.operator().unwrap();
        let pl = l.project(&x);
        let rhs = x.sub(&pl).add(&t.apply(&pl).unwrap());
        prop_assert!(t.apply(&x).unwrap().dist(&rhs) <= 1e-9);
    }

    #[test]
    fn fejer_and_bounded_iterates(
        c in vec_strategy(DIM, 1.0),
        normals in prop::collection::vec(normal_strategy(DIM), 2..4),
        x0 in vec_strategy(DIM, 20.0),
    ) {
        let sets = hyperplanes_through(&c, &normals);
        let maps: Vec<_> = sets.windows(2).map(|w| dr_operator(&w[0], &w[1]).unwrap()).collect();
        let m = maps.len();
        let cfg = RunConfig::new(maps, Schedule::parallel(m), x0.clone()).max_iter(200).anchor(c.clone());
        let tr = run_quasi_cyclic(&cfg).unwrap();
        prop_assert!(tr.max_fejer_violation() <= 1e-9);
        let r0 = x0.dist(&c);
        prop_assert!(tr.iterates.iter().all(|(_, x)| x.dist(&c) <= r0 + 1e-9));
    }

    #[test]
    fn cyclic_schedules_always_validate(m in 1usize..8, horizon in 0usize..200) {
        prop_assert!(validate(&Schedule::cyclic(m), horizon).passed());
        prop_assert!(validate(&Schedule::cyclic_point_masses(m), horizon).passed());
        prop_assert!(validate(&Schedule::parallel(m), horizon).passed());
    }
}

#[test]
fn thresholder_modulus_grows_with_the_radius() {
    let t = thresholder_fixture();
    let mut prev = 0.0;
    for rho in [1.0, 1.5, 3.0, 6.0, 12.0] {
        let k = estimate_kappa(&t, rho, 2000, 5).unwrap().kappa_hat;
        assert!(k >= prev - 1e-9, "rho {rho}: {k} < {prev}");
        prev = k;
    }
}

#[test]
fn rotation_fixture_residual_and_fix_distance() {
    for theta in [0.3, 1.0, 1.4] {
        let t = two_lines_fixture(theta).unwrap();
        let x = Vector::from([0.6, -0.8]);
        // ||x - Tx|| = sin(theta) ||x|| for T = cos(theta) rot(theta)
        assert!((t.residual(&x).unwrap() - theta.sin()).abs() < 1e-12);
        assert_eq!(t.fix_distance(&x).unwrap(), Some(1.0));
    }
}
