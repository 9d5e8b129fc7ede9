use num_traits::Zero;
use proptest::prelude::*;

use upperset::conjugate::{conjugate_function, scalar_conjugate};
use upperset::corpus::{fixture_from_json, fixture_to_json, random_convex_affine, random_pl_convex, Fixture, FixtureMap};
use upperset::rational::{dot, fmt_q, parse_q, q, qr, ExtQ, Q};
use upperset::scalarize::scalarize_eval;
use upperset::upperset::{lattice_inf, lattice_sup, minkowski_sum, scale, set_order_leq, UpperSet};
use upperset::{Cone, Halfspace, Polyhedron};

fn small() -> impl Strategy<Value = i64> {
    -4i64..=4
}

fn vec2() -> impl Strategy<Value = Vec<Q>> {
    (small(), small()).prop_map(|(a, b)| vec![q(a), q(b)])
}

/// A pointed cone in the plane spanned by two generators in the upper half plane.
fn cone2() -> impl Strategy<Value = Cone> {
    (-3i64..=3, -3i64..=3).prop_filter_map("degenerate", |(a, b)| {
        if a >= b {
            return None;
        }
        Cone::from_generators(2, vec![vec![q(a), q(1)], vec![q(b), q(1)]]).ok()
    })
}

/// An upper set `{z : n_i·z ≥ b_i} + C` from normals in the negative of the dual of C.
fn upper(c: &Cone, offsets: &[i64], weights: &[(i64, i64)]) -> UpperSet {
    let gens = c.dual_generators();
    let rows = offsets
        .iter()
        .zip(weights)
        .map(|(b, (u, v))| {
            let n: Vec<Q> = (0..2).map(|i| -(q(*u) * &gens[0][i] + q(*v) * &gens[1 % gens.len()][i])).collect();
            Halfspace::new(n, q(*b))
        })
        .filter(|h| !h.normal.iter().all(|x| x.is_zero()))
        .collect();
    UpperSet::from_halfspaces(c, rows).expect("rows over the cone")
}

fn upper_strategy() -> impl Strategy<Value = (Cone, UpperSet, UpperSet)> {
    cone2().prop_flat_map(|c| {
        let rows = || prop::collection::vec((small(), (0i64..=3, 0i64..=3)), 1..4);
        (Just(c), rows(), rows()).prop_map(|(c, ra, rb)| {
            let (oa, wa): (Vec<_>, Vec<_>) = ra.into_iter().unzip();
            let (ob, wb): (Vec<_>, Vec<_>) = rb.into_iter().unzip();
            let a = upper(&c, &oa, &wa);
            let b = upper(&c, &ob, &wb);
            (c, a, b)
        })
    })
}

fn ext_max(a: ExtQ, b: ExtQ) -> ExtQ {
    if a >= b {
        a
    } else {
        b
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rationals_print_and_parse_back(n in -1000i64..1000, d in 1i64..1000) {
        let x = qr(n, d);
        prop_assert_eq!(parse_q(&fmt_q(&x)).unwrap(), x);
    }

    #[test]
    fn dual_membership_matches_generators(c in cone2(), y in vec2()) {
        let by_generators = c.generators().iter().all(|g| dot(&y, g) <= Q::zero());
        prop_assert_eq!(c.dual_contains(&y), by_generators);
    }

    #[test]
    fn vertex_and_simplex_supports_agree(
        rows in prop::collection::vec((small(), small(), small()), 1..5),
        y in vec2(),
    ) {
        let rows: Vec<Halfspace> = rows.into_iter().map(|(a, b, o)| Halfspace::new(vec![q(a), q(b)], q(o))).collect();
        let p = Polyhedron::new(2, rows).unwrap();
        prop_assert_eq!(p.support(&y), p.support_lp(&y));
    }

    #[test]
    fn upper_sets_absorb_the_cone((c, a, _) in upper_strategy(), z in vec2(), s in 0i64..4, t in 0i64..4) {
        if a.contains_exact(&z) == Some(true) {
            let g = c.generators();
            let moved: Vec<Q> = (0..2).map(|i| &z[i] + q(s) * &g[0][i] + q(t) * &g[1][i]).collect();
            prop_assert_eq!(a.contains_exact(&moved), Some(true));
        }
    }

    #[test]
    fn supports_of_sums_add((c, a, b) in upper_strategy(), y in vec2()) {
        prop_assume!(c.dual_contains(&y));
        let sum = minkowski_sum(&a, &b).unwrap();
        let expected = if a.is_empty() || b.is_empty() { ExtQ::NegInf } else { a.support(&y) + b.support(&y) };
        prop_assert_eq!(sum.support(&y), expected);
    }

    #[test]
    fn support_of_infimum_is_the_max((_c, a, b) in upper_strategy(), y in vec2()) {
        let inf = lattice_inf(&[a.clone(), b.clone()]).unwrap();
        prop_assert_eq!(inf.support(&y), ext_max(a.support(&y), b.support(&y)));
    }

    #[test]
    fn infimum_and_supremum_bracket_the_operands((_c, a, b) in upper_strategy()) {
        let inf = lattice_inf(&[a.clone(), b.clone()]).unwrap();
        let sup = lattice_sup(&[a.clone(), b.clone()]).unwrap();
        for x in [&a, &b] {
            let lo = set_order_leq(&inf, x).unwrap();
            let hi = set_order_leq(x, &sup).unwrap();
            prop_assert!(lo.leq && hi.leq);
        }
    }

    #[test]
    fn scaling_scales_the_support((c, a, _) in upper_strategy(), t in 1i64..5, y in vec2()) {
        prop_assume!(c.dual_contains(&y));
        let s = scale(&a, &q(t)).unwrap();
        prop_assert_eq!(s.support(&y), a.support(&y).scale_pos(&q(t)));
    }

    #[test]
    fn scalarization_is_the_negative_support(seed in 0u64..500, k in 0usize..5) {
        let (f, points) = random_convex_affine(seed);
        let x = &points[k % points.len()];
        let value = f.evaluate(x).unwrap();
        for zstar in f.cone().dual_fan(8) {
            prop_assert_eq!(scalarize_eval(&f, &zstar, x).unwrap(), -value.support(&zstar));
        }
    }

    #[test]
    fn fenchel_young_on_random_functions(seed in 0u64..2000, xs in prop::collection::vec((small(), small()), 4)) {
        let phi = random_pl_convex(seed);
        let star = conjugate_function(&phi).unwrap();
        let d = phi.dim;
        for (a, b) in &xs {
            let x: Vec<Q> = [q(*a), q(*b)].into_iter().take(d).collect();
            for (c, e) in &xs {
                let xstar: Vec<Q> = [qr(*c, 2), qr(*e, 2)].into_iter().take(d).collect();
                let lhs = phi.eval(&x) + star.eval(&xstar);
                if let ExtQ::Fin(v) = &lhs {
                    prop_assert!(*v >= dot(&x, &xstar));
                }
                prop_assert_eq!(star.eval(&xstar), scalar_conjugate(&phi, &xstar).unwrap());
            }
        }
    }

    #[test]
    fn fixtures_survive_json(seed in 0u64..300) {
        let (f, points) = random_convex_affine(seed);
        let fx = Fixture { id: format!("random-{seed}"), map: FixtureMap::Single(f.clone()), points: vec![], notes: String::new() };
        let back = fixture_from_json(&fixture_to_json(&fx).unwrap()).unwrap();
        prop_assert_eq!(&back.id, &fx.id);
        for x in &points {
            let (u, v) = (f.evaluate(x).unwrap(), back.map.map().evaluate(x).unwrap());
            for zstar in f.cone().dual_fan(8) {
                prop_assert_eq!(u.support(&zstar), v.support(&zstar));
            }
        }
    }
}
