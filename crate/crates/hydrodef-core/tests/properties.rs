//! Randomised cross-checks between independent computations.

mod common;

use std::sync::Arc;

use common::*;
use hydrodef_core::bivectors::HydroOp;
use hydrodef_core::catalog;
use hydrodef_core::deltadist::BiDist;
use hydrodef_core::grinberg::grinberg_equiv_jacobi;
use hydrodef_core::schouten::{jacobi_residual, lie, schouten, VectorField};
use hydrodef_core::transforms::CoordChange;
use hydrodef_core::{Caps, Expr, FuncSym, Scalar};
use proptest::prelude::*;

/// Expression source over `u1`, `u2`, their jets and `p(u2)`, `q(u1,u2)`.
fn expr_src() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (-4i64..5).prop_map(|k| format!("({})", k)),
        (1i64..4, 2i64..5).prop_map(|(a, b)| format!("{}/{}", a, b)),
        Just("u1".to_string()),
        Just("u2".to_string()),
        Just("u1_x".to_string()),
        Just("u2_xx".to_string()),
        Just("p".to_string()),
        Just("p'".to_string()),
        Just("q".to_string()),
        Just("D(q,u1,u2)".to_string()),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({} + {})", a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({} - {})", a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({})*({})", a, b)),
            (inner.clone(), 1u32..4).prop_map(|(a, k)| format!("({} + u{})", a, k % 2 + 1)),
            (inner.clone(), 0usize..3).prop_map(|(a, d)| format!("({})/({})", a, ["u1", "u2 + 1", "p"][d])),
            (inner, 1u32..3).prop_map(|(a, k)| format!("({})^{}", a, k)),
        ]
    })
}

fn sparse_picks(len: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..30, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn print_parse_round_trip(src in expr_src()) {
        let c = ctx(2);
        let Ok(x) = c.parse(&src) else { return Ok(()); };
        let back = c.parse(&x.to_string()).unwrap();
        prop_assert_eq!(&back, &x);
    }

    #[test]
    fn zero_test_agrees_with_oracle(a in expr_src(), b in expr_src()) {
        let c = ctx(2);
        let (Ok(a), Ok(b)) = (c.parse(&a), c.parse(&b)) else { return Ok(()); };
        let id = &(&(&a + &b) * &(&a - &b)) - &(&(&a * &a) - &(&b * &b));
        prop_assert!(id.is_zero());
        prop_assert!(id.vanishes_at(0..50).unwrap());
        let d = &a - &b;
        prop_assert_eq!(d.is_zero(), d.vanishes_at(0..50).unwrap());
    }

    #[test]
    fn evaluation_is_a_ring_map(a in expr_src(), b in expr_src(), seed in 0u64..1000) {
        let c = ctx(2);
        let (Ok(a), Ok(b)) = (c.parse(&a), c.parse(&b)) else { return Ok(()); };
        let (Ok(va), Ok(vb)) = (a.eval_random(seed), b.eval_random(seed)) else { return Ok(()); };
        if let Ok(s) = (&a + &b).eval_random(seed) {
            prop_assert_eq!(s, &va + &vb);
        }
        if let Ok(m) = (&a * &b).eval_random(seed) {
            prop_assert_eq!(m, &va * &vb);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn closed_form_skew_matches_flip_n2_degree1(picks in sparse_picks(64)) {
        prop_assert!(lemma_case(2, 1, &picks));
    }

    #[test]
    fn closed_form_skew_matches_flip_n3_degree1(picks in sparse_picks(64)) {
        prop_assert!(lemma_case(3, 1, &picks));
    }

    #[test]
    fn closed_form_skew_matches_flip_n2_degree2(picks in sparse_picks(64)) {
        prop_assert!(lemma_case(2, 2, &picks));
    }

    #[test]
    fn closed_form_skew_matches_flip_n3_degree2(picks in prop::collection::vec(0usize..60, 64)) {
        prop_assert!(lemma_case(3, 2, &picks));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn schouten_is_symmetric_and_bilinear(pp in sparse_picks(24), qp in sparse_picks(24), rp in sparse_picks(24), c in -3i64..4) {
        let caps = Caps::default();
        let p = random_hydro(2, &pp).to_bivector();
        let q = random_hydro(2, &qp).to_bivector();
        let r = random_hydro(2, &rp).to_bivector();
        let pq = schouten(&p, &q, &caps).unwrap();
        prop_assert!(tri_diff(&pq, &schouten(&q, &p, &caps).unwrap()).is_zero());
        let lhs = schouten(&p.add(&q).unwrap(), &r, &caps).unwrap();
        let rhs = schouten(&p, &r, &caps).unwrap().add(&schouten(&q, &r, &caps).unwrap()).unwrap();
        prop_assert!(tri_diff(&lhs, &rhs).is_zero());
        let scaled = schouten(&p.scale_scalar(&Scalar::int(c)), &r, &caps).unwrap();
        prop_assert!(tri_diff(&scaled, &schouten(&p, &r, &caps).unwrap().scale_scalar(&Scalar::int(c))).is_zero());
    }

    #[test]
    fn lie_derivative_preserves_skew(picks in sparse_picks(64), xs in prop::collection::vec(0usize..14, 4)) {
        let caps = Caps::default();
        let s = skew_part(&random_deformation(2, 1, &picks).to_bivector(), &caps);
        let comp = |k: usize, j: usize| coeff(2, k).map_or_else(Expr::zero, |c| &c * &Expr::jet(j as u8, 1));
        let x = VectorField::new(vec![&comp(xs[0], 1) + &comp(xs[1], 2), &comp(xs[2], 1) + &comp(xs[3], 2)]);
        prop_assert!(lie(&x, &s, &caps).unwrap().is_skew(&caps).unwrap());
    }

    #[test]
    fn point_changes_preserve_poisson(form in 0usize..4, a in 1i64..4, k in -2i64..3, w in 0usize..3) {
        let caps = Caps::default();
        let (name, n) = [("P1_0", 2u8), ("P2_0", 2), ("RANK2_2", 3), ("GAS_DYNAMICS", 3)][form];
        let p = catalog::operator(name).unwrap().to_bivector();
        let shift = ["u2^2", "p", "u2"][w];
        let mut fwd = vec![e(n, &format!("{}*u1 + {}*{}", a, k, shift)), e(n, &format!("u2 + {}", k))];
        if n == 3 {
            fwd.push(e(n, &format!("u3 + {}*u2", k)));
        }
        let ch = CoordChange::new(fwd, None).unwrap();
        let pushed = ch.push_bivector(&p, &caps).unwrap();
        prop_assert!(pushed.is_skew(&caps).unwrap());
        prop_assert!(jacobi_residual(&pushed, &caps).unwrap().is_zero());
        let h = HydroOp::from_bivector(&pushed).unwrap();
        prop_assert!(grinberg_equiv_jacobi(&h, &caps).unwrap());
    }

    #[test]
    fn tensor_and_bracket_engines_agree(picks in prop::collection::vec(0usize..16, 24), n in 2usize..4) {
        let op = random_hydro(n, &picks);
        prop_assert!(grinberg_equiv_jacobi(&op, &Caps::default()).is_ok());
    }
}

#[test]
fn flip_is_an_involution() {
    let caps = Caps::default();
    let d = BiDist::from_terms([(0, e(2, "u1*u2_x")), (1, e(2, "p")), (2, e(2, "q*u1_x"))]);
    assert_eq!(d.flip(&caps).unwrap().flip(&caps).unwrap(), d);
}

#[test]
fn constants_have_no_atoms() {
    let f: Arc<FuncSym> = FuncSym::new("p", &[2]);
    assert!(Expr::int(3).atoms().is_empty());
    assert_eq!(Expr::func(&f).atoms().len(), 1);
}
