mod common;

use std::collections::BTreeMap;

use dslie::contact::{classify, classify_evolutionary, numeric_sensitivity, Sampling, Verdict};
use dslie::continuous::{check_contact_condition, contact_from_characteristic, prolong_continuous, JetVariables};
use dslie::expr::{int, parse, rat, Expr, Var, ZeroTest};
use dslie::prolong::{prolong_discrete, prolong_discrete_unweighted, total_difference, MultiPointVectorField};
use dslie::scheme::{invariance_residual, trajectory, ManifoldResidual, Scheme};
use dslie::stencil::{chart_to_points, symbolic_chart_substitution, x_var, y_var};
use proptest::prelude::*;

fn zt() -> ZeroTest {
    ZeroTest::default()
}

fn free_particle() -> Scheme {
    Scheme::new(
        "free particle",
        parse("y[n+2] - 2*y[n+1] + y[n]").unwrap(),
        parse("x[n+2] - 2*x[n+1] + x[n]").unwrap(),
        None,
    )
    .unwrap()
}

fn vars() -> [Var; 4] {
    [Var::plain("x"), Var::plain("a"), Var::indexed("x", 0), Var::indexed("y", 1)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn render_parse_round_trip(seed in any::<u64>()) {
        let e = common::random_expr(&mut common::rng(seed), 4);
        let text = e.to_string();
        prop_assert_eq!(parse(&text).unwrap(), e, "{}", text);
    }

    #[test]
    fn canonical_form_is_idempotent(seed in any::<u64>()) {
        let e = common::random_expr(&mut common::rng(seed), 4);
        prop_assert_eq!(e.substitute(&BTreeMap::new()), e.clone());
        prop_assert_eq!(e.shift(1).shift(-1), e);
    }

    #[test]
    fn differentiation_is_linear(s1 in any::<u64>(), s2 in any::<u64>(), a in -5i64..5, b in -5i64..5, v in 0usize..4) {
        let f = common::random_expr(&mut common::rng(s1), 3);
        let g = common::random_expr(&mut common::rng(s2), 3);
        let v = &vars()[v];
        let lhs = (Expr::integer(a) * &f + Expr::integer(b) * &g).diff(v);
        let rhs = Expr::integer(a) * f.diff(v) + Expr::integer(b) * g.diff(v);
        prop_assert!(zt().equal(&lhs, &rhs).unwrap());
    }

    #[test]
    fn product_rule(s1 in any::<u64>(), s2 in any::<u64>(), v in 0usize..4) {
        let f = common::random_expr(&mut common::rng(s1), 3);
        let g = common::random_expr(&mut common::rng(s2), 3);
        let v = &vars()[v];
        let lhs = (&f * &g).diff(v);
        let rhs = f.diff(v) * &g + &f * g.diff(v);
        prop_assert!(zt().equal(&lhs, &rhs).unwrap());
    }

    #[test]
    fn shift_commutes_with_diff(seed in any::<u64>(), m in -2i32..3) {
        let e = common::random_expr(&mut common::rng(seed), 3);
        let v = Var::indexed("x", 0);
        prop_assert_eq!(e.diff(&v).shift(m), e.shift(m).diff(&v.shifted(m)));
    }

    #[test]
    fn substitution_commutes_with_evaluation(seed in any::<u64>(), c in -9i64..9) {
        let e = common::random_expr(&mut common::rng(seed), 3);
        let mut m = BTreeMap::new();
        m.insert(Var::plain("a"), Expr::constant(rat(c, 7)));
        let direct = e.substitute(&m);
        let mut back = BTreeMap::new();
        back.insert(Var::plain("a"), Expr::var(Var::plain("a")));
        prop_assert!(zt().equal(&direct, &e.substitute(&back).substitute(&m)).unwrap());
    }

    #[test]
    fn rational_chart_round_trip(seed in any::<u64>(), k in 2usize..=6) {
        let s = common::random_rational_stencil(&mut common::rng(seed), k);
        let c = s.to_chart().unwrap();
        prop_assert_eq!(c.from_chart().unwrap(), s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn point_fields_close(seed in any::<u64>()) {
        let f = common::random_point_field(&mut common::rng(seed));
        prop_assert_eq!(classify(&f, 1).unwrap().verdict, Verdict::Point);
        let s = numeric_sensitivity(&f, 2, &Sampling { samples: 10, ..Sampling::default() }).unwrap();
        prop_assert!(s.max() <= 1e-8);
    }

    #[test]
    fn two_point_fields_do_not_close(seed in any::<u64>()) {
        let f = common::random_two_point_field(&mut common::rng(seed));
        let c = classify(&f, 1).unwrap();
        prop_assert_eq!(c.verdict, Verdict::NonClosing, "{} {}", f.xi, f.phi);
    }

    #[test]
    fn evolutionary_reduction(seed in any::<u64>(), next in any::<bool>()) {
        let mut r = common::rng(seed);
        let vs: Vec<Var> = if next { vec![Var::indexed("y", 0), Var::indexed("y", 1)] } else { vec![Var::indexed("y", 0)] };
        let phi = common::random_poly(&mut r, &vs, 3);
        let f = MultiPointVectorField::new(1, Expr::zero(), phi).unwrap();
        let fixed = classify_evolutionary(&f, 1, int(1)).unwrap().verdict;
        let moving = classify(&f, 1).unwrap().verdict;
        prop_assert_eq!(fixed, moving);
    }

    #[test]
    fn first_level_forms_agree(seed in any::<u64>()) {
        let f = common::random_two_point_field(&mut common::rng(seed));
        let consistent = prolong_discrete(&f, 1).unwrap();
        let unweighted = prolong_discrete_unweighted(&f, 1);
        prop_assert!(zt().equal(&consistent.levels[0].phi, &unweighted[0]).unwrap());
    }

    #[test]
    fn contact_fields_satisfy_contact_condition(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let jet = [JetVariables::x(), JetVariables::y(0), JetVariables::y(1)];
        let w = common::random_poly(&mut r, &jet, 4);
        let f = contact_from_characteristic(&w).unwrap();
        prop_assert!(check_contact_condition(&f).unwrap());
        let phi1 = prolong_continuous(&f, 1).remove(0);
        prop_assert!(zt().is_zero(&phi1.diff(&JetVariables::y(2))).unwrap());
    }

    #[test]
    fn invariance_residual_is_linear(s1 in any::<u64>(), s2 in any::<u64>(), a in -3i64..3, b in -3i64..3) {
        let s = free_particle();
        let f = common::random_point_field(&mut common::rng(s1));
        let g = common::random_point_field(&mut common::rng(s2));
        let combo = MultiPointVectorField::point(
            Expr::integer(a) * &f.xi + Expr::integer(b) * &g.xi,
            Expr::integer(a) * &f.phi + Expr::integer(b) * &g.phi,
        ).unwrap();
        let mut r = common::rng(0);
        let res = |h: &MultiPointVectorField, r: &mut _| match invariance_residual(h, &s, r).unwrap() {
            ManifoldResidual::Symbolic { residuals } => residuals,
            ManifoldResidual::Numeric { .. } => unreachable!("the scheme is affine"),
        };
        let (rf, rg, rc) = (res(&f, &mut r), res(&g, &mut r), res(&combo, &mut r));
        for i in 0..2 {
            let expect = Expr::integer(a) * &rf[i] + Expr::integer(b) * &rg[i];
            prop_assert!(zt().equal(&rc[i], &expect).unwrap());
        }
    }

    #[test]
    fn free_particle_solutions_are_lines(a in -10.0f64..10.0, b in -10.0f64..10.0, h in 0.1f64..2.0) {
        let t = trajectory(&free_particle(), &[(0.0, a), (h, b)], 12).unwrap();
        for (j, (x, y)) in t.points.iter().enumerate() {
            let j = j as f64;
            prop_assert!((x - j * h).abs() <= 1e-10);
            prop_assert!((y - (a + (b - a) * j)).abs() <= 1e-10);
        }
    }
}

#[test]
fn symbolic_chart_inverts_point_map() {
    for k in 2..=5usize {
        let to_points = chart_to_points(k);
        let to_chart = symbolic_chart_substitution(k);
        assert!(to_chart.len() >= 2 * (k - 1));
        for j in 0..k as i32 {
            for v in [x_var(j), y_var(j)] {
                let Some(image) = to_chart.get(&v) else { continue };
                let back = image.substitute(&to_points);
                assert!(zt().equal(&back, &Expr::var(v.clone())).unwrap(), "{} at K = {}", v, k);
            }
        }
    }
}

#[test]
fn total_difference_of_lattice_functions() {
    assert_eq!(total_difference(&parse("x[n]").unwrap()), Expr::one());
    assert_eq!(total_difference(&parse("7").unwrap()), Expr::zero());
    let slope = parse("(y[n+1] - y[n])/(x[n+1] - x[n])").unwrap();
    assert_eq!(total_difference(&parse("y[n]").unwrap()), slope);
}
