use std::collections::BTreeMap;

use msgeo::symbolic::{differentiate, parse, simplify, Expr, Func, ParseContext, VarName};
use msgeo::Scalar;
use proptest::prelude::*;

fn vars() -> Vec<VarName> {
    vec![
        VarName::X(1),
        VarName::X(2),
        VarName::Y(1),
        VarName::Z(1, 1),
        VarName::Z(1, 2),
        VarName::param("k"),
    ]
}

fn ctx() -> ParseContext {
    ParseContext::new(2, 1).with_param("k").unwrap()
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        prop::sample::select(vars()).prop_map(Expr::Var),
        (-3i64..=3).prop_map(Expr::int),
        (-3i64..=3, 1i64..=4).prop_map(|(a, b)| Expr::rational(a, b)),
    ]
}

/// Trees that are defined everywhere: divisions and logarithms only see
/// arguments of the form `1 + e^2`.
fn tree(transcendental: bool) -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 3, move |inner| {
        let safe = inner.clone().prop_map(|e| Expr::Add(vec![Expr::int(1), e.pow(2)]));
        let mut options = vec![
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Expr::Add).boxed(),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Expr::Mul).boxed(),
            (inner.clone(), 0i32..=3).prop_map(|(e, k)| e.pow(k)).boxed(),
            inner.clone().prop_map(|e| -e).boxed(),
            (inner.clone(), safe.clone())
                .prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b)))
                .boxed(),
        ];
        if transcendental {
            options.push(
                (
                    prop::sample::select(vec![Func::Sin, Func::Cos, Func::Exp]),
                    inner.clone(),
                )
                    .prop_map(|(f, e)| Expr::apply(f, e))
                    .boxed(),
            );
            options.push(safe.prop_map(|e| Expr::apply(Func::Log, e)).boxed());
        }
        prop::strategy::Union::new(options)
    })
}

fn point() -> impl Strategy<Value = BTreeMap<VarName, f64>> {
    prop::collection::vec(-1.0f64..=1.0, vars().len()).prop_map(|xs| vars().into_iter().zip(xs).collect())
}

fn central_difference(e: &Expr, v: &VarName, pt: &BTreeMap<VarName, f64>, h: f64) -> f64 {
    let shifted = |dx: f64| {
        let mut q = pt.clone();
        *q.get_mut(v).unwrap() += dx;
        e.evaluate_at(&q).unwrap()
    };
    (shifted(h) - shifted(-h)) / (2.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn simplify_is_idempotent(e in tree(true)) {
        let s = simplify(&e);
        prop_assert_eq!(simplify(&s), s);
    }

    #[test]
    fn print_then_parse_is_identity_on_canonical_forms(e in tree(true)) {
        let s = simplify(&e);
        let back = parse(&s.to_string(), &ctx()).unwrap();
        prop_assert_eq!(simplify(&back), s);
    }

    #[test]
    fn mixed_partials_commute(e in tree(true), a in prop::sample::select(vars()), b in prop::sample::select(vars())) {
        let ab = differentiate(&differentiate(&e, &a), &b);
        let ba = differentiate(&differentiate(&e, &b), &a);
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn simplify_preserves_value(e in tree(true), pt in point()) {
        let x = e.evaluate_at(&pt).unwrap();
        let y = simplify(&e).evaluate_at(&pt).unwrap();
        prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0), "{} vs {}", x, y);
    }

    #[test]
    fn derivative_matches_finite_differences(
        e in tree(true),
        v in prop::sample::select(vars()),
        pts in prop::collection::vec(point(), 5),
    ) {
        let d = differentiate(&e, &v);
        for pt in &pts {
            let exact = d.evaluate_at(pt).unwrap();
            let fd = central_difference(&e, &v, pt, 1e-5);
            prop_assert!(
                (exact - fd).abs() <= 1e-6 * exact.abs().max(1.0),
                "d/d{} of {}: {} vs {}", v, e, exact, fd
            );
        }
    }

    #[test]
    fn float_evaluation_matches_exact(e in tree(false), xs in prop::collection::vec((-8i64..=8, 1i64..=5), 6)) {
        let exact: BTreeMap<VarName, Scalar> =
            vars().into_iter().zip(xs.iter().map(|&(a, b)| Scalar::new(a, b))).collect();
        let float: BTreeMap<VarName, f64> = exact.iter().map(|(k, v)| (k.clone(), v.to_f64())).collect();
        let q = e.evaluate_exact(&|v| exact.get(v).cloned()).unwrap().to_f64();
        let x = e.evaluate_at(&float).unwrap();
        prop_assert!((x - q).abs() <= 1e-12 * q.abs().max(1.0), "{} vs {}", x, q);
    }
}

#[test]
fn chain_rule_example_against_finite_differences() {
    let e = parse("exp(y1*x1)", &ctx()).unwrap();
    let d = differentiate(&e, &VarName::Y(1));
    assert_eq!(d.to_string(), "x1*exp(x1*y1)");
    for (x, y) in [(0.3, -0.7), (-0.9, 0.2), (0.5, 0.5), (1.0, -1.0), (-0.1, 0.8)] {
        let pt: BTreeMap<VarName, f64> = [(VarName::X(1), x), (VarName::Y(1), y)].into_iter().collect();
        let exact = d.evaluate_at(&pt).unwrap();
        let fd = central_difference(&e, &VarName::Y(1), &pt, 1e-5);
        assert!((exact - fd).abs() <= 1e-7 * exact.abs());
    }
}
