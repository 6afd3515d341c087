use std::sync::Arc;

use msgeo::forms::{homotopy_operator, wedge_c, CoordForm, CoordSpace};
use msgeo::symbolic::{Monomial, Poly, VarName};
use msgeo::Scalar;
use proptest::prelude::*;

fn chart(dim: usize) -> Arc<CoordSpace> {
    CoordSpace::new((1..=dim).map(VarName::X).collect()).unwrap()
}

/// Polynomial of degree <= 3 in `x1..x_dim` with small integer coefficients.
fn polynomial(dim: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec((prop::collection::vec(0usize..=dim, 3), -3i64..=3), 0..4).prop_map(move |terms| {
        terms.into_iter().fold(Poly::zero(), |acc, (vars, c)| {
            // index 0 stands for "no variable", so degrees 0..=3 occur
            let m = vars
                .iter()
                .filter(|&&i| i > 0)
                .fold(Poly::one(), |m, &i| m.mul(&Poly::var(VarName::X(i))));
            acc.add(&m.mul(&Poly::term(Scalar::from_int(c), Monomial::one())))
        })
    })
}

fn form(dim: usize, degree: usize) -> impl Strategy<Value = CoordForm> {
    let s = chart(dim);
    prop::collection::vec(
        (
            prop::sample::subsequence((1..=dim).collect::<Vec<_>>(), degree),
            polynomial(dim),
        ),
        0..4,
    )
    .prop_map(move |terms| {
        terms.into_iter().fold(CoordForm::zero(&s, degree), |acc, (idx, c)| {
            let vs: Vec<VarName> = idx.into_iter().map(VarName::X).collect();
            acc.try_add(&CoordForm::monomial(&s, c, &vs).unwrap()).unwrap()
        })
    })
}

fn any_form() -> impl Strategy<Value = CoordForm> {
    (1usize..=4, 0usize..=3).prop_flat_map(|(n, k)| form(n, k.min(n)))
}

fn sign(a: usize, b: usize) -> Poly {
    Poly::int(if a * b % 2 == 0 { 1 } else { -1 })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homotopy_identity(w in any_form()) {
        let mut lhs = homotopy_operator(&w.d()).unwrap();
        if w.degree() > 0 {
            lhs = lhs.try_add(&homotopy_operator(&w).unwrap().d()).unwrap();
        }
        let rhs = w.try_sub(&w.at_origin()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn d_squared_vanishes(w in any_form()) {
        prop_assert!(w.d().d().is_zero());
    }

    #[test]
    fn d_is_antiderivation(
        (a, b) in (1usize..=4, 0usize..=2, 0usize..=2).prop_flat_map(|(n, x, y)| (form(n, x.min(n)), form(n, y.min(n))))
    ) {
        let lhs = wedge_c(&a, &b).unwrap().d();
        let rhs = wedge_c(&a.d(), &b)
            .unwrap()
            .try_add(&wedge_c(&a, &b.d()).unwrap().scale(&sign(a.degree(), 1)))
            .unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn wedge_is_graded_commutative(
        (a, b) in (1usize..=4, 0usize..=3, 0usize..=3).prop_flat_map(|(n, x, y)| (form(n, x.min(n)), form(n, y.min(n))))
    ) {
        let ab = wedge_c(&a, &b).unwrap();
        let ba = wedge_c(&b, &a).unwrap().scale(&sign(a.degree(), b.degree()));
        prop_assert_eq!(ab, ba);
    }
}
