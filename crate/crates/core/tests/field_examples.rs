use std::collections::BTreeMap;

use msgeo::field::*;
use msgeo::forms::{wedge_c, CoordForm};
use msgeo::symbolic::{parse, ParseContext, Poly, VarName};
use msgeo::Scalar;

fn lag(n: usize, m: usize, text: &str) -> FieldTheoryProblem {
    FieldTheoryProblem::parse(n, m, text, BTreeMap::new()).unwrap()
}

fn ham(n: usize, m: usize, text: &str) -> HamiltonianProblem {
    HamiltonianProblem::parse(n, m, text, BTreeMap::new()).unwrap()
}

fn polys(n: usize, m: usize, texts: &[&str]) -> Vec<Poly> {
    let ctx = ParseContext::new(n, m);
    texts.iter().map(|t| parse(t, &ctx).unwrap().to_poly()).collect()
}

const FREE2: &str = "1/2*(z1_1^2 + z1_2^2)";
const KG2: &str = "1/2*(z1_1^2 + z1_2^2) - 1/2*y1^2";

#[test]
fn cartan_form_of_free_field() {
    let p = lag(2, 1, FREE2);
    let s = p.chart();
    let theta = poincare_cartan(&p).unwrap();
    let [e, z1, z2] = <[Poly; 3]>::try_from(polys(2, 1, &["-1/2*(z1_1^2 + z1_2^2)", "z1_1", "z1_2"])).unwrap();
    let dy = CoordForm::dvar(&s, &VarName::Y(1)).unwrap();
    let expect = volume(&s, 2)
        .unwrap()
        .scale(&e)
        .try_add(&wedge_c(&dy, &volume_minus(&s, 2, 1).unwrap()).unwrap().scale(&z1))
        .unwrap()
        .try_add(&wedge_c(&dy, &volume_minus(&s, 2, 2).unwrap()).unwrap().scale(&z2))
        .unwrap();
    assert_eq!(theta, expect);
}

#[test]
fn cartan_form_without_velocities_is_l_volume() {
    let p = lag(2, 1, "x1*y1^2 + x2");
    let s = p.chart();
    assert_eq!(
        poincare_cartan(&p).unwrap(),
        volume(&s, 2).unwrap().scale(p.lagrangian_poly())
    );
}

#[test]
fn mechanics_cartan_form() {
    // (L - q' p) dt + p dq with p = dL/dq'
    let p = lag(1, 1, "1/2*z1_1^2 - y1^2");
    let theta = poincare_cartan(&p).unwrap();
    let [e, mom] = <[Poly; 2]>::try_from(polys(1, 1, &["-1/2*z1_1^2 - y1^2", "z1_1"])).unwrap();
    assert_eq!(theta.coefficient(&[VarName::X(1)]).unwrap(), e);
    assert_eq!(theta.coefficient(&[VarName::Y(1)]).unwrap(), mom);
    assert_eq!(theta.terms().count(), 2);
    assert_eq!(omega_l(&p).unwrap(), theta.d().neg());
}

#[test]
fn hessian_examples() {
    let p = lag(2, 1, "z1_1*z1_2");
    let h = hessian(&p);
    assert_eq!(
        h,
        vec![vec![Poly::zero(), Poly::one()], vec![Poly::one(), Poly::zero()]]
    );
    let m = hessian_at(&p, &JetPoint::new()).unwrap();
    assert_eq!(m, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    assert!(is_regular_at(&p, &JetPoint::new()).unwrap());
    let lin = lag(2, 1, "x1*z1_1 + y1*z1_2");
    assert!(hessian(&lin).iter().flatten().all(Poly::is_zero));
    assert!(!is_regular_at(&lin, &JetPoint::new()).unwrap());
}

#[test]
fn euler_lagrange_examples() {
    assert_eq!(
        euler_lagrange(&lag(2, 1, FREE2)).polys(),
        polys(2, 1, &["-z1_11 - z1_22"])
    );
    assert_eq!(
        euler_lagrange(&lag(1, 1, "1/2*z1_1^2 - 1/2*y1^2")).to_string(),
        "-y1 - z1_11 = 0\n"
    );
    assert!(euler_lagrange(&lag(2, 2, "x1^2*x2")).is_trivial());
}

#[test]
fn de_donder_examples() {
    let p = lag(2, 1, "x1 - x2");
    let conn = Connection::generic_on_z(2, 1);
    assert!(de_donder_residuals(&p, &conn).unwrap().all().is_trivial());
    let zero = lag(2, 1, "0");
    assert!(de_donder_residuals(&zero, &conn).unwrap().all().is_trivial());

    let free = lag(2, 1, FREE2);
    let off = Connection::OnZ {
        y: vec![vec![Poly::zero(), Poly::zero()]],
        z: vec![vec![vec![Poly::zero(); 2]; 2]],
    };
    let r = de_donder_residuals(&free, &off).unwrap();
    assert_eq!(r.first.polys(), polys(2, 1, &["-z1_1", "-z1_2"]));
}

#[test]
fn legendre_examples() {
    let leg = legendre(&lag(2, 1, FREE2));
    assert_eq!(leg.momenta, polys(2, 1, &["z1_1", "z1_2"]));
    assert_eq!(leg.energy, polys(2, 1, &["-1/2*z1_1^2 - 1/2*z1_2^2"])[0]);
    // mechanics: Leg_L(q, q') = (q, dL/dq')
    let mech = legendre(&lag(1, 1, "1/2*z1_1^2 + y1*z1_1"));
    assert_eq!(mech.big_leg_map()[&VarName::P(1, 1)], polys(1, 1, &["z1_1 + y1"])[0]);
    // linear in z: Leg_L does not depend on z
    let lin = legendre(&lag(1, 1, "x1*z1_1"));
    assert!(!lin.momenta[0].contains(&VarName::Z(1, 1)));
}

#[test]
fn legendre_jacobian_is_the_hessian() {
    let p = lag(2, 1, "z1_1^4/4 + z1_1*z1_2 + y1*z1_2^2");
    let leg = legendre(&p);
    let pt: JetPoint = [(VarName::Y(1), 0.4), (VarName::Z(1, 1), -0.7), (VarName::Z(1, 2), 1.3)].into();
    let hess = hessian_at(&p, &pt).unwrap();
    let zs = z_vars(2, 1);
    let eps = 1e-6;
    for (r, mom) in leg.momenta.iter().enumerate() {
        for (c, z) in zs.iter().enumerate() {
            let at = |d: f64| {
                let mut q = pt.clone();
                *q.get_mut(z).unwrap() += d;
                mom.eval_f64(&|v| q.get(v).copied()).unwrap()
            };
            let fd = (at(eps) - at(-eps)) / (2.0 * eps);
            assert!((fd - hess[r][c]).abs() < 1e-6, "{fd} vs {}", hess[r][c]);
        }
    }
}

#[test]
fn hamiltonian_examples() {
    let h = |n, text| {
        hamiltonian_from_lagrangian(&lag(n, 1, text))
            .unwrap()
            .hamiltonian_poly()
            .clone()
    };
    let ctx = ParseContext::new(2, 1);
    let e = |t: &str| parse(t, &ctx).unwrap().to_poly();
    assert_eq!(h(2, FREE2), e("1/2*(p1^1^2 + p1^2^2)"));
    assert_eq!(h(2, KG2), e("1/2*(p1^1^2 + p1^2^2) + 1/2*y1^2"));
    assert_eq!(h(1, "1/2*z1_1^2"), e("1/2*p1^1^2"));
    let params = BTreeMap::from([("c".to_string(), Scalar::from_int(4))]);
    let scaled = FieldTheoryProblem::parse(1, 1, "c/2*z1_1^2", params).unwrap();
    assert_eq!(
        hamiltonian_from_lagrangian(&scaled).unwrap().hamiltonian_poly(),
        &e("1/8*p1^1^2")
    );
}

#[test]
fn omega_h_examples() {
    let hp = ham(2, 1, "1/2*(p1^1^2 + p1^2^2)");
    let s = hp.chart();
    let mut expect = CoordForm::zero(&s, 3);
    let vol = volume(&s, 2).unwrap();
    for mu in 1..=2 {
        let pv = VarName::P(1, mu);
        let dp = CoordForm::dvar(&s, &pv).unwrap();
        expect = expect
            .try_add(&wedge_c(&dp, &vol).unwrap().scale(&Poly::var(pv.clone())))
            .unwrap();
        let dy = CoordForm::dvar(&s, &VarName::Y(1)).unwrap();
        let contact = wedge_c(&wedge_c(&dp, &dy).unwrap(), &volume_minus(&s, 2, mu).unwrap()).unwrap();
        expect = expect.try_sub(&contact).unwrap();
    }
    let om = omega_h(&hp).unwrap();
    assert_eq!(om, expect);
    assert!(om.d().is_zero());
    assert_eq!(om, theta_h(&hp).unwrap().d().neg());
}

#[test]
fn hamilton_equation_examples() {
    let jets = |texts: &[&str]| {
        texts
            .iter()
            .map(|t| {
                let ctx = ParseContext::new(2, 1);
                parse(t, &ctx).unwrap().to_poly()
            })
            .collect::<Vec<_>>()
    };
    let free = hamilton_equations(&ham(2, 1, "1/2*(p1^1^2 + p1^2^2)"));
    assert_eq!(free.polys(), jets(&["y1_1 - p1^1", "y1_2 - p1^2", "p1^1_1 + p1^2_2"]));
    let kg = hamilton_equations(&ham(2, 1, "1/2*(p1^1^2 + p1^2^2) + 1/2*y1^2"));
    assert_eq!(kg.polys()[2], jets(&["p1^1_1 + p1^2_2 + y1"])[0]);
    let constant = hamilton_equations(&ham(2, 1, "7"));
    assert_eq!(constant.polys(), jets(&["y1_1", "y1_2", "p1^1_1 + p1^2_2"]));
    assert!(n_h_equations(&ham(2, 1, "0")).same_up_to_sign(&constant));
}

#[test]
fn alpha_and_beta_examples() {
    // n = m = 1: alpha(q, p, q', p') = (q, q', p', p)
    let pt = ZStarJet {
        x: vec![0.0],
        y: vec![2.0],
        p: vec![vec![3.0]],
        y_jet: vec![vec![5.0]],
        p_jet: vec![vec![vec![7.0]]],
    };
    let a = alpha_map(&pt).unwrap();
    assert_eq!((a.y[0], a.z[0][0], a.a[0], a.b[0][0]), (2.0, 5.0, 7.0, 3.0));

    let hp = ham(2, 1, "1/2*(p1^1^2 + p1^2^2)");
    let q = ZStarJet {
        x: vec![0.1, 0.2],
        y: vec![0.3],
        p: vec![vec![1.5, -0.5]],
        y_jet: vec![vec![0.25, 2.0]],
        p_jet: vec![vec![vec![1.0, 4.0], vec![-3.0, 0.5]]],
    };
    let b = beta_map(&hp, &q).unwrap();
    assert_eq!(b.a, vec![1.5]);
    assert_eq!(b.b, vec![vec![1.25, -2.5]]);
    let on_shell = point_on_n_h(&hp, &q.x, &q.y, &q.p, &q.p_jet).unwrap();
    let z = beta_map(&hp, &on_shell).unwrap();
    assert!(z.a.iter().chain(z.b.iter().flatten()).all(|v| v.abs() < 1e-12));
}

#[test]
fn beta_agrees_with_contraction_at_a_point() {
    let hp = ham(2, 1, "1/2*(p1^1^2 + p1^2^2) + y1^3 + x1*p1^2");
    let pt = ZStarJet {
        x: vec![0.5, -1.0],
        y: vec![0.25],
        p: vec![vec![1.0, -2.0]],
        y_jet: vec![vec![3.0, 0.75]],
        p_jet: vec![vec![vec![1.0, 4.0], vec![-3.0, 0.5]]],
    };
    let (a, b, rest) = beta_coefficients_from_forms(&hp, &Connection::from_jet(&pt)).unwrap();
    assert!(rest.is_zero());
    let at = pt.to_point();
    let val = |e: &Poly| e.eval_f64(&|v| at.get(v).copied()).unwrap();
    let beta = beta_map(&hp, &pt).unwrap();
    assert!((val(&a[0]) - beta.a[0]).abs() < 1e-12);
    for mu in 0..2 {
        assert!((val(&b[0][mu]) - beta.b[0][mu]).abs() < 1e-12);
    }
}

#[test]
fn n_l_examples() {
    let ctx = ParseContext::new(2, 1);
    let e = |t: &str| parse(t, &ctx).unwrap().to_poly();
    let free = n_l_equations(&lag(2, 1, FREE2)).polys();
    assert_eq!(free, vec![e("p1^1_1 + p1^2_2"), e("p1^1 - y1_1"), e("p1^2 - y1_2")]);
    let mech = n_l_equations(&lag(1, 1, "1/2*z1_1^2")).polys();
    let ctx1 = ParseContext::new(1, 1);
    assert_eq!(
        mech,
        vec![
            parse("p1^1_1", &ctx1).unwrap().to_poly(),
            parse("p1^1 - y1_1", &ctx1).unwrap().to_poly()
        ]
    );
    let kg = lag(2, 1, KG2);
    let elim = n_l_elimination(&kg).polys();
    assert_eq!(elim[0], euler_lagrange(&kg).polys()[0].neg());
}

#[test]
fn triple_examples() {
    for (n, text) in [(2, KG2), (1, "1/2*z1_1^2")] {
        let r = verify_triple(&lag(n, 1, text), 20, 3, false).unwrap();
        assert!(r.omega_identity && r.passed);
        assert!(r.samples.iter().all(|s| s.residual_max <= 1e-9));
    }
    assert_eq!(
        verify_triple(&lag(2, 1, "x1*z1_1 + y1*z1_2"), 20, 3, false).unwrap_err(),
        FieldError::SingularHessian
    );
}

#[test]
fn tangency_examples() {
    let kg = lag(2, 1, KG2);
    let pt = point_on_n_l(
        &kg,
        &[0.2, 0.9],
        &[-0.4],
        &[vec![0.5, 0.125]],
        &[vec![vec![0.0, 1.0], vec![2.0, 0.0]]],
    )
    .unwrap();
    assert!(
        lagrangian_tangency_check(&kg, &jet_reduce(&pt).unwrap())
            .unwrap()
            .lagrangian
    );
    let mech = lag(1, 1, "1/2*z1_1^2");
    let pt = point_on_n_l(&mech, &[0.3], &[1.0], &[vec![-2.0]], &[vec![vec![0.0]]]).unwrap();
    assert!(
        lagrangian_tangency_check(&mech, &jet_reduce(&pt).unwrap())
            .unwrap()
            .lagrangian
    );
}
