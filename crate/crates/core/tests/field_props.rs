mod common;

use std::collections::BTreeMap;

use msgeo::field::{
    alpha_tilde, beta_tilde, de_donder_residuals, euler_lagrange, hamiltonian_from_lagrangian, jet_reduce, legendre,
    n_l_elimination, p_vars, primitive_forms, reduced_de_donder, verify_triple, z_vars, Connection, HamiltonianProblem,
    JetSpace, ZStarJet,
};
use msgeo::symbolic::{Poly, VarName};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn shape() -> impl Strategy<Value = (usize, usize, u64)> {
    (1usize..=2, 1usize..=2, any::<u64>())
}

fn random_jet(rng: &mut ChaCha8Rng, n: usize, m: usize) -> ZStarJet {
    let mut u = || rng.gen_range(-1.0..=1.0);
    ZStarJet {
        x: (0..n).map(|_| u()).collect(),
        y: (0..m).map(|_| u()).collect(),
        p: (0..m).map(|_| (0..n).map(|_| u()).collect()).collect(),
        y_jet: (0..m).map(|_| (0..n).map(|_| u()).collect()).collect(),
        p_jet: (0..m)
            .map(|_| (0..n).map(|_| (0..n).map(|_| u()).collect()).collect())
            .collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn legendre_duality((n, m, seed) in shape()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = common::random_quadratic_lagrangian(&mut rng, n, m);
        let hp = hamiltonian_from_lagrangian(&p).unwrap();
        let leg = legendre(&p);
        let lhs = hp.hamiltonian_poly().substitute_map(&leg.big_leg_map()).add(p.lagrangian_poly());
        let rhs = z_vars(n, m)
            .into_iter()
            .zip(&leg.momenta)
            .fold(Poly::zero(), |acc, (z, pz)| acc.add(&Poly::var(z).mul(pz)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn de_donder_reduces_to_euler_lagrange((n, m, seed) in shape()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = common::random_quadratic_lagrangian(&mut rng, n, m);
        let conn = Connection::generic_on_z(n, m);
        let r = de_donder_residuals(&p, &conn).unwrap();
        let y_is_z: BTreeMap<VarName, Poly> = (1..=m)
            .flat_map(|i| (1..=n).map(move |mu| (VarName::param(&format!("hy{i}_{mu}")), Poly::var(VarName::Z(i, mu)))))
            .collect();
        prop_assert!(r.first.polys().iter().all(|e| e.substitute_map(&y_is_z).is_zero()));
        let reduced: Vec<Poly> = r.second.polys().iter().map(|e| e.substitute_map(&y_is_z)).collect();
        prop_assert_eq!(&reduced, &reduced_de_donder(&p, &conn).unwrap().polys());
        // with the second jets of a section as z-coefficients, the reduced system is Euler-Lagrange
        let jets = Connection::OnZ {
            y: (1..=m).map(|i| (1..=n).map(|mu| Poly::var(VarName::Z(i, mu))).collect()).collect(),
            z: (1..=m)
                .map(|i| (1..=n).map(|nu| (1..=n).map(|mu| Poly::var(VarName::z2(i, nu, mu))).collect()).collect())
                .collect(),
        };
        prop_assert_eq!(reduced_de_donder(&p, &jets).unwrap().polys(), euler_lagrange(&p).polys());
    }

    #[test]
    fn elimination_of_n_l_is_euler_lagrange((n, m, seed) in shape()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = common::random_lagrangian(&mut rng, n, m);
        let elim = n_l_elimination(&p).polys();
        let el = euler_lagrange(&p).polys();
        for i in 0..m {
            prop_assert_eq!(&elim[i], &el[i].neg());
        }
        prop_assert!(elim[m..].iter().all(Poly::is_zero));
    }

    #[test]
    fn alpha_and_beta_ignore_off_trace_jets((n, m, seed) in shape()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = common::random_quadratic_lagrangian(&mut rng, n, m);
        let hp = hamiltonian_from_lagrangian(&p).unwrap();
        let a = random_jet(&mut rng, n, m);
        let mut b = a.clone();
        for i in 0..m {
            for mu in 0..n {
                for nu in 0..n {
                    if mu != nu {
                        b.p_jet[i][mu][nu] = rng.gen_range(-1.0..=1.0);
                    }
                }
            }
            // move weight between diagonal entries, keeping the trace
            let shift = rng.gen_range(-1.0..=1.0);
            b.p_jet[i][0][0] += shift;
            b.p_jet[i][n - 1][n - 1] -= shift;
        }
        let (ra, rb) = (jet_reduce(&a).unwrap(), jet_reduce(&b).unwrap());
        for i in 0..m {
            prop_assert!((ra.div[i] - rb.div[i]).abs() < 1e-12);
        }
        // compare on a common representative
        let mut rb = rb;
        rb.div = ra.div.clone();
        prop_assert_eq!(alpha_tilde(&ra).unwrap(), alpha_tilde(&rb).unwrap());
        prop_assert_eq!(beta_tilde(&hp, &ra).unwrap(), beta_tilde(&hp, &rb).unwrap());
    }

    #[test]
    fn theta_difference_is_exact((n, m, seed) in shape()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vars = JetSpace::ZStar.coordinates(n, m);
        let h = common::random_poly(&mut rng, &vars, 4, 3);
        let hp = HamiltonianProblem::new(n, m, h.to_expr(), BTreeMap::new()).unwrap();
        let f = primitive_forms(&hp).unwrap();
        prop_assert!(f.omega_identity);
        prop_assert!(f.primitive_identity);
        prop_assert_eq!(f.homotopy_identity, Some(true));
    }

    #[test]
    fn triple_round_trip((n, m, seed) in shape()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = common::random_quadratic_lagrangian(&mut rng, n, m);
        let r = verify_triple(&p, 5, seed, false).unwrap();
        prop_assert!(r.passed, "{:?}", r);
    }
}

#[test]
fn momenta_are_named_like_z() {
    assert_eq!(p_vars(2, 1), vec![VarName::P(1, 1), VarName::P(1, 2)]);
}

#[test]
fn euler_lagrange_matches_discrete_action() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (n, m) in [(1, 1), (2, 1), (1, 2)] {
        let p = common::random_lagrangian(&mut rng, n, m);
        let section = common::random_section(&mut rng, n, m);
        let stats = common::el_oracle(&p, &section, 16, 1e-3);
        assert!(stats.fraction() >= 0.95, "{} {stats:?}", p.lagrangian);
    }
}
