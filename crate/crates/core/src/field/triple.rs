use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    hamiltonian_from_lagrangian, legendre_inverse_numeric, theta_h, total_derivative, trace, volume, Connection,
    EquationSet, FieldError, FieldTheoryProblem, HamiltonianProblem, JetPoint, JetSpace,
};
use crate::exterior::Vector;
use crate::forms::{homotopy_operator, wedge_c, CoordForm, FormsError};
use crate::multisymplectic::{classify, Classification, MultisymplecticSpace, Subspace};
use crate::scalar::Scalar;
use crate::symbolic::{Poly, VarName};

/// Point of `J^1 Z*`: `(x, y, p, y_jet, p_jet)` with `p[i][mu]`,
/// `y_jet[i][nu]` and `p_jet[i][mu][nu]` (all 0-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZStarJet {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub p: Vec<Vec<f64>>,
    pub y_jet: Vec<Vec<f64>>,
    pub p_jet: Vec<Vec<Vec<f64>>>,
}

/// Point of the quotient of `J^1 Z*` remembering only `sum_mu p_jet[i][mu][mu]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedJet {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub p: Vec<Vec<f64>>,
    pub y_jet: Vec<Vec<f64>>,
    pub div: Vec<f64>,
}

/// Point `(x, y, z; a_i, b_i^mu)` of `Lambda^{2n+1}_2 Z` in the chart where the
/// form is `a_i dy^i ^ d^n x + b_i^mu dz^i_mu ^ d^n x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaZPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<Vec<f64>>,
    pub a: Vec<f64>,
    pub b: Vec<Vec<f64>>,
}

/// Point `(x, y, p; A_i, B^i_mu)` of `Lambda^{2n+1}_2 Z*`, form
/// `A_i dy^i ^ d^n x + B^i_mu dp_i^mu ^ d^n x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaZStarPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub p: Vec<Vec<f64>>,
    pub a: Vec<f64>,
    pub b: Vec<Vec<f64>>,
}

fn check_grid(v: &[Vec<f64>], m: usize, n: usize) -> bool {
    v.len() == m && v.iter().all(|r| r.len() == n)
}

impl ZStarJet {
    pub fn dims(&self) -> (usize, usize) {
        (self.x.len(), self.y.len())
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        let (n, m) = self.dims();
        let ok = check_grid(&self.p, m, n)
            && check_grid(&self.y_jet, m, n)
            && self.p_jet.len() == m
            && self.p_jet.iter().all(|g| check_grid(g, n, n));
        if ok {
            Ok(())
        } else {
            Err(FieldError::Shape(format!("jet point does not match n = {n}, m = {m}")))
        }
    }

    pub fn trace(&self, i: usize) -> f64 {
        (0..self.x.len()).map(|mu| self.p_jet[i][mu][mu]).sum()
    }

    pub fn to_point(&self) -> JetPoint {
        let mut out = base_point(&self.x, &self.y);
        for (i, row) in self.p.iter().enumerate() {
            for (mu, v) in row.iter().enumerate() {
                out.insert(VarName::P(i + 1, mu + 1), *v);
            }
        }
        for (i, row) in self.y_jet.iter().enumerate() {
            for (nu, v) in row.iter().enumerate() {
                out.insert(VarName::YJet(i + 1, nu + 1), *v);
            }
        }
        for (i, g) in self.p_jet.iter().enumerate() {
            for (mu, row) in g.iter().enumerate() {
                for (nu, v) in row.iter().enumerate() {
                    out.insert(VarName::PJet(i + 1, mu + 1, nu + 1), *v);
                }
            }
        }
        out
    }
}

impl ReducedJet {
    /// Representative point of `J^1 Z*`: the divergence sits in the
    /// `p<i>^1_1` slot and the other `p_jet` entries are zero.
    pub fn to_point(&self) -> JetPoint {
        let n = self.x.len();
        let mut out = base_point(&self.x, &self.y);
        for (i, row) in self.p.iter().enumerate() {
            for (mu, v) in row.iter().enumerate() {
                out.insert(VarName::P(i + 1, mu + 1), *v);
                out.insert(VarName::YJet(i + 1, mu + 1), self.y_jet[i][mu]);
                for nu in 1..=n {
                    out.insert(VarName::PJet(i + 1, mu + 1, nu), 0.0);
                }
            }
            out.insert(VarName::PJet(i + 1, 1, 1), self.div[i]);
        }
        out
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        let (n, m) = (self.x.len(), self.y.len());
        if check_grid(&self.p, m, n) && check_grid(&self.y_jet, m, n) && self.div.len() == m {
            Ok(())
        } else {
            Err(FieldError::Shape(format!(
                "reduced point does not match n = {n}, m = {m}"
            )))
        }
    }
}

fn base_point(x: &[f64], y: &[f64]) -> JetPoint {
    let mut out = JetPoint::new();
    for (mu, v) in x.iter().enumerate() {
        out.insert(VarName::X(mu + 1), *v);
    }
    for (i, v) in y.iter().enumerate() {
        out.insert(VarName::Y(i + 1), *v);
    }
    out
}

/// `alpha(x, y, p, y_nu, p_nu) = (x, y, y_nu; sum_mu p_i^mu_mu, p_i^mu)`.
pub fn alpha_map(pt: &ZStarJet) -> Result<LambdaZPoint, FieldError> {
    pt.validate()?;
    alpha_tilde(&jet_reduce(pt)?)
}

/// Projection to the divergence quotient.
pub fn jet_reduce(pt: &ZStarJet) -> Result<ReducedJet, FieldError> {
    pt.validate()?;
    Ok(ReducedJet {
        x: pt.x.clone(),
        y: pt.y.clone(),
        p: pt.p.clone(),
        y_jet: pt.y_jet.clone(),
        div: (0..pt.y.len()).map(|i| pt.trace(i)).collect(),
    })
}

pub fn alpha_tilde(pt: &ReducedJet) -> Result<LambdaZPoint, FieldError> {
    pt.validate()?;
    Ok(LambdaZPoint {
        x: pt.x.clone(),
        y: pt.y.clone(),
        z: pt.y_jet.clone(),
        a: pt.div.clone(),
        b: pt.p.clone(),
    })
}

pub fn alpha_tilde_inverse(pt: &LambdaZPoint) -> Result<ReducedJet, FieldError> {
    let r = ReducedJet {
        x: pt.x.clone(),
        y: pt.y.clone(),
        p: pt.b.clone(),
        y_jet: pt.z.clone(),
        div: pt.a.clone(),
    };
    r.validate()?;
    Ok(r)
}

/// `beta = (x, y, p; sum_mu p_i^mu_mu + dH/dy^i, -y^i_mu + dH/dp_i^mu)`.
pub fn beta_map(hp: &HamiltonianProblem, pt: &ZStarJet) -> Result<LambdaZStarPoint, FieldError> {
    beta_tilde(hp, &jet_reduce(pt)?)
}

pub fn beta_tilde(hp: &HamiltonianProblem, pt: &ReducedJet) -> Result<LambdaZStarPoint, FieldError> {
    pt.validate()?;
    if pt.x.len() != hp.n || pt.y.len() != hp.m {
        return Err(FieldError::Shape("point does not match the hamiltonian".into()));
    }
    let mut at = pt.to_point();
    at.extend(hp.param_values());
    let h = hp.hamiltonian_poly();
    let lookup = |v: &VarName| at.get(v).copied();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 1..=hp.m {
        a.push(pt.div[i - 1] + h.diff(&VarName::Y(i)).eval_f64(&lookup)?);
        let mut row = Vec::new();
        for mu in 1..=hp.n {
            row.push(-pt.y_jet[i - 1][mu - 1] + h.diff(&VarName::P(i, mu)).eval_f64(&lookup)?);
        }
        b.push(row);
    }
    Ok(LambdaZStarPoint {
        x: pt.x.clone(),
        y: pt.y.clone(),
        p: pt.p.clone(),
        a,
        b,
    })
}

/// `z^i_mu -> y^i_mu`.
fn jets_for_z(n: usize, m: usize) -> BTreeMap<VarName, Poly> {
    (1..=m)
        .flat_map(|i| (1..=n).map(move |mu| (VarName::Z(i, mu), Poly::var(VarName::YJet(i, mu)))))
        .collect()
}

/// `sum_mu p_i^mu_mu - dL/dy^i` (one per `i`), then `p_i^mu - dL/dz^i_mu`
/// with `z = y_jet`.
pub fn n_l_equations(p: &FieldTheoryProblem) -> EquationSet {
    let (n, m) = (p.n, p.m);
    let to_jet = jets_for_z(n, m);
    let l = p.lagrangian_poly();
    let mut eqs = Vec::new();
    for i in 1..=m {
        eqs.push(trace(n, i).sub(&l.diff(&VarName::Y(i)).substitute_map(&to_jet)));
    }
    for i in 1..=m {
        for mu in 1..=n {
            eqs.push(Poly::var(VarName::P(i, mu)).sub(&l.diff(&VarName::Z(i, mu)).substitute_map(&to_jet)));
        }
    }
    EquationSet::new(eqs, JetSpace::ZStarJet)
}

/// `N_L` along the prolongation `p_i^mu = dL/dz^i_mu`, `y_nu = z_nu`,
/// `p_i^mu_nu = D_nu(dL/dz^i_mu)`: the first `m` entries are the negated
/// Euler-Lagrange expressions, the rest vanish.
pub fn n_l_elimination(p: &FieldTheoryProblem) -> EquationSet {
    let (n, m) = (p.n, p.m);
    let l = p.lagrangian_poly();
    let mut sub: BTreeMap<VarName, Poly> = BTreeMap::new();
    for i in 1..=m {
        for mu in 1..=n {
            let lz = l.diff(&VarName::Z(i, mu));
            sub.insert(VarName::YJet(i, mu), Poly::var(VarName::Z(i, mu)));
            for nu in 1..=n {
                sub.insert(VarName::PJet(i, mu, nu), total_derivative(&lz, n, m, nu));
            }
            sub.insert(VarName::P(i, mu), lz);
        }
    }
    let eqs = n_l_equations(p)
        .polys()
        .iter()
        .map(|e| e.substitute_map(&sub))
        .collect();
    EquationSet::new(eqs, JetSpace::SecondJet)
}

/// `-y^i_mu + dH/dp_i^mu` (ordered `(i, mu)`), then
/// `sum_mu p_i^mu_mu + dH/dy^i`.
pub fn n_h_equations(hp: &HamiltonianProblem) -> EquationSet {
    let h = hp.hamiltonian_poly();
    let mut eqs = Vec::new();
    for i in 1..=hp.m {
        for mu in 1..=hp.n {
            eqs.push(h.diff(&VarName::P(i, mu)).sub(&Poly::var(VarName::YJet(i, mu))));
        }
    }
    for i in 1..=hp.m {
        eqs.push(trace(hp.n, i).add(&h.diff(&VarName::Y(i))));
    }
    EquationSet::new(eqs, JetSpace::ZStarJet)
}

fn eval(e: &Poly, at: &JetPoint) -> Result<f64, FieldError> {
    Ok(e.eval_f64(&|v| at.get(v).copied())?)
}

/// Point of `N_L` over `(x, y, z)`: momenta from `Leg_L`, and `p_jet`
/// taken from `p_jet_free` with `p_jet[i][0][0]` adjusted to the right trace.
pub fn point_on_n_l(
    p: &FieldTheoryProblem,
    x: &[f64],
    y: &[f64],
    z: &[Vec<f64>],
    p_jet_free: &[Vec<Vec<f64>>],
) -> Result<ZStarJet, FieldError> {
    let (n, m) = (p.n, p.m);
    let mut pt = ZStarJet {
        x: x.to_vec(),
        y: y.to_vec(),
        p: vec![vec![0.0; n]; m],
        y_jet: z.to_vec(),
        p_jet: p_jet_free.to_vec(),
    };
    pt.validate()?;
    if x.len() != n || y.len() != m {
        return Err(FieldError::Shape("point does not match (n, m)".into()));
    }
    let mut at = base_point(x, y);
    for i in 1..=m {
        for mu in 1..=n {
            at.insert(VarName::Z(i, mu), z[i - 1][mu - 1]);
        }
    }
    at.extend(p.param_values());
    let l = p.lagrangian_poly();
    for i in 1..=m {
        for mu in 1..=n {
            pt.p[i - 1][mu - 1] = eval(&l.diff(&VarName::Z(i, mu)), &at)?;
        }
        let target = eval(&l.diff(&VarName::Y(i)), &at)?;
        let others: f64 = (1..n).map(|mu| pt.p_jet[i - 1][mu][mu]).sum();
        pt.p_jet[i - 1][0][0] = target - others;
    }
    Ok(pt)
}

/// Point of `N_h` over `(x, y, p)`: `y_jet = dH/dp`, trace `= -dH/dy`.
pub fn point_on_n_h(
    hp: &HamiltonianProblem,
    x: &[f64],
    y: &[f64],
    momenta: &[Vec<f64>],
    p_jet_free: &[Vec<Vec<f64>>],
) -> Result<ZStarJet, FieldError> {
    let (n, m) = (hp.n, hp.m);
    let mut pt = ZStarJet {
        x: x.to_vec(),
        y: y.to_vec(),
        p: momenta.to_vec(),
        y_jet: vec![vec![0.0; n]; m],
        p_jet: p_jet_free.to_vec(),
    };
    pt.validate()?;
    if x.len() != n || y.len() != m {
        return Err(FieldError::Shape("point does not match (n, m)".into()));
    }
    let mut at = pt.to_point();
    at.extend(hp.param_values());
    let h = hp.hamiltonian_poly();
    for i in 1..=m {
        for mu in 1..=n {
            pt.y_jet[i - 1][mu - 1] = eval(&h.diff(&VarName::P(i, mu)), &at)?;
        }
        let target = -eval(&h.diff(&VarName::Y(i)), &at)?;
        let others: f64 = (1..n).map(|mu| pt.p_jet[i - 1][mu][mu]).sum();
        pt.p_jet[i - 1][0][0] = target - others;
    }
    Ok(pt)
}

/// Pulled-back canonical forms on `J^1 Z*` and the exactness checks
/// relating them.
#[derive(Debug, Clone)]
pub struct PrimitiveForms {
    /// `sum_mu p_i^mu_mu dy^i ^ d^n x + p_i^mu dy^i_mu ^ d^n x`.
    pub theta_alpha: CoordForm,
    /// `(sum_mu p_i^mu_mu + H_y) dy^i ^ d^n x + (-y^i_mu + H_p) dp_i^mu ^ d^n x`.
    pub theta_beta: CoordForm,
    /// `(p_i^mu y^i_mu - H) d^n x`.
    pub primitive: CoordForm,
    /// `d(theta_alpha - theta_beta) = 0`, i.e. both 2-forms agree.
    pub omega_identity: bool,
    /// `theta_alpha - theta_beta = d primitive`.
    pub primitive_identity: bool,
    /// `theta_alpha - theta_beta = d(h - p_i^mu y^i_mu d^n x)`; does not hold in general.
    pub h_primitive_identity: bool,
    /// `d` of the homotopy primitive returns the difference (polynomial `H` only).
    pub homotopy_identity: Option<bool>,
}

pub fn primitive_forms(hp: &HamiltonianProblem) -> Result<PrimitiveForms, FieldError> {
    let (n, m) = (hp.n, hp.m);
    let space = JetSpace::ZStarJet.chart(n, m);
    let h = hp.hamiltonian_poly();
    let vol = volume(&space, n)?;
    let along = |v: VarName, c: Poly| -> Result<CoordForm, FieldError> {
        Ok(wedge_c(&CoordForm::dvar(&space, &v)?, &vol)?.scale(&c))
    };
    let mut ta = CoordForm::zero(&space, n + 1);
    let mut tb = CoordForm::zero(&space, n + 1);
    let mut pairing = h.neg();
    for i in 1..=m {
        ta = ta.try_add(&along(VarName::Y(i), trace(n, i))?)?;
        tb = tb.try_add(&along(VarName::Y(i), trace(n, i).add(&h.diff(&VarName::Y(i))))?)?;
        for mu in 1..=n {
            let pv = Poly::var(VarName::P(i, mu));
            let yj = Poly::var(VarName::YJet(i, mu));
            ta = ta.try_add(&along(VarName::YJet(i, mu), pv.clone())?)?;
            tb = tb.try_add(&along(VarName::P(i, mu), yj.neg().add(&h.diff(&VarName::P(i, mu))))?)?;
            pairing = pairing.add(&pv.mul(&yj));
        }
    }
    let diff = ta.try_sub(&tb)?;
    let primitive = vol.scale(&pairing);
    let h_on_jets = theta_h(hp)?.pullback(&space, &BTreeMap::new())?;
    let shifted = h_on_jets.try_sub(&vol.scale(&pairing.add(h)))?;
    let homotopy_identity = match homotopy_operator(&diff) {
        Ok(i) => Some(i.d() == diff),
        Err(FormsError::NotPolynomial(_)) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(PrimitiveForms {
        omega_identity: diff.d().is_zero(),
        primitive_identity: primitive.d() == diff,
        h_primitive_identity: shifted.d() == diff,
        homotopy_identity,
        theta_alpha: ta,
        theta_beta: tb,
        primitive,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    /// Drawn on `N_L`, residual of `N_h`.
    Lagrangian,
    /// Drawn on `N_h`, residual of `N_L` (and of `Leg_L^{-1}`).
    Hamiltonian,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleRecord {
    pub kind: SampleKind,
    pub point: ZStarJet,
    pub residual_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TripleReport {
    pub omega_identity: bool,
    pub primitive_identity: bool,
    pub h_primitive_identity: bool,
    pub homotopy_identity: Option<bool>,
    /// `beta` agrees with `i_{h*} Omega_h - (n - 1) Omega_h`.
    pub beta_consistent: bool,
    pub hamiltonian: String,
    pub seed: u64,
    pub tolerance: f64,
    pub samples: Vec<SampleRecord>,
    pub passed: bool,
}

pub const TRIPLE_TOLERANCE: f64 = 1e-9;

struct Draw {
    kind: SampleKind,
    x: Vec<f64>,
    y: Vec<f64>,
    fibre: Vec<Vec<f64>>,
    p_jet: Vec<Vec<Vec<f64>>>,
}

fn draw(rng: &mut ChaCha8Rng, kind: SampleKind, n: usize, m: usize) -> Draw {
    let mut u = || rng.gen_range(-1.0..=1.0);
    Draw {
        kind,
        x: (0..n).map(|_| u()).collect(),
        y: (0..m).map(|_| u()).collect(),
        fibre: (0..m).map(|_| (0..n).map(|_| u()).collect()).collect(),
        p_jet: (0..m)
            .map(|_| (0..n).map(|_| (0..n).map(|_| u()).collect()).collect())
            .collect(),
    }
}

/// Checks that `N_L` and `N_h` coincide under the Legendre transformation:
/// exact form identities plus `samples` random points on each side.
pub fn verify_triple(
    p: &FieldTheoryProblem,
    samples: usize,
    seed: u64,
    parallel: bool,
) -> Result<TripleReport, FieldError> {
    let (n, m) = (p.n, p.m);
    let hp = hamiltonian_from_lagrangian(p)?;
    let forms = primitive_forms(&hp)?;

    let jet_conn = Connection::OnZStar {
        y: (1..=m)
            .map(|i| (1..=n).map(|mu| Poly::var(VarName::YJet(i, mu))).collect())
            .collect(),
        p: (1..=m)
            .map(|i| {
                (1..=n)
                    .map(|nu| (1..=n).map(|mu| Poly::var(VarName::PJet(i, nu, mu))).collect())
                    .collect()
            })
            .collect(),
    };
    let (a, b, rest) = super::beta_coefficients_from_forms(&hp, &jet_conn)?;
    let h = hp.hamiltonian_poly();
    let beta_consistent = rest.is_zero()
        && (1..=m).all(|i| {
            a[i - 1] == trace(n, i).add(&h.diff(&VarName::Y(i)))
                && (1..=n).all(|mu| {
                    b[i - 1][mu - 1] == Poly::var(VarName::YJet(i, mu)).neg().add(&h.diff(&VarName::P(i, mu)))
                })
        });

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = Vec::with_capacity(2 * samples);
    for _ in 0..samples {
        draws.push(draw(&mut rng, SampleKind::Lagrangian, n, m));
    }
    for _ in 0..samples {
        draws.push(draw(&mut rng, SampleKind::Hamiltonian, n, m));
    }

    let n_l = n_l_equations(p);
    let n_h = n_h_equations(&hp);
    let params = p.param_values();
    let run = |d: &Draw| -> Result<SampleRecord, FieldError> {
        match d.kind {
            SampleKind::Lagrangian => {
                let pt = point_on_n_l(p, &d.x, &d.y, &d.fibre, &d.p_jet)?;
                let residual_max = n_h.max_residual(&pt.to_point())?;
                Ok(SampleRecord {
                    kind: d.kind,
                    point: pt,
                    residual_max,
                })
            }
            SampleKind::Hamiltonian => {
                let pt = point_on_n_h(&hp, &d.x, &d.y, &d.fibre, &d.p_jet)?;
                let flat: Vec<f64> = d.fibre.iter().flatten().copied().collect();
                let z = legendre_inverse_numeric(p, &d.x, &d.y, &flat)?;
                let mut worst = z
                    .iter()
                    .zip(pt.y_jet.iter().flatten())
                    .fold(0.0_f64, |w, (a, b)| w.max((a - b).abs()));
                let mut at = pt.to_point();
                at.extend(params.clone());
                worst = worst.max(n_l.max_residual(&at)?);
                Ok(SampleRecord {
                    kind: d.kind,
                    point: pt,
                    residual_max: worst,
                })
            }
        }
    };
    let records: Vec<SampleRecord> = if parallel {
        draws.par_iter().map(run).collect::<Result<_, _>>()?
    } else {
        draws.iter().map(run).collect::<Result<_, _>>()?
    };
    let passed = forms.omega_identity
        && forms.primitive_identity
        && beta_consistent
        && records.iter().all(|r| r.residual_max <= TRIPLE_TOLERANCE);
    Ok(TripleReport {
        omega_identity: forms.omega_identity,
        primitive_identity: forms.primitive_identity,
        h_primitive_identity: forms.h_primitive_identity,
        homotopy_identity: forms.homotopy_identity,
        beta_consistent,
        hamiltonian: hp.hamiltonian.to_string(),
        seed,
        tolerance: TRIPLE_TOLERANCE,
        samples: records,
        passed,
    })
}

/// `Omega_alpha = -d(div_i dy^i ^ d^n x + p_i^mu dy^i_mu ^ d^n x)` on the
/// reduced chart (divergence in the `p<i>^1_1` slot).
pub fn omega_alpha_reduced(n: usize, m: usize) -> Result<CoordForm, FieldError> {
    let space = JetSpace::Reduced.chart(n, m);
    let vol = volume(&space, n)?;
    let mut theta = CoordForm::zero(&space, n + 1);
    for i in 1..=m {
        let dy = wedge_c(&CoordForm::dvar(&space, &VarName::Y(i))?, &vol)?;
        theta = theta.try_add(&dy.scale(&Poly::var(VarName::PJet(i, 1, 1))))?;
        for mu in 1..=n {
            let dyj = wedge_c(&CoordForm::dvar(&space, &VarName::YJet(i, mu))?, &vol)?;
            theta = theta.try_add(&dyj.scale(&Poly::var(VarName::P(i, mu))))?;
        }
    }
    Ok(theta.d().neg())
}

fn value_at(e: &Poly, exact: &BTreeMap<VarName, Scalar>, approx: &JetPoint) -> Result<Scalar, FieldError> {
    match e.eval_exact(&|v| exact.get(v).cloned()) {
        Ok(s) => Ok(s),
        Err(_) => {
            let x = e.eval_f64(&|v| approx.get(v).copied())?;
            Scalar::from_f64(x).ok_or(FieldError::OffSubmanifold(f64::NAN))
        }
    }
}

/// Classifies `T_pt N_L` inside `(reduced J^1 Z*, Omega_alpha)` with
/// `l = n + 1`. The point must lie on `N_L` (tolerance `1e-9`).
pub fn lagrangian_tangency_check(p: &FieldTheoryProblem, pt: &ReducedJet) -> Result<Classification, FieldError> {
    pt.validate()?;
    let (n, m) = (p.n, p.m);
    if pt.x.len() != n || pt.y.len() != m {
        return Err(FieldError::Shape("point does not match (n, m)".into()));
    }
    let mut approx = pt.to_point();
    approx.extend(p.param_values());
    let residual = n_l_equations(p).max_residual(&approx)?;
    if residual > TRIPLE_TOLERANCE {
        return Err(FieldError::OffSubmanifold(residual));
    }
    let mut exact: BTreeMap<VarName, Scalar> = approx
        .iter()
        .map(|(k, v)| {
            Scalar::from_f64(*v)
                .map(|s| (k.clone(), s))
                .ok_or(FieldError::OffSubmanifold(*v))
        })
        .collect::<Result<_, _>>()?;
    for (k, v) in &p.params {
        exact.insert(VarName::Param(k.clone()), v.clone());
    }

    let chart = JetSpace::Reduced.chart(n, m);
    let dim = chart.dim();
    let to_jet = jets_for_z(n, m);
    let l = p.lagrangian_poly();
    let ly: Vec<Poly> = (1..=m)
        .map(|i| l.diff(&VarName::Y(i)).substitute_map(&to_jet))
        .collect();
    let lz: Vec<(VarName, Poly)> = super::z_vars(n, m)
        .into_iter()
        .map(|z| {
            let VarName::Z(i, mu) = z else { unreachable!() };
            (VarName::P(i, mu), l.diff(&z).substitute_map(&to_jet))
        })
        .collect();
    let mut free = super::x_vars(n);
    free.extend(super::y_vars(m));
    free.extend(super::yjet_vars(n, m));
    let pos = |v: &VarName| chart.position(v).expect("reduced coordinate");
    let mut tangents = Vec::new();
    for u in &free {
        let mut v = vec![Scalar::zero(); dim];
        v[pos(u)] = Scalar::one();
        for (i, e) in ly.iter().enumerate() {
            v[pos(&VarName::PJet(i + 1, 1, 1))] = value_at(&e.diff(u), &exact, &approx)?;
        }
        for (pv, e) in &lz {
            v[pos(pv)] = value_at(&e.diff(u), &exact, &approx)?;
        }
        tangents.push(Vector(v));
    }
    let omega = omega_alpha_reduced(n, m)?
        .to_constant_form()
        .expect("constant coefficients");
    let space = MultisymplecticSpace::new(omega)?;
    Ok(classify(&space, &Subspace::span(dim, &tangents), n + 1)?)
}
