//! First-order classical field theories in fibred coordinates.
//!
//! Base coordinates `x1..xn`, fibre coordinates `y1..ym`; `Z = J^1 Y` adds
//! `z<i>_<mu>`, `Z*` carries momenta `p<i>^<mu>`, and `J^1 Z*` adds the jets
//! `y<i>_<nu>` and `p<i>^<mu>_<nu>`.

mod hamiltonian;
mod lagrangian;
mod numeric;
mod triple;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

pub use hamiltonian::{
    beta_coefficients_from_forms, hamilton_de_donder_residuals, hamilton_equations, hamiltonian_from_lagrangian,
    legendre, legendre_inverse_numeric, omega_h, theta_h, Legendre,
};
pub use lagrangian::{
    de_donder_residuals, euler_lagrange, hessian, hessian_at, is_regular_at, omega_l, poincare_cartan,
    reduced_de_donder, total_derivative, DeDonderResiduals,
};
pub use triple::{
    alpha_map, alpha_tilde, alpha_tilde_inverse, beta_map, beta_tilde, jet_reduce, lagrangian_tangency_check,
    n_h_equations, n_l_elimination, n_l_equations, omega_alpha_reduced, point_on_n_h, point_on_n_l, primitive_forms,
    verify_triple, LambdaZPoint, LambdaZStarPoint, PrimitiveForms, ReducedJet, SampleKind, SampleRecord, TripleReport,
    ZStarJet,
};

use crate::forms::{interior_c, CoordForm, CoordSpace, FormsError};
use crate::multisymplectic::LinearError;
use crate::scalar::Scalar;
use crate::symbolic::{Expr, ParseContext, Poly, SymbolicError, VarName};

/// Numeric point: coordinate values of a declared space.
pub type JetPoint = BTreeMap<VarName, f64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Linear(#[from] LinearError),
    #[error("need n >= 1 and m >= 1 (got n = {n}, m = {m})")]
    Dimensions { n: usize, m: usize },
    #[error("`{0}` is not a legal coordinate here")]
    IllegalVariable(VarName),
    #[error("parameter `{0}` has no value")]
    MissingParameter(String),
    #[error("the z-hessian is not constant: {0}")]
    NonConstantHessian(String),
    #[error("the lagrangian is not regular (singular hessian)")]
    SingularHessian,
    #[error("Newton iteration did not converge (residual {0:e})")]
    NewtonFailed(f64),
    #[error("point is off the submanifold (residual {0:e})")]
    OffSubmanifold(f64),
    #[error("connection on {found} given where a connection on {expected} is needed")]
    ConnectionRole {
        expected: &'static str,
        found: &'static str,
    },
    #[error("{0}")]
    Shape(String),
}

pub fn x_vars(n: usize) -> Vec<VarName> {
    (1..=n).map(VarName::X).collect()
}

pub fn y_vars(m: usize) -> Vec<VarName> {
    (1..=m).map(VarName::Y).collect()
}

/// `z<i>_<mu>`, fibre index outermost.
pub fn z_vars(n: usize, m: usize) -> Vec<VarName> {
    (1..=m).flat_map(|i| (1..=n).map(move |mu| VarName::Z(i, mu))).collect()
}

pub fn p_vars(n: usize, m: usize) -> Vec<VarName> {
    (1..=m).flat_map(|i| (1..=n).map(move |mu| VarName::P(i, mu))).collect()
}

pub fn yjet_vars(n: usize, m: usize) -> Vec<VarName> {
    (1..=m)
        .flat_map(|i| (1..=n).map(move |nu| VarName::YJet(i, nu)))
        .collect()
}

pub fn pjet_vars(n: usize, m: usize) -> Vec<VarName> {
    (1..=m)
        .flat_map(|i| (1..=n).flat_map(move |mu| (1..=n).map(move |nu| VarName::PJet(i, mu, nu))))
        .collect()
}

/// `sum_mu p<i>^<mu>_<mu>`.
pub fn trace(n: usize, i: usize) -> Poly {
    (1..=n).fold(Poly::zero(), |acc, mu| acc.add(&Poly::var(VarName::PJet(i, mu, mu))))
}

/// Which coordinates an object lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JetSpace {
    /// `(x, y, z)` on `Z`.
    FirstJet,
    /// `(x, y, z, z2)`: second-order jets of sections of `Y`.
    SecondJet,
    /// `(x, y, p)` on `Z*`.
    ZStar,
    /// `(x, y, p, y_jet, p_jet)` on `J^1 Z*`.
    ZStarJet,
    /// `(x, y, p, y_jet, div)` on the divergence quotient of `J^1 Z*`.
    Reduced,
}

impl JetSpace {
    pub fn name(self) -> &'static str {
        match self {
            JetSpace::FirstJet => "first_jet",
            JetSpace::SecondJet => "second_jet",
            JetSpace::ZStar => "z_star",
            JetSpace::ZStarJet => "z_star_jet",
            JetSpace::Reduced => "reduced",
        }
    }

    pub fn coordinates(self, n: usize, m: usize) -> Vec<VarName> {
        let mut v = x_vars(n);
        v.extend(y_vars(m));
        match self {
            JetSpace::FirstJet => v.extend(z_vars(n, m)),
            JetSpace::SecondJet => {
                v.extend(z_vars(n, m));
                for i in 1..=m {
                    for mu in 1..=n {
                        v.extend((mu..=n).map(|nu| VarName::Z2(i, mu, nu)));
                    }
                }
            }
            JetSpace::ZStar => v.extend(p_vars(n, m)),
            JetSpace::ZStarJet => {
                v.extend(p_vars(n, m));
                v.extend(yjet_vars(n, m));
                v.extend(pjet_vars(n, m));
            }
            JetSpace::Reduced => {
                v.extend(p_vars(n, m));
                v.extend(yjet_vars(n, m));
                v.extend((1..=m).map(|i| VarName::PJet(i, 1, 1)));
            }
        }
        v
    }

    pub fn chart(self, n: usize, m: usize) -> Arc<CoordSpace> {
        CoordSpace::new(self.coordinates(n, m)).expect("distinct coordinates")
    }
}

/// Expressions understood as `= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquationSet {
    pub equations: Vec<Expr>,
    pub space: JetSpace,
}

impl EquationSet {
    pub fn new(polys: Vec<Poly>, space: JetSpace) -> Self {
        EquationSet {
            equations: polys.iter().map(Poly::to_expr).collect(),
            space,
        }
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn polys(&self) -> Vec<Poly> {
        self.equations.iter().map(Expr::to_poly).collect()
    }

    /// Every equation is identically zero.
    pub fn is_trivial(&self) -> bool {
        self.polys().iter().all(Poly::is_zero)
    }

    /// Same equations up to the sign of each, in order.
    pub fn same_up_to_sign(&self, other: &EquationSet) -> bool {
        self.len() == other.len()
            && self
                .polys()
                .iter()
                .zip(other.polys())
                .all(|(a, b)| *a == b || *a == b.neg())
    }

    /// Largest absolute residual at a point.
    pub fn max_residual(&self, point: &JetPoint) -> Result<f64, SymbolicError> {
        let mut worst: f64 = 0.0;
        for e in &self.equations {
            worst = worst.max(e.evaluate_at(point)?.abs());
        }
        Ok(worst)
    }

    pub fn record(&self) -> EquationRecord {
        EquationRecord {
            equations: self.equations.clone(),
            text: self.equations.iter().map(|e| format!("{e} = 0")).collect(),
            space: self.space,
        }
    }
}

impl fmt::Display for EquationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.equations {
            writeln!(f, "{e} = 0")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EquationRecord {
    pub equations: Vec<Expr>,
    pub text: Vec<String>,
    pub space: JetSpace,
}

fn check_vars(e: &Expr, allowed: &BTreeSet<VarName>, params: &BTreeMap<String, Scalar>) -> Result<(), FieldError> {
    for v in e.to_poly().vars() {
        match &v {
            VarName::Param(name) if !params.contains_key(name) => {
                return Err(FieldError::MissingParameter(name.clone()))
            }
            VarName::Param(_) => {}
            _ if !allowed.contains(&v) => return Err(FieldError::IllegalVariable(v)),
            _ => {}
        }
    }
    Ok(())
}

fn param_bindings(params: &BTreeMap<String, Scalar>) -> BTreeMap<VarName, Poly> {
    params
        .iter()
        .map(|(k, v)| (VarName::Param(k.clone()), Poly::constant(v.clone())))
        .collect()
}

fn parse_context(n: usize, m: usize, params: &BTreeMap<String, Scalar>) -> Result<ParseContext, FieldError> {
    let mut ctx = ParseContext::new(n, m);
    for name in params.keys() {
        ctx = ctx.with_param(name)?;
    }
    Ok(ctx)
}

/// `L d^n x` on `Z`, with parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTheoryProblem {
    pub n: usize,
    pub m: usize,
    pub lagrangian: Expr,
    pub params: BTreeMap<String, Scalar>,
    poly: Poly,
}

impl FieldTheoryProblem {
    pub fn new(n: usize, m: usize, lagrangian: Expr, params: BTreeMap<String, Scalar>) -> Result<Self, FieldError> {
        if n == 0 || m == 0 || n > 9 {
            return Err(FieldError::Dimensions { n, m });
        }
        let allowed: BTreeSet<VarName> = JetSpace::FirstJet.coordinates(n, m).into_iter().collect();
        check_vars(&lagrangian, &allowed, &params)?;
        let poly = lagrangian.to_poly();
        Ok(FieldTheoryProblem {
            n,
            m,
            lagrangian,
            params,
            poly,
        })
    }

    pub fn parse(n: usize, m: usize, text: &str, params: BTreeMap<String, Scalar>) -> Result<Self, FieldError> {
        if n == 0 || m == 0 || n > 9 {
            return Err(FieldError::Dimensions { n, m });
        }
        let e = crate::symbolic::parse(text, &parse_context(n, m, &params)?)?;
        FieldTheoryProblem::new(n, m, e, params)
    }

    pub fn lagrangian_poly(&self) -> &Poly {
        &self.poly
    }

    /// `L` with parameter values substituted.
    pub fn numeric_lagrangian(&self) -> Poly {
        self.poly.substitute_map(&param_bindings(&self.params))
    }

    pub fn param_bindings(&self) -> BTreeMap<VarName, Poly> {
        param_bindings(&self.params)
    }

    pub fn param_values(&self) -> JetPoint {
        self.params
            .iter()
            .map(|(k, v)| (VarName::Param(k.clone()), v.to_f64()))
            .collect()
    }

    pub fn chart(&self) -> Arc<CoordSpace> {
        JetSpace::FirstJet.chart(self.n, self.m)
    }
}

/// `H` on `Z*`, defining `h = -H d^n x + p_i^mu dy^i ^ d^{n-1}x_mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianProblem {
    pub n: usize,
    pub m: usize,
    pub hamiltonian: Expr,
    pub params: BTreeMap<String, Scalar>,
    poly: Poly,
}

impl HamiltonianProblem {
    pub fn new(n: usize, m: usize, hamiltonian: Expr, params: BTreeMap<String, Scalar>) -> Result<Self, FieldError> {
        if n == 0 || m == 0 || n > 9 {
            return Err(FieldError::Dimensions { n, m });
        }
        let allowed: BTreeSet<VarName> = JetSpace::ZStar.coordinates(n, m).into_iter().collect();
        check_vars(&hamiltonian, &allowed, &params)?;
        let poly = hamiltonian.to_poly();
        Ok(HamiltonianProblem {
            n,
            m,
            hamiltonian,
            params,
            poly,
        })
    }

    pub fn parse(n: usize, m: usize, text: &str, params: BTreeMap<String, Scalar>) -> Result<Self, FieldError> {
        if n == 0 || m == 0 || n > 9 {
            return Err(FieldError::Dimensions { n, m });
        }
        let e = crate::symbolic::parse(text, &parse_context(n, m, &params)?)?;
        HamiltonianProblem::new(n, m, e, params)
    }

    pub fn hamiltonian_poly(&self) -> &Poly {
        &self.poly
    }

    pub fn numeric_hamiltonian(&self) -> Poly {
        self.poly.substitute_map(&param_bindings(&self.params))
    }

    pub fn param_values(&self) -> JetPoint {
        self.params
            .iter()
            .map(|(k, v)| (VarName::Param(k.clone()), v.to_f64()))
            .collect()
    }

    pub fn chart(&self) -> Arc<CoordSpace> {
        JetSpace::ZStar.chart(self.n, self.m)
    }
}

/// Ehresmann connection given by its horizontal lifts of `d/dx^mu`.
#[derive(Debug, Clone, PartialEq)]
pub enum Connection {
    /// `h(d/dx^mu) = d/dx^mu + y[i][mu] d/dy^i + z[i][nu][mu] d/dz^i_nu`.
    OnZ { y: Vec<Vec<Poly>>, z: Vec<Vec<Vec<Poly>>> },
    /// `h*(d/dx^mu) = d/dx^mu + y[i][mu] d/dy^i + p[j][nu][mu] d/dp_j^nu`.
    OnZStar { y: Vec<Vec<Poly>>, p: Vec<Vec<Vec<Poly>>> },
}

impl Connection {
    fn role(&self) -> &'static str {
        match self {
            Connection::OnZ { .. } => "Z",
            Connection::OnZStar { .. } => "Z*",
        }
    }

    /// Connection on `Z` whose coefficients are fresh parameters
    /// `hy<i>_<mu>` and `hz<i>_<nu><mu>`.
    pub fn generic_on_z(n: usize, m: usize) -> Connection {
        let y = (1..=m)
            .map(|i| {
                (1..=n)
                    .map(|mu| Poly::var(VarName::param(&format!("hy{i}_{mu}"))))
                    .collect()
            })
            .collect();
        let z = (1..=m)
            .map(|i| {
                (1..=n)
                    .map(|nu| {
                        (1..=n)
                            .map(|mu| Poly::var(VarName::param(&format!("hz{i}_{nu}{mu}"))))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Connection::OnZ { y, z }
    }

    /// Connection on `Z*` with constant coefficients read off a jet point.
    pub fn from_jet(pt: &ZStarJet) -> Connection {
        let c = |x: f64| Poly::constant(Scalar::from_f64(x).expect("finite coordinate"));
        Connection::OnZStar {
            y: pt.y_jet.iter().map(|r| r.iter().map(|&v| c(v)).collect()).collect(),
            p: pt
                .p_jet
                .iter()
                .map(|rows| rows.iter().map(|r| r.iter().map(|&v| c(v)).collect()).collect())
                .collect(),
        }
    }

    /// Horizontal lift of `d/dx^mu` as a list of components.
    fn lift(&self, n: usize, m: usize, mu: usize) -> Vec<(VarName, Poly)> {
        let mut out = vec![(VarName::X(mu), Poly::one())];
        match self {
            Connection::OnZ { y, z } => {
                for i in 1..=m {
                    out.push((VarName::Y(i), y[i - 1][mu - 1].clone()));
                    for nu in 1..=n {
                        out.push((VarName::Z(i, nu), z[i - 1][nu - 1][mu - 1].clone()));
                    }
                }
            }
            Connection::OnZStar { y, p } => {
                for i in 1..=m {
                    out.push((VarName::Y(i), y[i - 1][mu - 1].clone()));
                    for nu in 1..=n {
                        out.push((VarName::P(i, nu), p[i - 1][nu - 1][mu - 1].clone()));
                    }
                }
            }
        }
        out
    }

    /// `i_h w = sum_mu dx^mu ^ i_{h(d/dx^mu)} w`.
    pub fn contract(&self, w: &CoordForm, n: usize, m: usize) -> Result<CoordForm, FieldError> {
        let space = w.space().clone();
        let mut out = CoordForm::zero(&space, w.degree());
        for mu in 1..=n {
            let inner = w.interior_field(&self.lift(n, m, mu))?;
            let dx = CoordForm::dvar(&space, &VarName::X(mu))?;
            out = out.try_add(&crate::forms::wedge_c(&dx, &inner)?)?;
        }
        Ok(out)
    }

    fn check_shape(&self, n: usize, m: usize) -> Result<(), FieldError> {
        let ok = match self {
            Connection::OnZ { y, z } | Connection::OnZStar { y, p: z } => {
                y.len() == m
                    && y.iter().all(|r| r.len() == n)
                    && z.len() == m
                    && z.iter()
                        .all(|rows| rows.len() == n && rows.iter().all(|r| r.len() == n))
            }
        };
        if ok {
            Ok(())
        } else {
            Err(FieldError::Shape(format!(
                "connection coefficients do not match n = {n}, m = {m}"
            )))
        }
    }
}

/// `d^n x` on a chart containing `x1..xn`.
pub fn volume(space: &Arc<CoordSpace>, n: usize) -> Result<CoordForm, FieldError> {
    Ok(CoordForm::monomial(space, Poly::one(), &x_vars(n))?)
}

/// `d^{n-1} x_mu = i_{d/dx^mu} d^n x`.
pub fn volume_minus(space: &Arc<CoordSpace>, n: usize, mu: usize) -> Result<CoordForm, FieldError> {
    Ok(interior_c(&VarName::X(mu), &volume(space, n)?)?)
}
