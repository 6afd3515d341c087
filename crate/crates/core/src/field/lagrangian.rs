use super::numeric;
use super::{volume, volume_minus, Connection, EquationSet, FieldError, FieldTheoryProblem, JetPoint, JetSpace};
use crate::forms::{wedge_c, CoordForm};
use crate::symbolic::{Poly, VarName};

/// `Theta_L = (L - z^i_mu dL/dz^i_mu) d^n x + dL/dz^i_mu dy^i ^ d^{n-1}x_mu`.
pub fn poincare_cartan(p: &FieldTheoryProblem) -> Result<CoordForm, FieldError> {
    let space = p.chart();
    let l = p.lagrangian_poly();
    let mut energy = l.clone();
    let mut theta = CoordForm::zero(&space, p.n);
    for i in 1..=p.m {
        let dy = CoordForm::dvar(&space, &VarName::Y(i))?;
        for mu in 1..=p.n {
            let z = VarName::Z(i, mu);
            let dl = l.diff(&z);
            energy = energy.sub(&Poly::var(z).mul(&dl));
            let piece = wedge_c(&dy, &volume_minus(&space, p.n, mu)?)?.scale(&dl);
            theta = theta.try_add(&piece)?;
        }
    }
    Ok(theta.try_add(&volume(&space, p.n)?.scale(&energy))?)
}

/// `Omega_L = -d Theta_L`.
pub fn omega_l(p: &FieldTheoryProblem) -> Result<CoordForm, FieldError> {
    Ok(poincare_cartan(p)?.d().neg())
}

fn flat(n: usize, i: usize, mu: usize) -> usize {
    (i - 1) * n + (mu - 1)
}

/// Hessian `d^2 L / dz^i_mu dz^j_nu`, rows and columns ordered `(i, mu)`
/// with `i` outermost.
pub fn hessian(p: &FieldTheoryProblem) -> Vec<Vec<Poly>> {
    let zs = super::z_vars(p.n, p.m);
    let l = p.lagrangian_poly();
    zs.iter()
        .map(|a| {
            let la = l.diff(a);
            zs.iter().map(|b| la.diff(b)).collect()
        })
        .collect()
}

/// Hessian at a point of `Z` (parameters take their problem values).
pub fn hessian_at(p: &FieldTheoryProblem, point: &JetPoint) -> Result<Vec<Vec<f64>>, FieldError> {
    let params = p.param_values();
    let lookup = |v: &VarName| point.get(v).or_else(|| params.get(v)).copied();
    let mut out = Vec::new();
    for row in hessian(p) {
        let mut r = Vec::new();
        for e in row {
            r.push(e.eval_f64(&lookup)?);
        }
        out.push(r);
    }
    Ok(out)
}

/// `|det hessian| > 1e-9`.
pub fn is_regular_at(p: &FieldTheoryProblem, point: &JetPoint) -> Result<bool, FieldError> {
    Ok(numeric::det(hessian_at(p, point)?).abs() > 1e-9)
}

/// `D_mu f = df/dx^mu + z^j_mu df/dy^j + z^j_{nu mu} df/dz^j_nu`.
pub fn total_derivative(f: &Poly, n: usize, m: usize, mu: usize) -> Poly {
    let mut out = f.diff(&VarName::X(mu));
    for j in 1..=m {
        out = out.add(&Poly::var(VarName::Z(j, mu)).mul(&f.diff(&VarName::Y(j))));
        for nu in 1..=n {
            out = out.add(&Poly::var(VarName::z2(j, nu, mu)).mul(&f.diff(&VarName::Z(j, nu))));
        }
    }
    out
}

/// `dL/dy^i - D_mu (dL/dz^i_mu)`, one equation per field component.
pub fn euler_lagrange(p: &FieldTheoryProblem) -> EquationSet {
    let l = p.lagrangian_poly();
    let eqs = (1..=p.m)
        .map(|i| {
            let mut e = l.diff(&VarName::Y(i));
            for mu in 1..=p.n {
                e = e.sub(&total_derivative(&l.diff(&VarName::Z(i, mu)), p.n, p.m, mu));
            }
            e
        })
        .collect();
    EquationSet::new(eqs, JetSpace::SecondJet)
}

/// Residuals of `i_h Omega_L = (n - 1) Omega_L` for a connection on `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeDonderResiduals {
    /// `(y^j_nu - z^j_nu) L_{z^i_mu z^j_nu}`, indexed by `(i, mu)`.
    pub first: EquationSet,
    /// One per field component.
    pub second: EquationSet,
}

impl DeDonderResiduals {
    pub fn all(&self) -> EquationSet {
        let mut eqs = self.first.equations.clone();
        eqs.extend(self.second.equations.iter().cloned());
        EquationSet {
            equations: eqs,
            space: JetSpace::FirstJet,
        }
    }
}

fn z_coefficients(
    conn: &Connection,
    n: usize,
    m: usize,
) -> Result<(&Vec<Vec<Poly>>, &Vec<Vec<Vec<Poly>>>), FieldError> {
    conn.check_shape(n, m)?;
    match conn {
        Connection::OnZ { y, z } => Ok((y, z)),
        other => Err(FieldError::ConnectionRole {
            expected: "Z",
            found: other.role(),
        }),
    }
}

pub fn de_donder_residuals(p: &FieldTheoryProblem, conn: &Connection) -> Result<DeDonderResiduals, FieldError> {
    let (n, m) = (p.n, p.m);
    let (hy, hz) = z_coefficients(conn, n, m)?;
    let l = p.lagrangian_poly();
    let lz: Vec<Poly> = super::z_vars(n, m).iter().map(|z| l.diff(z)).collect();
    let gap = |j: usize, nu: usize| hy[j - 1][nu - 1].sub(&Poly::var(VarName::Z(j, nu)));

    let mut first = Vec::new();
    for i in 1..=m {
        for mu in 1..=n {
            let mut e = Poly::zero();
            for j in 1..=m {
                for nu in 1..=n {
                    e = e.add(&gap(j, nu).mul(&lz[flat(n, i, mu)].diff(&VarName::Z(j, nu))));
                }
            }
            first.push(e);
        }
    }

    let mut second = Vec::new();
    for i in 1..=m {
        let ly = l.diff(&VarName::Y(i));
        let mut e = ly.clone();
        for mu in 1..=n {
            e = e.sub(&lz[flat(n, i, mu)].diff(&VarName::X(mu)));
        }
        for j in 1..=m {
            for mu in 1..=n {
                e = e.sub(&hy[j - 1][mu - 1].mul(&lz[flat(n, i, mu)].diff(&VarName::Y(j))));
                for nu in 1..=n {
                    e = e.sub(&hz[j - 1][mu - 1][nu - 1].mul(&lz[flat(n, j, mu)].diff(&VarName::Z(i, nu))));
                }
            }
            for nu in 1..=n {
                e = e.add(&gap(j, nu).mul(&ly.diff(&VarName::Z(j, nu))));
            }
        }
        second.push(e);
    }
    Ok(DeDonderResiduals {
        first: EquationSet::new(first, JetSpace::FirstJet),
        second: EquationSet::new(second, JetSpace::FirstJet),
    })
}

/// The second residual after imposing `y^i_mu = z^i_mu`; only the
/// `z`-coefficients of the connection enter.
pub fn reduced_de_donder(p: &FieldTheoryProblem, conn: &Connection) -> Result<EquationSet, FieldError> {
    let (n, m) = (p.n, p.m);
    let (_, hz) = z_coefficients(conn, n, m)?;
    let l = p.lagrangian_poly();
    let eqs = (1..=m)
        .map(|i| {
            let mut e = l.diff(&VarName::Y(i));
            for mu in 1..=n {
                let lzi = l.diff(&VarName::Z(i, mu));
                e = e.sub(&lzi.diff(&VarName::X(mu)));
                for j in 1..=m {
                    e = e.sub(&Poly::var(VarName::Z(j, mu)).mul(&lzi.diff(&VarName::Y(j))));
                    for nu in 1..=n {
                        let lzj = l.diff(&VarName::Z(j, mu));
                        e = e.sub(&hz[j - 1][mu - 1][nu - 1].mul(&lzj.diff(&VarName::Z(i, nu))));
                    }
                }
            }
            e
        })
        .collect();
    Ok(EquationSet::new(eqs, JetSpace::FirstJet))
}
