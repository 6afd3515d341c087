use std::collections::BTreeMap;
use std::fmt;

use super::numeric;
use super::{
    p_vars, volume, volume_minus, z_vars, Connection, EquationSet, FieldError, FieldTheoryProblem, HamiltonianProblem,
    JetSpace,
};
use crate::forms::{wedge_c, CoordForm};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::symbolic::{Poly, VarName};

/// Legendre transformation `leg_L(x, y, z) = (x, y, L - z dL/dz, dL/dz)`;
/// `Leg_L` drops the scalar slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Legendre {
    pub n: usize,
    pub m: usize,
    /// `L - z^i_mu dL/dz^i_mu`.
    pub energy: Poly,
    /// `dL/dz^i_mu`, ordered `(i, mu)`.
    pub momenta: Vec<Poly>,
}

impl Legendre {
    /// `leg_L` as substitutions for `p` and `p<i>^<mu>`.
    pub fn leg_map(&self) -> BTreeMap<VarName, Poly> {
        let mut map = self.big_leg_map();
        map.insert(VarName::PScalar, self.energy.clone());
        map
    }

    /// `Leg_L` as substitutions for `p<i>^<mu>`.
    pub fn big_leg_map(&self) -> BTreeMap<VarName, Poly> {
        p_vars(self.n, self.m)
            .into_iter()
            .zip(self.momenta.iter().cloned())
            .collect()
    }
}

impl fmt::Display for Legendre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} = {}", VarName::PScalar, self.energy.to_expr())?;
        for (v, e) in p_vars(self.n, self.m).iter().zip(&self.momenta) {
            writeln!(f, "{v} = {}", e.to_expr())?;
        }
        Ok(())
    }
}

pub fn legendre(p: &FieldTheoryProblem) -> Legendre {
    let l = p.lagrangian_poly();
    let momenta: Vec<Poly> = z_vars(p.n, p.m).iter().map(|z| l.diff(z)).collect();
    let mut energy = l.clone();
    for (z, pz) in z_vars(p.n, p.m).into_iter().zip(&momenta) {
        energy = energy.sub(&Poly::var(z).mul(pz));
    }
    Legendre {
        n: p.n,
        m: p.m,
        energy,
        momenta,
    }
}

/// `H(x, y, p) = p z(p) - L(x, y, z(p))` with `z(p)` inverting `Leg_L`.
///
/// Symbolic only when the `z`-hessian is a constant matrix (parameters take
/// their values); `legendre_inverse_numeric` covers the other cases
/// pointwise.
pub fn hamiltonian_from_lagrangian(p: &FieldTheoryProblem) -> Result<HamiltonianProblem, FieldError> {
    let (n, m) = (p.n, p.m);
    let l = p.numeric_lagrangian();
    let zs = z_vars(n, m);
    let grad: Vec<Poly> = zs.iter().map(|z| l.diff(z)).collect();
    let mut rows = Vec::new();
    for g in &grad {
        let mut row = Vec::new();
        for z in &zs {
            let h = g.diff(z);
            row.push(
                h.as_constant()
                    .ok_or_else(|| FieldError::NonConstantHessian(h.to_expr().to_string()))?,
            );
        }
        rows.push(row);
    }
    let a = Matrix::from_rows(rows);
    let inv = a.inverse().ok_or(FieldError::SingularHessian)?;
    let at_zero: BTreeMap<VarName, Poly> = zs.iter().map(|z| (z.clone(), Poly::zero())).collect();
    // grad = A z + b exactly, since the hessian is constant
    let shifted: Vec<Poly> = p_vars(n, m)
        .into_iter()
        .zip(&grad)
        .map(|(pv, g)| Poly::var(pv).sub(&g.substitute_map(&at_zero)))
        .collect();
    let z_of_p: BTreeMap<VarName, Poly> = zs
        .iter()
        .enumerate()
        .map(|(r, z)| {
            let e = (0..shifted.len()).fold(Poly::zero(), |acc, c| acc.add(&shifted[c].scale(&inv[(r, c)])));
            (z.clone(), e)
        })
        .collect();
    let mut h = l.substitute_map(&z_of_p).neg();
    for (pv, z) in p_vars(n, m).into_iter().zip(&zs) {
        h = h.add(&Poly::var(pv).mul(&z_of_p[z]));
    }
    HamiltonianProblem::new(n, m, h.to_expr(), BTreeMap::new())
}

/// Solves `dL/dz(x, y, z) = p` for `z` by Newton's method from `z = 0`
/// (tolerance `1e-12`, at most 50 steps). Slices are ordered `(i, mu)`.
pub fn legendre_inverse_numeric(
    p: &FieldTheoryProblem,
    x: &[f64],
    y: &[f64],
    momenta: &[f64],
) -> Result<Vec<f64>, FieldError> {
    let (n, m) = (p.n, p.m);
    if x.len() != n || y.len() != m || momenta.len() != n * m {
        return Err(FieldError::Shape("point does not match (n, m)".into()));
    }
    let zs = z_vars(n, m);
    let l = p.numeric_lagrangian();
    let grad: Vec<Poly> = zs.iter().map(|z| l.diff(z)).collect();
    let hess: Vec<Vec<Poly>> = grad.iter().map(|g| zs.iter().map(|z| g.diff(z)).collect()).collect();
    let mut z = vec![0.0; n * m];
    let mut residual = f64::INFINITY;
    for _ in 0..50 {
        let lookup = |v: &VarName| match v {
            VarName::X(mu) => x.get(mu - 1).copied(),
            VarName::Y(i) => y.get(i - 1).copied(),
            VarName::Z(i, mu) => z.get((i - 1) * n + mu - 1).copied(),
            _ => None,
        };
        let f: Vec<f64> = grad
            .iter()
            .zip(momenta)
            .map(|(g, pm)| g.eval_f64(&lookup).map(|v| v - pm))
            .collect::<Result<_, _>>()?;
        residual = f.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
        if residual <= 1e-12 {
            return Ok(z);
        }
        let jac: Vec<Vec<f64>> = hess
            .iter()
            .map(|row| row.iter().map(|h| h.eval_f64(&lookup)).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()?;
        let step = numeric::solve(jac, f).ok_or(FieldError::SingularHessian)?;
        for (zi, s) in z.iter_mut().zip(&step) {
            *zi -= s;
        }
        if step.iter().all(|s| s.abs() <= 1e-12 * (1.0 + residual)) {
            break;
        }
    }
    let lookup = |v: &VarName| match v {
        VarName::X(mu) => x.get(mu - 1).copied(),
        VarName::Y(i) => y.get(i - 1).copied(),
        VarName::Z(i, mu) => z.get((i - 1) * n + mu - 1).copied(),
        _ => None,
    };
    let mut last: f64 = 0.0;
    for (g, pm) in grad.iter().zip(momenta) {
        last = last.max((g.eval_f64(&lookup)? - pm).abs());
    }
    if last <= 1e-10 {
        Ok(z)
    } else {
        Err(FieldError::NewtonFailed(last.min(residual)))
    }
}

/// `h = -H d^n x + p_i^mu dy^i ^ d^{n-1}x_mu` on `Z*`.
pub fn theta_h(hp: &HamiltonianProblem) -> Result<CoordForm, FieldError> {
    let space = hp.chart();
    let mut out = volume(&space, hp.n)?.scale(&hp.hamiltonian_poly().neg());
    for i in 1..=hp.m {
        let dy = CoordForm::dvar(&space, &VarName::Y(i))?;
        for mu in 1..=hp.n {
            let piece = wedge_c(&dy, &volume_minus(&space, hp.n, mu)?)?.scale(&Poly::var(VarName::P(i, mu)));
            out = out.try_add(&piece)?;
        }
    }
    Ok(out)
}

/// `Omega_h = dH ^ d^n x - dp_i^mu ^ dy^i ^ d^{n-1}x_mu`.
pub fn omega_h(hp: &HamiltonianProblem) -> Result<CoordForm, FieldError> {
    let space = hp.chart();
    let dh = CoordForm::function(&space, hp.hamiltonian_poly().clone()).d();
    let mut out = wedge_c(&dh, &volume(&space, hp.n)?)?;
    for i in 1..=hp.m {
        let dy = CoordForm::dvar(&space, &VarName::Y(i))?;
        for mu in 1..=hp.n {
            let dp = CoordForm::dvar(&space, &VarName::P(i, mu))?;
            let piece = wedge_c(&wedge_c(&dp, &dy)?, &volume_minus(&space, hp.n, mu)?)?;
            out = out.try_sub(&piece)?;
        }
    }
    Ok(out)
}

/// `y^i_mu - dH/dp_i^mu` (ordered `(i, mu)`), then
/// `sum_mu p_i^mu_mu + dH/dy^i`, on `J^1 Z*`.
pub fn hamilton_equations(hp: &HamiltonianProblem) -> EquationSet {
    let h = hp.hamiltonian_poly();
    let mut eqs = Vec::new();
    for i in 1..=hp.m {
        for mu in 1..=hp.n {
            eqs.push(Poly::var(VarName::YJet(i, mu)).sub(&h.diff(&VarName::P(i, mu))));
        }
    }
    for i in 1..=hp.m {
        eqs.push(super::trace(hp.n, i).add(&h.diff(&VarName::Y(i))));
    }
    EquationSet::new(eqs, JetSpace::ZStarJet)
}

/// Hamilton's equations with the jet coordinates replaced by the
/// coefficients of a connection on `Z*`.
pub fn hamilton_de_donder_residuals(hp: &HamiltonianProblem, conn: &Connection) -> Result<EquationSet, FieldError> {
    conn.check_shape(hp.n, hp.m)?;
    let Connection::OnZStar { y, p } = conn else {
        return Err(FieldError::ConnectionRole {
            expected: "Z*",
            found: conn.role(),
        });
    };
    let h = hp.hamiltonian_poly();
    let mut eqs = Vec::new();
    for i in 1..=hp.m {
        for mu in 1..=hp.n {
            eqs.push(y[i - 1][mu - 1].sub(&h.diff(&VarName::P(i, mu))));
        }
    }
    for i in 1..=hp.m {
        let tr = (1..=hp.n).fold(Poly::zero(), |acc, mu| acc.add(&p[i - 1][mu - 1][mu - 1]));
        eqs.push(tr.add(&h.diff(&VarName::Y(i))));
    }
    Ok(EquationSet::new(eqs, JetSpace::ZStar))
}

/// Components of `i_{h*} Omega_h - (n - 1) Omega_h` along `dy^i ^ d^n x`
/// and `dp_i^mu ^ d^n x`, plus whatever is left over (zero in theory).
pub fn beta_coefficients_from_forms(
    hp: &HamiltonianProblem,
    conn: &Connection,
) -> Result<(Vec<Poly>, Vec<Vec<Poly>>, CoordForm), FieldError> {
    conn.check_shape(hp.n, hp.m)?;
    let (n, m) = (hp.n, hp.m);
    let om = omega_h(hp)?;
    let w = conn
        .contract(&om, n, m)?
        .try_sub(&om.scale(&Poly::constant(Scalar::from_int(n as i64 - 1))))?;
    let space = om.space().clone();
    let vol = volume(&space, n)?;
    let with_vol = |v: VarName| {
        let mut vs = vec![v];
        vs.extend(super::x_vars(n));
        vs
    };
    let mut rest = w.clone();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 1..=m {
        let c = w.coefficient(&with_vol(VarName::Y(i)))?;
        rest = rest.try_sub(&wedge_c(&CoordForm::dvar(&space, &VarName::Y(i))?, &vol)?.scale(&c))?;
        a.push(c);
        let mut row = Vec::new();
        for mu in 1..=n {
            let c = w.coefficient(&with_vol(VarName::P(i, mu)))?;
            rest = rest.try_sub(&wedge_c(&CoordForm::dvar(&space, &VarName::P(i, mu))?, &vol)?.scale(&c))?;
            row.push(c);
        }
        b.push(row);
    }
    Ok((a, b, rest))
}
