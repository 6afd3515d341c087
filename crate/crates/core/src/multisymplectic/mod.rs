//! Multisymplectic vector spaces over `Q`.
//!
//! A `(k+1)`-form is multisymplectic when `v -> i_v Omega` is injective.
//! This module computes `l`-orthogonal complements, classifies subspaces,
//! builds the canonical model spaces `V x Lambda^k_r V*`, and constructs
//! Darboux bases for spaces of type `(k+1, r)`.

mod darboux;
mod model;
mod subspace;

pub use darboux::{darboux, darboux_expansion, darboux_horizontal, DarbouxExpansion, DarbouxRecord, DarbouxResult};
pub use model::{horizontal_form_basis, horizontal_form_count, model_space, ModelRecord, ModelSpace};
pub use subspace::{Subspace, SubspaceRecord};

use serde::Serialize;

use crate::exterior::{increasing_tuples, interior, interior_iterated, pullback, ExteriorError, Form, Vector};
use crate::linalg::{LinearMap, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinearError {
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error("form is degenerate")]
    Degenerate,
    #[error("form has degree 0")]
    DegreeZero,
    #[error("l = {l} outside 1..={k}")]
    OrderOutOfRange { l: usize, k: usize },
    #[error("subspace lives in Q^{got}, expected Q^{expected}")]
    AmbientMismatch { expected: usize, got: usize },
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("linear map is singular or has the wrong shape")]
    SingularMap,
    #[error("subspace is not 1-isotropic")]
    NotOneIsotropic,
    #[error("dim W = {dim_w} but the quotient form space has dimension {expected}")]
    DimensionCondition { dim_w: usize, expected: usize },
    #[error("dim(V/W) = {quotient} is not greater than k = {k}")]
    CodimensionTooSmall { quotient: usize, k: usize },
    #[error("contraction with the distinguished subspace does not vanish in order {r}")]
    HorizontalCondition { r: usize },
    #[error("iota is not an isomorphism onto the quotient form space")]
    IotaNotIsomorphism,
    #[error("invalid model parameters: {0}")]
    InvalidModel(String),
    #[error("internal error: {0}")]
    Internal(String),
}

/// `(Q^dim, omega)` with `omega` nondegenerate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultisymplecticSpace {
    omega: Form,
}

impl MultisymplecticSpace {
    pub fn new(omega: Form) -> Result<Self, LinearError> {
        if omega.degree() == 0 {
            return Err(LinearError::DegreeZero);
        }
        if !is_nondegenerate(&omega) {
            return Err(LinearError::Degenerate);
        }
        Ok(MultisymplecticSpace { omega })
    }

    pub fn dim(&self) -> usize {
        self.omega.dim()
    }

    /// Degree of the form, `k + 1`.
    pub fn degree(&self) -> usize {
        self.omega.degree()
    }

    /// `k`, the order used for lagrangian subspaces.
    pub fn k(&self) -> usize {
        self.omega.degree() - 1
    }

    pub fn omega(&self) -> &Form {
        &self.omega
    }

    fn check_ambient(&self, w: &Subspace) -> Result<(), LinearError> {
        if w.ambient() != self.dim() {
            return Err(LinearError::AmbientMismatch {
                expected: self.dim(),
                got: w.ambient(),
            });
        }
        Ok(())
    }
}

/// Matrix of `v -> coefficients of i_v form`, one row per `(deg-1)`-tuple.
fn contraction_matrix(form: &Form) -> Matrix {
    let n = form.dim();
    let rows = increasing_tuples(n, form.degree() - 1);
    let mut m = Matrix::zeros(rows.len(), n);
    let row_of: std::collections::HashMap<Vec<usize>, usize> =
        rows.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
    for (key, c) in form.terms() {
        for (pos, &a) in key.as_slice().iter().enumerate() {
            let mut rest = key.as_slice().to_vec();
            rest.remove(pos);
            let r = row_of[&rest];
            let v = if pos % 2 == 1 { -c } else { c.clone() };
            m[(r, a)] += &v;
        }
    }
    m
}

/// True iff `v -> i_v omega` has trivial kernel.
pub fn is_nondegenerate(omega: &Form) -> bool {
    if omega.degree() == 0 {
        return false;
    }
    contraction_matrix(omega).rank() == omega.dim()
}

/// `W^{perp,l} = { v | i_{v ^ w1 ^ ... ^ wl} omega = 0 for all w_i in W }`.
pub fn perp(s: &MultisymplecticSpace, w: &Subspace, l: usize) -> Result<Subspace, LinearError> {
    let k = s.k();
    if l < 1 || l > k {
        return Err(LinearError::OrderOutOfRange { l, k });
    }
    s.check_ambient(w)?;
    let n = s.dim();
    let mut constraint_rows: Vec<Vec<Scalar>> = Vec::new();
    for tuple in increasing_tuples(w.dim(), l) {
        let ws: Vec<Vector> = tuple.iter().map(|&i| w.basis()[i].clone()).collect();
        // omega(w_1, ..., w_l, v, ...) differs from omega(v, w_1, ...) by a sign only
        let g = interior_iterated(&ws, s.omega())?;
        if g.is_zero() {
            continue;
        }
        let m = contraction_matrix(&g);
        constraint_rows.extend(m.to_rows().into_iter().filter(|r| r.iter().any(|x| !x.is_zero())));
    }
    if constraint_rows.is_empty() {
        return Ok(Subspace::full(n));
    }
    let ns = Matrix::from_rows(constraint_rows).nullspace();
    Ok(Subspace::span(n, &ns.into_iter().map(Vector).collect::<Vec<_>>()))
}

/// Flags of a subspace relative to its `l`-orthogonal complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub isotropic: bool,
    pub coisotropic: bool,
    pub lagrangian: bool,
    /// `W ∩ W^{perp,k} = {0}`; always computed with `l = k`.
    pub multisymplectic: bool,
}

pub fn classify(s: &MultisymplecticSpace, w: &Subspace, l: usize) -> Result<Classification, LinearError> {
    let p = perp(s, w, l)?;
    let isotropic = p.contains(w);
    let coisotropic = w.contains(&p);
    let pk = if l == s.k() { p } else { perp(s, w, s.k())? };
    Ok(Classification {
        isotropic,
        coisotropic,
        lagrangian: isotropic && coisotropic,
        multisymplectic: w.intersection(&pk).dim() == 0,
    })
}

/// `(V1 x V2, pi1^* omega1 - pi2^* omega2)`.
pub fn product_minus(
    s1: &MultisymplecticSpace,
    s2: &MultisymplecticSpace,
) -> Result<MultisymplecticSpace, LinearError> {
    if s1.degree() != s2.degree() {
        return Err(LinearError::DegreeMismatch(s1.degree(), s2.degree()));
    }
    let (n1, n2) = (s1.dim(), s2.dim());
    let mut p1 = Matrix::zeros(n1, n1 + n2);
    let mut p2 = Matrix::zeros(n2, n1 + n2);
    for i in 0..n1 {
        p1[(i, i)] = Scalar::one();
    }
    for i in 0..n2 {
        p2[(i, n1 + i)] = Scalar::one();
    }
    let omega = &pullback(&p1, s1.omega())? - &pullback(&p2, s2.omega())?;
    MultisymplecticSpace::new(omega)
}

/// `{(x, phi x)}` inside `Q^{cols} x Q^{rows}`.
pub fn graph(phi: &LinearMap) -> Subspace {
    let (n1, n2) = (phi.cols(), phi.rows());
    let vs: Vec<Vector> = (0..n1)
        .map(|j| {
            let mut v = vec![Scalar::zero(); n1 + n2];
            v[j] = Scalar::one();
            for (i, x) in phi.column(j).into_iter().enumerate() {
                v[n1 + i] = x;
            }
            Vector(v)
        })
        .collect();
    Subspace::span(n1 + n2, &vs)
}

fn check_iso(s1: &MultisymplecticSpace, s2: &MultisymplecticSpace, phi: &LinearMap) -> Result<(), LinearError> {
    if phi.cols() != s1.dim() || phi.rows() != s2.dim() || phi.inverse().is_none() {
        return Err(LinearError::SingularMap);
    }
    Ok(())
}

/// Whether the graph of `phi` is `k`-lagrangian in `S1 ⊖ S2`.
pub fn graph_is_multisymplectomorphism(
    s1: &MultisymplecticSpace,
    s2: &MultisymplecticSpace,
    phi: &LinearMap,
) -> Result<bool, LinearError> {
    check_iso(s1, s2, phi)?;
    let prod = product_minus(s1, s2)?;
    Ok(classify(&prod, &graph(phi), prod.k())?.lagrangian)
}

/// Direct check `phi^* omega2 == omega1`.
pub fn preserves_form(
    s1: &MultisymplecticSpace,
    s2: &MultisymplecticSpace,
    phi: &LinearMap,
) -> Result<bool, LinearError> {
    check_iso(s1, s2, phi)?;
    Ok(&pullback(phi, s2.omega())? == s1.omega())
}

/// Checks `i_{w ^ w'} omega = 0` over pairs of basis vectors of `W`.
pub fn is_one_isotropic(s: &MultisymplecticSpace, w: &Subspace) -> Result<bool, LinearError> {
    s.check_ambient(w)?;
    let b = w.basis();
    for i in 0..b.len() {
        let iw = interior(&b[i], s.omega())?;
        for bj in &b[i + 1..] {
            if !interior(bj, &iw)?.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The map `iota: W -> Lambda^k (V/W)^*`, `w -> [i_w omega]`.
#[derive(Debug, Clone)]
pub struct Iota {
    /// Standard basis vectors whose classes form the chosen quotient basis.
    pub quotient_basis: Vec<Vector>,
    /// Column `j` holds the coefficients of `iota(w_j)` on increasing
    /// `k`-tuples of the quotient basis (lexicographic).
    pub matrix: LinearMap,
}

impl Iota {
    pub fn is_isomorphism(&self) -> bool {
        self.matrix.is_square() && self.matrix.rank() == self.matrix.cols()
    }

    pub fn quotient_dim(&self) -> usize {
        self.quotient_basis.len()
    }
}

/// Well-definedness requires `W` to be 1-isotropic.
pub fn iota(s: &MultisymplecticSpace, w: &Subspace) -> Result<Iota, LinearError> {
    if !is_one_isotropic(s, w)? {
        return Err(LinearError::NotOneIsotropic);
    }
    let quotient_basis = w.complement_by_standard();
    let tuples = increasing_tuples(quotient_basis.len(), s.k());
    let mut m = Matrix::zeros(tuples.len(), w.dim());
    for (j, wj) in w.basis().iter().enumerate() {
        let iw = interior(wj, s.omega())?;
        for (r, t) in tuples.iter().enumerate() {
            let args: Vec<Vector> = t.iter().map(|&i| quotient_basis[i].clone()).collect();
            m[(r, j)] = crate::exterior::evaluate(&iw, &args)?;
        }
    }
    Ok(Iota {
        quotient_basis,
        matrix: m,
    })
}
