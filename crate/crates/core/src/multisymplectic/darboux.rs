//! Constructive linear Darboux theorem for multisymplectic spaces of type
//! `(k+1, r)`.
//!
//! Given a 1-isotropic `W` of the right dimension, the construction
//! 1. certifies that `iota: W -> Lambda^k_r (V/W)^*` is an isomorphism,
//! 2. grows a `k`-isotropic complement `V` of `W` one vector at a time,
//! 3. sets `psi(v + w) = (v, c (i_w Omega)|_V)` with `c` fixed by requiring
//!    `psi^* Omega_V = Omega`, and checks that identity exactly.

use serde::Serialize;

use super::model::{horizontal_form_count, model_space, ModelRecord, ModelSpace};
use super::{iota, is_one_isotropic, perp, LinearError, MultisymplecticSpace, Subspace};
use crate::exterior::{evaluate, increasing_tuples, interior, interior_iterated, pullback, wedge, Form, Vector};
use crate::linalg::{LinearMap, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct DarbouxResult {
    /// The given 1-isotropic subspace.
    pub w: Subspace,
    /// The constructed `k`-lagrangian complement.
    pub v: Subspace,
    /// `psi: Q^N -> V x Lambda^k_r V*`, in model coordinates.
    pub psi: LinearMap,
    pub model: ModelSpace,
    /// `{e_1..e_q}` (a basis of `v`) followed by `{f_j}` (a basis of `w`)
    /// with `i_{f_j} Omega = gamma_j(e*)`.
    pub darboux_basis: Vec<Vector>,
    /// Normalization in `phi(w) = c (i_w Omega)|_V`.
    pub normalization: Scalar,
}

impl DarbouxResult {
    pub fn e_vectors(&self) -> &[Vector] {
        &self.darboux_basis[..self.model.base_dim]
    }

    pub fn f_vectors(&self) -> &[Vector] {
        &self.darboux_basis[self.model.base_dim..]
    }

    /// Rows are the dual basis covectors of `darboux_basis`.
    pub fn dual_basis(&self) -> Matrix {
        let n = self.psi.cols();
        let cols: Vec<Vec<Scalar>> = self.darboux_basis.iter().map(|v| v.0.clone()).collect();
        Matrix::from_columns(n, &cols)
            .inverse()
            .expect("darboux basis is a basis")
    }

    /// Map `x -> (e*_1(x), ..., e*_q(x))`.
    fn e_coordinates(&self) -> Matrix {
        let dual = self.dual_basis();
        Matrix::from_rows(dual.to_rows().into_iter().take(self.model.base_dim).collect())
    }

    /// `gamma_j` written in the dual basis `e*`, as a form on the ambient space.
    pub fn lifted_form_basis(&self) -> Vec<Form> {
        let ecoord = self.e_coordinates();
        self.model
            .form_basis
            .iter()
            .map(|g| pullback(&ecoord, g).expect("dimensions fixed by construction"))
            .collect()
    }

    /// Checks `i_{f_j} Omega = gamma_j(e*)` for every form-slot basis element.
    pub fn relations_hold(&self, s: &MultisymplecticSpace) -> bool {
        self.f_vectors()
            .iter()
            .zip(self.lifted_form_basis())
            .all(|(f, g)| interior(f, s.omega()).map(|i| i == g).unwrap_or(false))
    }

    /// Exact check of `psi^* Omega_V = Omega`.
    pub fn pullback_identity_holds(&self, s: &MultisymplecticSpace) -> bool {
        let Ok((_, ms)) = model_space(
            self.model.base_dim,
            self.model.k,
            self.model.r,
            Some(&self.model.horizontal),
        ) else {
            return false;
        };
        pullback(&self.psi, ms.omega())
            .map(|p| &p == s.omega())
            .unwrap_or(false)
    }
}

/// JSON view of a [`DarbouxResult`].
#[derive(Debug, Clone, Serialize)]
pub struct DarbouxRecord {
    pub psi: Vec<Vec<Scalar>>,
    pub darboux_basis: Vec<Vec<Scalar>>,
    pub v: Vec<Vec<Scalar>>,
    pub w: Vec<Vec<Scalar>>,
    pub normalization: Scalar,
    pub model: ModelRecord,
}

impl From<&DarbouxResult> for DarbouxRecord {
    fn from(d: &DarbouxResult) -> Self {
        DarbouxRecord {
            psi: d.psi.to_rows(),
            darboux_basis: d.darboux_basis.iter().map(|v| v.0.clone()).collect(),
            v: d.v.to_rows(),
            w: d.w.to_rows(),
            normalization: d.normalization.clone(),
            model: ModelRecord::from(&d.model),
        }
    }
}

/// Darboux construction for type `(k+1, 0)`.
pub fn darboux(s: &MultisymplecticSpace, w: &Subspace) -> Result<DarbouxResult, LinearError> {
    let io = iota(s, w)?;
    let q = io.quotient_dim();
    let k = s.k();
    if q <= k {
        return Err(LinearError::CodimensionTooSmall { quotient: q, k });
    }
    let expected = horizontal_form_count(q, k, 0, 0);
    if w.dim() != expected {
        return Err(LinearError::DimensionCondition {
            dim_w: w.dim(),
            expected,
        });
    }
    if !io.is_isomorphism() {
        return Err(LinearError::IotaNotIsomorphism);
    }
    build(s, w, 0, None)
}

/// Darboux construction for type `(k+1, r)`.
///
/// `e` is any subspace of the ambient space whose image in `V/W` is the
/// distinguished subspace `E`.
pub fn darboux_horizontal(
    s: &MultisymplecticSpace,
    w: &Subspace,
    e: &Subspace,
    r: usize,
) -> Result<DarbouxResult, LinearError> {
    let k = s.k();
    if r < 1 || r > k + 1 {
        return Err(LinearError::OrderOutOfRange { l: r, k: k + 1 });
    }
    if e.ambient() != s.dim() {
        return Err(LinearError::AmbientMismatch {
            expected: s.dim(),
            got: e.ambient(),
        });
    }
    if !is_one_isotropic(s, w)? {
        return Err(LinearError::NotOneIsotropic);
    }
    let lifted = e.sum(w);
    // iota(W) must be r-horizontal: i_{w ^ v_1 ^ ... ^ v_r} Omega = 0 with v_i over E + W
    if r < s.degree() {
        for wv in w.basis() {
            let iw = interior(wv, s.omega())?;
            for t in increasing_tuples(lifted.dim(), r) {
                let vs: Vec<Vector> = t.iter().map(|&i| lifted.basis()[i].clone()).collect();
                if !interior_iterated(&vs, &iw)?.is_zero() {
                    return Err(LinearError::HorizontalCondition { r });
                }
            }
        }
    }
    let q = s.dim() - w.dim();
    if q <= k {
        return Err(LinearError::CodimensionTooSmall { quotient: q, k });
    }
    let expected = horizontal_form_count(q, k, r, lifted.dim() - w.dim());
    if w.dim() != expected {
        return Err(LinearError::DimensionCondition {
            dim_w: w.dim(),
            expected,
        });
    }
    // injectivity of iota; its image is horizontal by the condition above
    if iota(s, w)?.matrix.rank() != w.dim() {
        return Err(LinearError::IotaNotIsomorphism);
    }
    build(s, w, r, Some(&lifted))
}

/// Grows a `k`-isotropic subspace transversal to `W` until it complements `W`.
///
/// Each step takes the first reduced-echelon basis vector of `U^{perp,k}`
/// that is independent of `U + W`. Such a vector always exists while
/// `dim U < dim V/W`: `U^{perp,k}` has codimension at most `C(dim U, k)` and
/// meets `U + W` in dimension `dim U + dim W - C(dim U, k)`.
fn lagrangian_complement(s: &MultisymplecticSpace, w: &Subspace) -> Result<Subspace, LinearError> {
    let n = s.dim();
    let first = (1..=n)
        .map(|i| Vector::basis(n, i))
        .find(|e| !w.contains_vector(e))
        .ok_or_else(|| LinearError::Internal("W is the whole space".into()))?;
    let mut u = Subspace::span(n, &[first]);
    while u.dim() + w.dim() < n {
        let p = perp(s, &u, s.k())?;
        let uw = u.sum(w);
        let next = p
            .echelon()
            .to_rows()
            .into_iter()
            .map(Vector)
            .find(|v| !uw.contains_vector(v))
            .ok_or_else(|| LinearError::Internal("no isotropic extension found".into()))?;
        let mut basis = u.basis().to_vec();
        basis.push(next);
        u = Subspace::new(n, basis).ok_or_else(|| LinearError::Internal("dependent extension".into()))?;
    }
    Ok(u)
}

fn build(
    s: &MultisymplecticSpace,
    w: &Subspace,
    r: usize,
    lifted_e: Option<&Subspace>,
) -> Result<DarbouxResult, LinearError> {
    let n = s.dim();
    let k = s.k();
    let v = lagrangian_complement(s, w)?;
    let q = v.dim();

    // coordinates (a, b) of x = sum a_i e_i + sum b_j w_j
    let mut cols: Vec<Vec<Scalar>> = v.basis().iter().map(|x| x.0.clone()).collect();
    cols.extend(w.basis().iter().map(|x| x.0.clone()));
    let adapted = Matrix::from_columns(n, &cols);
    let to_adapted = adapted
        .inverse()
        .ok_or_else(|| LinearError::Internal("V + W is not the whole space".into()))?;

    // E projected to V along W, in e-coordinates
    let e_in_v = match lifted_e {
        None => Subspace::zero(q),
        Some(le) => {
            let vs: Vec<Vector> = le
                .basis()
                .iter()
                .map(|x| Vector(to_adapted.apply(&x.0)[..q].to_vec()))
                .collect();
            Subspace::span(q, &vs)
        }
    };
    let (model, model_omega) = model_space(q, k, r, Some(&e_in_v))?;
    if model.form_basis.len() != w.dim() {
        return Err(LinearError::Internal("form slot and W differ in dimension".into()));
    }

    // unnormalized phi(w_j) = (i_{w_j} Omega)|_V expressed in the model's form basis
    let tuples = increasing_tuples(q, k);
    let basis_coeffs: Vec<Vec<Scalar>> = model
        .form_basis
        .iter()
        .map(|g| {
            tuples
                .iter()
                .map(|t| g.coefficient(&t.iter().map(|i| i + 1).collect::<Vec<_>>()))
                .collect()
        })
        .collect();
    let basis_matrix = Matrix::from_columns(tuples.len(), &basis_coeffs);
    let mut phi = Matrix::zeros(w.dim(), w.dim());
    for (j, wj) in w.basis().iter().enumerate() {
        let iw = interior(wj, s.omega())?;
        let restricted: Vec<Scalar> = tuples
            .iter()
            .map(|t| {
                let args: Vec<Vector> = t.iter().map(|&i| v.basis()[i].clone()).collect();
                evaluate(&iw, &args)
            })
            .collect::<Result<_, _>>()?;
        let coords = basis_matrix
            .solve(&restricted)
            .ok_or_else(|| LinearError::Internal("restricted contraction is not horizontal".into()))?;
        for (i, c) in coords.into_iter().enumerate() {
            phi[(i, j)] = c;
        }
    }
    let block = Matrix::identity(q).direct_sum(&phi);
    let psi_raw = &block * &to_adapted;

    // psi_c^* Omega_V = c psi_1^* Omega_V; fix c on one nonzero coefficient
    let raw_pull = pullback(&psi_raw, model_omega.omega())?;
    let (probe, raw_c) = raw_pull
        .terms()
        .next()
        .ok_or_else(|| LinearError::Internal("pulled-back model form vanishes".into()))?;
    let target = s.omega().coeff0(probe.as_slice()).cloned().unwrap_or_else(Scalar::zero);
    let c = &target / raw_c;
    if c.is_zero() {
        return Err(LinearError::Internal("normalization vanished".into()));
    }
    let psi = Matrix::identity(q).direct_sum(&Matrix::identity(w.dim()).scale(&c));
    let psi = &psi * &psi_raw;
    if &pullback(&psi, model_omega.omega())? != s.omega() {
        return Err(LinearError::Internal("psi^* Omega_V != Omega".into()));
    }

    let psi_inv = psi
        .inverse()
        .ok_or_else(|| LinearError::Internal("psi is singular".into()))?;
    let mut darboux_basis: Vec<Vector> = v.basis().to_vec();
    for j in 0..w.dim() {
        // f_j = psi^{-1}(0, -gamma_j) so that i_{f_j} Omega = +gamma_j
        darboux_basis.push(Vector(psi_inv.column(q + j)).scale(&Scalar::from_int(-1)));
    }

    let result = DarbouxResult {
        w: w.clone(),
        v,
        psi,
        model,
        darboux_basis,
        normalization: c,
    };
    if !result.relations_hold(s) {
        return Err(LinearError::Internal("darboux relations fail".into()));
    }
    Ok(result)
}

/// `Omega = sum_j f*_j ^ gamma_j(e*)` in the dual Darboux basis.
#[derive(Debug, Clone)]
pub struct DarbouxExpansion {
    /// `(f*_j, gamma_j(e*))` pairs.
    pub terms: Vec<(Form, Form)>,
    pub reconstructed: Form,
    pub matches: bool,
}

pub fn darboux_expansion(d: &DarbouxResult, s: &MultisymplecticSpace) -> DarbouxExpansion {
    let dual = d.dual_basis();
    let n = dual.cols();
    let q = d.model.base_dim;
    let mut terms = Vec::new();
    let mut total = Form::zero(n, s.degree());
    for (j, g) in d.lifted_form_basis().into_iter().enumerate() {
        let fstar = Form::from_terms(
            n,
            1,
            dual.row(q + j)
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (vec![i + 1], c.clone())),
        )
        .expect("valid 1-form");
        let t = wedge(&fstar, &g).expect("same ambient");
        total = &total + &t;
        terms.push((fstar, g));
    }
    DarbouxExpansion {
        terms,
        matches: &total == s.omega(),
        reconstructed: total,
    }
}
