use serde::Serialize;

use super::{LinearError, MultisymplecticSpace, Subspace};
use crate::exterior::{binomial, evaluate, increasing_tuples, pullback, wedge, Form, FormRecord, Vector};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// The canonical model `V x Lambda^k_r V*` with `V = Q^{base_dim}`.
///
/// Ambient coordinates are laid out as the `base_dim` coordinates of `V`
/// followed by one coordinate per element of `form_basis`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpace {
    pub base_dim: usize,
    pub k: usize,
    /// Horizontality order; 0 means the full `Lambda^k V*`.
    pub r: usize,
    /// Distinguished subspace `E ⊆ V` (zero when `r = 0`).
    pub horizontal: Subspace,
    /// Basis of the form slot, as `k`-forms on `V`.
    pub form_basis: Vec<Form>,
}

impl ModelSpace {
    pub fn dim(&self) -> usize {
        self.base_dim + self.form_basis.len()
    }

    /// The `V` factor, `V x {0}`.
    pub fn base_subspace(&self) -> Subspace {
        Subspace::coordinate(self.dim(), &(1..=self.base_dim).collect::<Vec<_>>())
    }

    /// The form slot `{0} x Lambda^k_r V*`.
    pub fn form_subspace(&self) -> Subspace {
        Subspace::coordinate(self.dim(), &(self.base_dim + 1..=self.dim()).collect::<Vec<_>>())
    }

    /// Splits an ambient vector into `(v, gamma)`.
    pub fn split(&self, x: &Vector) -> (Vector, Form) {
        let v = Vector(x.0[..self.base_dim].to_vec());
        let mut gamma = Form::zero(self.base_dim, self.k);
        for (c, b) in x.0[self.base_dim..].iter().zip(&self.form_basis) {
            gamma = &gamma + &b.scale(c);
        }
        (v, gamma)
    }

    /// Evaluation formula
    /// `Omega((v_1,g_1), ..., (v_{k+1},g_{k+1})) = sum_i (-1)^i g_i(v_1, ..^i.., v_{k+1})`,
    /// summed over all `k+1` slots.
    pub fn evaluate_canonical(&self, args: &[Vector]) -> Scalar {
        assert_eq!(args.len(), self.k + 1);
        let parts: Vec<(Vector, Form)> = args.iter().map(|a| self.split(a)).collect();
        let mut total = Scalar::zero();
        for i in 0..args.len() {
            let rest: Vec<Vector> = parts
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, p)| p.0.clone())
                .collect();
            let val = evaluate(&parts[i].1, &rest).expect("arity fixed by construction");
            // slots are 1-based in the formula: slot i+1 carries (-1)^{i+1}
            if i % 2 == 0 {
                total -= &val;
            } else {
                total += &val;
            }
        }
        total
    }
}

/// Number of `k`-forms on `Q^q` vanishing on `>= r` arguments from an
/// `e`-dimensional subspace (all forms when `r = 0`).
pub fn horizontal_form_count(q: usize, k: usize, r: usize, e: usize) -> usize {
    if r == 0 {
        return binomial(q, k);
    }
    (0..r.min(k + 1))
        .map(|j| binomial(e, j) * binomial(q.saturating_sub(e), k - j))
        .sum()
}

/// Basis of `Lambda^k_r V*` for `V = Q^n0` relative to `E`.
///
/// Computed as the kernel of the vanishing conditions on a basis of `V`
/// adapted to `E`; for coordinate subspaces `E` this returns basis monomials
/// in lexicographic order.
pub fn horizontal_form_basis(n0: usize, k: usize, r: usize, e: &Subspace) -> Vec<Form> {
    let monomials: Vec<Vec<usize>> = increasing_tuples(n0, k);
    let to_form = |coef: &[Scalar]| {
        Form::from_terms(
            n0,
            k,
            monomials
                .iter()
                .zip(coef)
                .filter(|(_, c)| !c.is_zero())
                .map(|(t, c)| (t.iter().map(|i| i + 1).collect(), c.clone())),
        )
        .expect("valid monomials")
    };
    if r == 0 {
        return (0..monomials.len())
            .map(|j| {
                let mut c = vec![Scalar::zero(); monomials.len()];
                c[j] = Scalar::one();
                to_form(&c)
            })
            .collect();
    }
    let mut adapted: Vec<Vector> = e.basis().to_vec();
    adapted.extend(e.complement_by_standard());
    let de = e.dim();
    let mono_forms: Vec<Form> = monomials
        .iter()
        .map(|t| Form::monomial(n0, &t.iter().map(|i| i + 1).collect::<Vec<_>>()).unwrap())
        .collect();
    let mut rows = Vec::new();
    for t in increasing_tuples(n0, k) {
        if t.iter().filter(|&&i| i < de).count() < r {
            continue;
        }
        let args: Vec<Vector> = t.iter().map(|&i| adapted[i].clone()).collect();
        rows.push(
            mono_forms
                .iter()
                .map(|m| evaluate(m, &args).unwrap())
                .collect::<Vec<_>>(),
        );
    }
    if rows.is_empty() {
        return horizontal_form_basis(n0, k, 0, e);
    }
    Matrix::from_rows(rows).nullspace().iter().map(|c| to_form(c)).collect()
}

/// Builds the model `(V x Lambda^k_r V*, Omega_V)` with `V = Q^n0`.
///
/// As a form, `Omega_V = -sum_j f*_j ^ gamma_j` where `gamma_j` runs over the
/// form-slot basis and `f*_j` is the matching coordinate.
pub fn model_space(
    n0: usize,
    k: usize,
    r: usize,
    e: Option<&Subspace>,
) -> Result<(ModelSpace, MultisymplecticSpace), LinearError> {
    if k < 1 || n0 < 1 {
        return Err(LinearError::InvalidModel(format!(
            "need n0 >= 1 and k >= 1 (got n0={n0}, k={k})"
        )));
    }
    // r = k + 1 is allowed and imposes no condition (needed for n = 1 field theories)
    if r > k + 1 {
        return Err(LinearError::InvalidModel(format!("r = {r} exceeds k + 1 = {}", k + 1)));
    }
    let horizontal = match (r, e) {
        (0, _) => Subspace::zero(n0),
        (_, None) => return Err(LinearError::InvalidModel("r > 0 requires E".into())),
        (_, Some(e)) if e.ambient() != n0 => {
            return Err(LinearError::AmbientMismatch {
                expected: n0,
                got: e.ambient(),
            })
        }
        (_, Some(e)) => e.clone(),
    };
    let form_basis = horizontal_form_basis(n0, k, r, &horizontal);
    let model = ModelSpace {
        base_dim: n0,
        k,
        r,
        horizontal,
        form_basis,
    };
    let n = model.dim();
    let mut proj_v = Matrix::zeros(n0, n);
    for i in 0..n0 {
        proj_v[(i, i)] = Scalar::one();
    }
    let mut omega = Form::zero(n, k + 1);
    for (j, gamma) in model.form_basis.iter().enumerate() {
        let fj = Form::monomial(n, &[n0 + j + 1])?;
        let lifted = pullback(&proj_v, gamma)?;
        omega = &omega - &wedge(&fj, &lifted)?;
    }
    let space = MultisymplecticSpace::new(omega)?;
    Ok((model, space))
}

/// JSON descriptor of a model space.
#[derive(Debug, Clone, Serialize)]
pub struct ModelRecord {
    pub base_dim: usize,
    pub k: usize,
    pub r: usize,
    pub dim: usize,
    pub horizontal: Vec<Vec<Scalar>>,
    pub form_basis: Vec<Vec<FormRecord>>,
}

impl From<&ModelSpace> for ModelRecord {
    fn from(m: &ModelSpace) -> Self {
        ModelRecord {
            base_dim: m.base_dim,
            k: m.k,
            r: m.r,
            dim: m.dim(),
            horizontal: m.horizontal.to_rows(),
            form_basis: m.form_basis.iter().map(Form::to_records).collect(),
        }
    }
}
