//! Differential forms with symbolic coefficients on a coordinate chart.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::exterior::Form;
use crate::scalar::Scalar;
use crate::symbolic::{Atom, Poly, SymbolicError, VarName};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormsError {
    #[error("coordinate `{0}` listed twice")]
    DuplicateCoordinate(VarName),
    #[error("`{0}` is not a coordinate of this space")]
    NotACoordinate(VarName),
    #[error("forms live on different coordinate spaces")]
    SpaceMismatch,
    #[error("cannot add forms of degrees {0} and {1}")]
    DegreeMismatch(usize, usize),
    #[error("interior product of a function")]
    DegreeZero,
    #[error("homotopy operator needs polynomial coefficients; got `{0}`")]
    NotPolynomial(String),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

/// Ordered coordinate names of a chart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordSpace {
    coords: Vec<VarName>,
    index: HashMap<VarName, usize>,
}

impl CoordSpace {
    pub fn new(coords: Vec<VarName>) -> Result<Arc<Self>, FormsError> {
        let mut index = HashMap::new();
        for (i, c) in coords.iter().enumerate() {
            if index.insert(c.clone(), i).is_some() {
                return Err(FormsError::DuplicateCoordinate(c.clone()));
            }
        }
        Ok(Arc::new(CoordSpace { coords, index }))
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[VarName] {
        &self.coords
    }

    pub fn position(&self, v: &VarName) -> Option<usize> {
        self.index.get(v).copied()
    }

    fn require(&self, v: &VarName) -> Result<usize, FormsError> {
        self.position(v).ok_or_else(|| FormsError::NotACoordinate(v.clone()))
    }
}

/// `sum_I c_I dv_{i1} ^ ... ^ dv_{ik}` with increasing `I` (positions in the
/// space) and canonical coefficients.
#[derive(Debug, Clone)]
pub struct CoordForm {
    space: Arc<CoordSpace>,
    degree: usize,
    terms: BTreeMap<Vec<usize>, Poly>,
}

impl PartialEq for CoordForm {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.terms == other.terms && *self.space == *other.space
    }
}

/// Sorts `idx` in place; `None` on repeated entries, else the parity of the
/// permutation (true = odd).
fn sort_sign(idx: &mut [usize]) -> Option<bool> {
    let mut odd = false;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            odd = !odd;
            j -= 1;
        }
        if j > 0 && idx[j - 1] == idx[j] {
            return None;
        }
    }
    Some(odd)
}

impl CoordForm {
    pub fn zero(space: &Arc<CoordSpace>, degree: usize) -> Self {
        CoordForm {
            space: space.clone(),
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn function(space: &Arc<CoordSpace>, f: Poly) -> Self {
        let mut w = CoordForm::zero(space, 0);
        w.add_term(Vec::new(), f);
        w
    }

    /// `c dv_1 ^ ... ^ dv_k` in the given order.
    pub fn monomial(space: &Arc<CoordSpace>, c: Poly, vs: &[VarName]) -> Result<Self, FormsError> {
        let idx = vs.iter().map(|v| space.require(v)).collect::<Result<Vec<_>, _>>()?;
        let mut w = CoordForm::zero(space, vs.len());
        w.add_term(idx, c);
        Ok(w)
    }

    /// `dv`.
    pub fn dvar(space: &Arc<CoordSpace>, v: &VarName) -> Result<Self, FormsError> {
        CoordForm::monomial(space, Poly::one(), std::slice::from_ref(v))
    }

    fn add_term(&mut self, mut idx: Vec<usize>, c: Poly) {
        if c.is_zero() {
            return;
        }
        let Some(odd) = sort_sign(&mut idx) else { return };
        let c = if odd { c.neg() } else { c };
        let entry = self.terms.entry(idx.clone()).or_insert_with(Poly::zero);
        *entry = entry.add(&c);
        if entry.is_zero() {
            self.terms.remove(&idx);
        }
    }

    pub fn space(&self) -> &Arc<CoordSpace> {
        &self.space
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms as `(coordinates, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<&VarName>, &Poly)> {
        self.terms
            .iter()
            .map(|(k, c)| (k.iter().map(|&i| &self.space.coords[i]).collect(), c))
    }

    /// Coefficient of `dv_1 ^ ... ^ dv_k` (any order, sign adjusted).
    pub fn coefficient(&self, vs: &[VarName]) -> Result<Poly, FormsError> {
        let mut idx = vs
            .iter()
            .map(|v| self.space.require(v))
            .collect::<Result<Vec<_>, _>>()?;
        if idx.len() != self.degree {
            return Ok(Poly::zero());
        }
        let Some(odd) = sort_sign(&mut idx) else {
            return Ok(Poly::zero());
        };
        let c = self.terms.get(&idx).cloned().unwrap_or_default();
        Ok(if odd { c.neg() } else { c })
    }

    fn same_space(&self, other: &CoordForm) -> Result<(), FormsError> {
        if Arc::ptr_eq(&self.space, &other.space) || *self.space == *other.space {
            Ok(())
        } else {
            Err(FormsError::SpaceMismatch)
        }
    }

    pub fn try_add(&self, other: &CoordForm) -> Result<CoordForm, FormsError> {
        self.same_space(other)?;
        if self.is_zero() && self.degree != other.degree {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.degree != other.degree {
            return Err(FormsError::DegreeMismatch(self.degree, other.degree));
        }
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &CoordForm) -> Result<CoordForm, FormsError> {
        self.try_add(&other.neg())
    }

    pub fn neg(&self) -> CoordForm {
        self.scale(&Poly::int(-1))
    }

    pub fn scale(&self, f: &Poly) -> CoordForm {
        let mut out = CoordForm::zero(&self.space, self.degree);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c.mul(f));
        }
        out
    }

    pub fn map_coefficients(&self, f: impl Fn(&Poly) -> Poly) -> CoordForm {
        let mut out = CoordForm::zero(&self.space, self.degree);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), f(c));
        }
        out
    }

    pub fn substitute(&self, bindings: &BTreeMap<VarName, Poly>) -> CoordForm {
        self.map_coefficients(|c| c.substitute_map(bindings))
    }

    /// Exterior derivative; symbols that are not coordinates of the space
    /// (parameters) are constants.
    pub fn d(&self) -> CoordForm {
        let mut out = CoordForm::zero(&self.space, self.degree + 1);
        for (k, c) in &self.terms {
            for (j, v) in self.space.coords.iter().enumerate() {
                if k.contains(&j) || !c.contains(v) {
                    continue;
                }
                let mut idx = Vec::with_capacity(k.len() + 1);
                idx.push(j);
                idx.extend_from_slice(k);
                out.add_term(idx, c.diff(v));
            }
        }
        out
    }

    /// Interior product with the field `sum_v f_v d/dv`.
    pub fn interior_field(&self, field: &[(VarName, Poly)]) -> Result<CoordForm, FormsError> {
        if self.degree == 0 {
            return Err(FormsError::DegreeZero);
        }
        let mut out = CoordForm::zero(&self.space, self.degree - 1);
        for (v, f) in field {
            let j = self.space.require(v)?;
            if f.is_zero() {
                continue;
            }
            for (k, c) in &self.terms {
                if let Some(pos) = k.iter().position(|&i| i == j) {
                    let mut rest = k.clone();
                    rest.remove(pos);
                    let t = c.mul(f);
                    out.add_term(rest, if pos % 2 == 1 { t.neg() } else { t });
                }
            }
        }
        Ok(out)
    }

    /// Constant-coefficient form on `Q^dim`, if every coefficient is constant.
    pub fn to_constant_form(&self) -> Option<Form> {
        let terms = self
            .terms
            .iter()
            .map(|(k, c)| {
                c.as_constant()
                    .map(|c| (k.iter().map(|i| i + 1).collect::<Vec<_>>(), c))
            })
            .collect::<Option<Vec<_>>>()?;
        Form::from_terms(self.space.dim(), self.degree, terms).ok()
    }

    /// Coefficients evaluated exactly at a point.
    pub fn at_point(&self, f: &dyn Fn(&VarName) -> Option<Scalar>) -> Result<Form, FormsError> {
        let mut terms = Vec::new();
        for (k, c) in &self.terms {
            terms.push((k.iter().map(|i| i + 1).collect::<Vec<_>>(), c.eval_exact(f)?));
        }
        Ok(Form::from_terms(self.space.dim(), self.degree, terms).expect("valid keys"))
    }

    /// Pullback along `target coordinate -> expression in the coordinates
    /// of `source``. Target coordinates without an entry are mapped to
    /// themselves (they must then be coordinates of `source`).
    pub fn pullback(&self, source: &Arc<CoordSpace>, map: &BTreeMap<VarName, Poly>) -> Result<CoordForm, FormsError> {
        let images: Vec<Poly> = self
            .space
            .coords
            .iter()
            .map(|v| map.get(v).cloned().unwrap_or_else(|| Poly::var(v.clone())))
            .collect();
        let mut differentials: Vec<Option<CoordForm>> = vec![None; images.len()];
        let mut out = CoordForm::zero(source, self.degree);
        for (k, c) in &self.terms {
            let mut acc = CoordForm::function(source, c.substitute_map(map));
            for &i in k {
                if differentials[i].is_none() {
                    differentials[i] = Some(CoordForm::function(source, images[i].clone()).d());
                }
                acc = wedge_c(&acc, differentials[i].as_ref().unwrap())?;
            }
            out = out.try_add(&acc)?;
        }
        Ok(out)
    }

    /// Degree-0 value at the origin of the chart (zero for positive degree).
    pub fn at_origin(&self) -> CoordForm {
        if self.degree > 0 {
            return CoordForm::zero(&self.space, self.degree);
        }
        let zero: BTreeMap<VarName, Poly> = self.space.coords.iter().map(|v| (v.clone(), Poly::zero())).collect();
        self.substitute(&zero)
    }

    /// Text rendering `coeff * dv1^dv2 + ...`.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for CoordForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (k, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            let coeff = c.to_expr().to_string();
            if k.is_empty() {
                write!(f, "{coeff}")?;
                continue;
            }
            let basis: Vec<String> = k.iter().map(|&i| format!("d{}", self.space.coords[i])).collect();
            match coeff.as_str() {
                "1" => write!(f, "{}", basis.join("^"))?,
                _ if c.num_terms() > 1 => write!(f, "({coeff}) * {}", basis.join("^"))?,
                _ => write!(f, "{coeff} * {}", basis.join("^"))?,
            }
        }
        Ok(())
    }
}

/// JSON mirror of a [`CoordForm`].
#[derive(Debug, Clone, Serialize)]
pub struct CoordFormRecord {
    pub space: Vec<String>,
    pub degree: usize,
    pub terms: Vec<CoordTermRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoordTermRecord {
    pub coords: Vec<String>,
    pub coeff: String,
}

impl From<&CoordForm> for CoordFormRecord {
    fn from(w: &CoordForm) -> Self {
        CoordFormRecord {
            space: w.space.coords.iter().map(|v| v.to_string()).collect(),
            degree: w.degree,
            terms: w
                .terms
                .iter()
                .map(|(k, c)| CoordTermRecord {
                    coords: k.iter().map(|&i| w.space.coords[i].to_string()).collect(),
                    coeff: c.to_expr().to_string(),
                })
                .collect(),
        }
    }
}

pub fn wedge_c(a: &CoordForm, b: &CoordForm) -> Result<CoordForm, FormsError> {
    a.same_space(b)?;
    let mut out = CoordForm::zero(&a.space, a.degree + b.degree);
    for (ka, ca) in &a.terms {
        for (kb, cb) in &b.terms {
            let mut idx = ka.clone();
            idx.extend_from_slice(kb);
            out.add_term(idx, ca.mul(cb));
        }
    }
    Ok(out)
}

/// Interior product with the coordinate field `d/d direction`.
pub fn interior_c(direction: &VarName, w: &CoordForm) -> Result<CoordForm, FormsError> {
    w.interior_field(&[(direction.clone(), Poly::one())])
}

/// Radial homotopy operator of the Poincaré lemma on a star-shaped chart
/// centred at the origin:
/// `(I w)_x = int_0^1 t^(k-1) i_x w(t x) dt`.
///
/// On `a x^alpha dx_I` (coordinate degree `p`) this is
/// `a x^alpha / (k + p) * sum_j (-1)^(j-1) x_{i_j} dx_{I \ i_j}`, and
/// `I d + d I = id - ev_0`.
pub fn homotopy_operator(w: &CoordForm) -> Result<CoordForm, FormsError> {
    if w.degree == 0 {
        return Ok(CoordForm::zero(&w.space, 0));
    }
    let k = w.degree as i64;
    let mut out = CoordForm::zero(&w.space, w.degree - 1);
    for (idx, c) in &w.terms {
        if !c.is_polynomial() {
            return Err(FormsError::NotPolynomial(c.to_expr().to_string()));
        }
        for (mono, a) in c.terms() {
            let p: i64 = mono
                .factors()
                .iter()
                .filter(|(atom, _)| matches!(atom, Atom::Var(v) if w.space.position(v).is_some()))
                .map(|(_, e)| *e as i64)
                .sum();
            let scaled = Poly::term(a / &Scalar::from_int(k + p), mono.clone());
            for (j, &i) in idx.iter().enumerate() {
                let mut rest = idx.clone();
                rest.remove(j);
                let t = scaled.mul(&Poly::var(w.space.coords[i].clone()));
                out.add_term(rest, if j % 2 == 1 { t.neg() } else { t });
            }
        }
    }
    Ok(out)
}
