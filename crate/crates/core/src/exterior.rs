//! Alternating forms on `Q^n` with exact coefficients.
//!
//! Forms are stored sparsely, keyed by strictly increasing index tuples.
//! Indices are 0-based internally; constructors and serialized records use
//! 1-based indices. Evaluation follows the determinant convention, so
//! `(dx1 ^ dx2)(e1, e2) = 1`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Index, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::linalg::{LinearMap, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExteriorError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("interior product of a degree-0 form")]
    DegreeZero,
    #[error("{given} vectors inserted into a form of degree {degree}")]
    TooManyVectors { given: usize, degree: usize },
    #[error("form of degree {degree} evaluated on {given} vectors")]
    ArityMismatch { given: usize, degree: usize },
    #[error("invalid index tuple {indices:?} for dimension {dim}")]
    InvalidIndex { indices: Vec<usize>, dim: usize },
}

/// Strictly increasing index tuple (0-based) labelling a basis monomial.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    /// From 1-based indices; must be strictly increasing and within `1..=dim`.
    pub fn new(indices: &[usize], dim: usize) -> Result<Self, ExteriorError> {
        let ok = indices.iter().all(|&i| i >= 1 && i <= dim) && indices.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(ExteriorError::InvalidIndex {
                indices: indices.to_vec(),
                dim,
            });
        }
        Ok(MultiIndex(indices.iter().map(|i| i - 1).collect()))
    }

    pub(crate) fn from_zero_based(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        MultiIndex(indices)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Dense coordinate vector.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(pub Vec<Scalar>);

impl Vector {
    pub fn zero(n: usize) -> Self {
        Vector(vec![Scalar::zero(); n])
    }

    /// Standard basis vector `e_i` (1-based).
    pub fn basis(n: usize, i: usize) -> Self {
        assert!(i >= 1 && i <= n, "basis index out of range");
        let mut v = Vector::zero(n);
        v.0[i - 1] = Scalar::one();
        v
    }

    pub fn from_i64(xs: &[i64]) -> Self {
        Vector(xs.iter().map(|&x| Scalar::from_int(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Scalar::is_zero)
    }

    pub fn scale(&self, s: &Scalar) -> Vector {
        Vector(self.0.iter().map(|x| x * s).collect())
    }

    pub fn as_slice(&self) -> &[Scalar] {
        &self.0
    }
}

impl Index<usize> for Vector {
    type Output = Scalar;
    fn index(&self, i: usize) -> &Scalar {
        &self.0[i]
    }
}

impl Add<&Vector> for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        assert_eq!(self.dim(), rhs.dim());
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub<&Vector> for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        assert_eq!(self.dim(), rhs.dim());
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Serialized form term: `{indices: [1-based...], coeff: "p/q"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormRecord {
    pub indices: Vec<usize>,
    pub coeff: Scalar,
}

/// Alternating `degree`-form on `Q^dim`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Form {
    degree: usize,
    dim: usize,
    coeffs: BTreeMap<MultiIndex, Scalar>,
}

/// Sign of the permutation sorting `idx`, or `None` if an index repeats.
fn sort_sign(idx: &mut [usize]) -> Option<i32> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// All strictly increasing `k`-subsets of `0..n`, in lexicographic order.
pub fn increasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

fn small_det(m: &[Vec<Scalar>]) -> Scalar {
    match m.len() {
        0 => Scalar::one(),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        _ => Matrix::from_rows(m.to_vec()).determinant(),
    }
}

impl Form {
    pub fn zero(dim: usize, degree: usize) -> Self {
        Form {
            degree,
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Scalar) -> Self {
        let mut f = Form::zero(dim, 0);
        f.add_term(Vec::new(), c);
        f
    }

    /// Basis monomial `dx^{i1} ^ ... ^ dx^{ik}` from 1-based indices in any
    /// order (sign applied; repeated indices give the zero form).
    pub fn monomial(dim: usize, indices: &[usize]) -> Result<Self, ExteriorError> {
        if indices.iter().any(|&i| i == 0 || i > dim) {
            return Err(ExteriorError::InvalidIndex {
                indices: indices.to_vec(),
                dim,
            });
        }
        let mut f = Form::zero(dim, indices.len());
        let mut idx: Vec<usize> = indices.iter().map(|i| i - 1).collect();
        if let Some(s) = sort_sign(&mut idx) {
            f.add_term(idx, Scalar::from_int(s as i64));
        }
        Ok(f)
    }

    /// `dx^1 ^ ... ^ dx^n`.
    pub fn volume(dim: usize) -> Self {
        let mut f = Form::zero(dim, dim);
        f.add_term((0..dim).collect(), Scalar::one());
        f
    }

    /// Builds a form from `(1-based indices, coefficient)` pairs, normalizing
    /// order and sign.
    pub fn from_terms<I>(dim: usize, degree: usize, terms: I) -> Result<Self, ExteriorError>
    where
        I: IntoIterator<Item = (Vec<usize>, Scalar)>,
    {
        let mut f = Form::zero(dim, degree);
        for (idx, c) in terms {
            if idx.len() != degree {
                return Err(ExteriorError::InvalidIndex { indices: idx, dim });
            }
            let m = Form::monomial(dim, &idx)?;
            f = &f + &m.scale(&c);
        }
        Ok(f)
    }

    pub fn from_records(dim: usize, degree: usize, recs: &[FormRecord]) -> Result<Self, ExteriorError> {
        Form::from_terms(dim, degree, recs.iter().map(|r| (r.indices.clone(), r.coeff.clone())))
    }

    pub fn to_records(&self) -> Vec<FormRecord> {
        self.coeffs
            .iter()
            .map(|(k, c)| FormRecord {
                indices: k.one_based(),
                coeff: c.clone(),
            })
            .collect()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Scalar)> {
        self.coeffs.iter()
    }

    /// Coefficient at 1-based increasing indices (zero if absent).
    pub fn coefficient(&self, indices: &[usize]) -> Scalar {
        MultiIndex::new(indices, self.dim)
            .ok()
            .and_then(|k| self.coeffs.get(&k).cloned())
            .unwrap_or_else(Scalar::zero)
    }

    pub(crate) fn coeff0(&self, key: &[usize]) -> Option<&Scalar> {
        self.coeffs.get(&MultiIndex(key.to_vec()))
    }

    /// Value of a degree-0 form.
    pub fn scalar_value(&self) -> Scalar {
        assert_eq!(self.degree, 0, "scalar_value of a positive-degree form");
        self.coeff0(&[]).cloned().unwrap_or_else(Scalar::zero)
    }

    pub(crate) fn add_term(&mut self, key: Vec<usize>, c: Scalar) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(key.len(), self.degree);
        let k = MultiIndex::from_zero_based(key);
        let remove = match self.coeffs.get_mut(&k) {
            Some(v) => {
                *v += &c;
                v.is_zero()
            }
            None => {
                self.coeffs.insert(k, c);
                false
            }
        };
        if remove {
            self.coeffs.retain(|_, v| !v.is_zero());
        }
    }

    pub fn scale(&self, s: &Scalar) -> Form {
        let mut f = Form::zero(self.dim, self.degree);
        if s.is_zero() {
            return f;
        }
        f.coeffs = self.coeffs.iter().map(|(k, c)| (k.clone(), c * s)).collect();
        f
    }

    pub fn try_add(&self, other: &Form) -> Result<Form, ExteriorError> {
        if self.dim != other.dim {
            return Err(ExteriorError::DimensionMismatch(self.dim, other.dim));
        }
        if self.degree != other.degree {
            return Err(ExteriorError::DimensionMismatch(self.degree, other.degree));
        }
        let mut f = self.clone();
        for (k, c) in &other.coeffs {
            f.add_term(k.0.clone(), c.clone());
        }
        Ok(f)
    }
}

impl Add<&Form> for &Form {
    type Output = Form;
    fn add(self, rhs: &Form) -> Form {
        self.try_add(rhs).expect("adding incompatible forms")
    }
}

impl Sub<&Form> for &Form {
    type Output = Form;
    fn sub(self, rhs: &Form) -> Form {
        self.try_add(&-rhs).expect("subtracting incompatible forms")
    }
}

impl Neg for &Form {
    type Output = Form;
    fn neg(self) -> Form {
        self.scale(&Scalar::from_int(-1))
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(k, c)| {
                if k.is_empty() {
                    c.to_string()
                } else {
                    let d: Vec<String> = k.one_based().iter().map(|i| format!("dx{i}")).collect();
                    format!("{c}*{}", d.join("^"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Alternating product with the shuffle sign convention.
pub fn wedge(a: &Form, b: &Form) -> Result<Form, ExteriorError> {
    if a.dim != b.dim {
        return Err(ExteriorError::DimensionMismatch(a.dim, b.dim));
    }
    let mut out = Form::zero(a.dim, a.degree + b.degree);
    if out.degree > out.dim {
        return Ok(out);
    }
    for (ka, ca) in &a.coeffs {
        for (kb, cb) in &b.coeffs {
            let mut idx: Vec<usize> = ka.0.iter().chain(kb.0.iter()).copied().collect();
            if let Some(s) = sort_sign(&mut idx) {
                let c = ca * cb;
                out.add_term(idx, if s < 0 { -c } else { c });
            }
        }
    }
    Ok(out)
}

/// Interior product `i_v w`, inserting `v` into the first slot.
pub fn interior(v: &Vector, w: &Form) -> Result<Form, ExteriorError> {
    if v.dim() != w.dim {
        return Err(ExteriorError::DimensionMismatch(v.dim(), w.dim));
    }
    if w.degree == 0 {
        return Err(ExteriorError::DegreeZero);
    }
    let mut out = Form::zero(w.dim, w.degree - 1);
    for (k, c) in &w.coeffs {
        for (pos, &i) in k.0.iter().enumerate() {
            if v.0[i].is_zero() {
                continue;
            }
            let mut rest = k.0.clone();
            rest.remove(pos);
            let t = c * &v.0[i];
            out.add_term(rest, if pos % 2 == 1 { -t } else { t });
        }
    }
    Ok(out)
}

/// `w(v1, ..., vl, ...)`: inserts the vectors into the leading slots, in order.
pub fn interior_iterated(vs: &[Vector], w: &Form) -> Result<Form, ExteriorError> {
    if vs.len() > w.degree {
        return Err(ExteriorError::TooManyVectors {
            given: vs.len(),
            degree: w.degree,
        });
    }
    let mut cur = w.clone();
    for v in vs {
        cur = interior(v, &cur)?;
    }
    Ok(cur)
}

/// `A^* w` for `A: Q^{A.cols} -> Q^{w.dim}`.
pub fn pullback(a: &LinearMap, w: &Form) -> Result<Form, ExteriorError> {
    if a.rows() != w.dim {
        return Err(ExteriorError::DimensionMismatch(a.rows(), w.dim));
    }
    let d = a.cols();
    let k = w.degree;
    let mut out = Form::zero(d, k);
    if k > d {
        return Ok(out);
    }
    let targets = increasing_tuples(d, k);
    for (key, c) in &w.coeffs {
        for cols in &targets {
            let minor: Vec<Vec<Scalar>> = key
                .0
                .iter()
                .map(|&r| cols.iter().map(|&j| a[(r, j)].clone()).collect())
                .collect();
            let det = small_det(&minor);
            if !det.is_zero() {
                out.add_term(cols.clone(), c * &det);
            }
        }
    }
    Ok(out)
}

/// `w(v1, ..., vk)`.
pub fn evaluate(w: &Form, vs: &[Vector]) -> Result<Scalar, ExteriorError> {
    if vs.len() != w.degree {
        return Err(ExteriorError::ArityMismatch {
            given: vs.len(),
            degree: w.degree,
        });
    }
    if let Some(v) = vs.iter().find(|v| v.dim() != w.dim) {
        return Err(ExteriorError::DimensionMismatch(v.dim(), w.dim));
    }
    let mut total = Scalar::zero();
    for (key, c) in &w.coeffs {
        let m: Vec<Vec<Scalar>> = key
            .0
            .iter()
            .map(|&r| vs.iter().map(|v| v.0[r].clone()).collect())
            .collect();
        let det = small_det(&m);
        if !det.is_zero() {
            total += &(c * &det);
        }
    }
    Ok(total)
}

/// `d^{n-1}x_mu = i_{e_mu} d^n x` (1-based `mu`).
pub fn volume_minus(dim: usize, mu: usize) -> Form {
    interior(&Vector::basis(dim, mu), &Form::volume(dim)).expect("volume form has positive degree")
}
