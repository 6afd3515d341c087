use std::fmt;

use serde::{Deserialize, Serialize};

use crate::exterior::Vector;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Subspace of `Q^ambient` given by an ordered, linearly independent basis.
///
/// The reduced row-echelon form of the basis is kept alongside and used for
/// equality.
#[derive(Clone)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<Vector>,
    echelon: Matrix,
}

impl Subspace {
    /// Fails (returns `None`) if the vectors are dependent or of the wrong
    /// length.
    pub fn new(ambient: usize, basis: Vec<Vector>) -> Option<Self> {
        if basis.iter().any(|v| v.dim() != ambient) {
            return None;
        }
        let echelon = echelon_of(ambient, &basis);
        if echelon.rows() != basis.len() {
            return None;
        }
        Some(Subspace {
            ambient,
            basis,
            echelon,
        })
    }

    /// Span of arbitrary vectors; keeps the first maximal independent subset
    /// as the basis.
    pub fn span(ambient: usize, vectors: &[Vector]) -> Self {
        let mut basis: Vec<Vector> = Vec::new();
        for v in vectors {
            assert_eq!(v.dim(), ambient, "vector length mismatch");
            let mut trial = basis.clone();
            trial.push(v.clone());
            if echelon_of(ambient, &trial).rows() == trial.len() {
                basis = trial;
            }
        }
        let echelon = echelon_of(ambient, &basis);
        Subspace {
            ambient,
            basis,
            echelon,
        }
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace::span(ambient, &[])
    }

    pub fn full(ambient: usize) -> Self {
        Subspace::coordinate(ambient, &(1..=ambient).collect::<Vec<_>>())
    }

    /// Span of the standard basis vectors with the given 1-based indices.
    pub fn coordinate(ambient: usize, indices: &[usize]) -> Self {
        let vs: Vec<Vector> = indices.iter().map(|&i| Vector::basis(ambient, i)).collect();
        Subspace::span(ambient, &vs)
    }

    /// Rows are basis vectors.
    pub fn from_rows(ambient: usize, rows: Vec<Vec<Scalar>>) -> Option<Self> {
        Subspace::new(ambient, rows.into_iter().map(Vector).collect())
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    /// Canonical representative: reduced row-echelon matrix of the basis.
    pub fn echelon(&self) -> &Matrix {
        &self.echelon
    }

    pub fn contains_vector(&self, v: &Vector) -> bool {
        let mut trial = self.basis.clone();
        trial.push(v.clone());
        echelon_of(self.ambient, &trial).rows() == self.dim()
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &Subspace) -> bool {
        assert_eq!(self.ambient, other.ambient, "ambient mismatch");
        other.basis.iter().all(|v| self.contains_vector(v))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut vs = self.basis.clone();
        vs.extend(other.basis.iter().cloned());
        Subspace::span(self.ambient, &vs)
    }

    pub fn meets_trivially(&self, other: &Subspace) -> bool {
        self.sum(other).dim() == self.dim() + other.dim()
    }

    pub fn intersection(&self, other: &Subspace) -> Subspace {
        // solve sum a_i u_i = sum b_j w_j
        let n = self.ambient;
        let mut cols: Vec<Vec<Scalar>> = self.basis.iter().map(|v| v.0.clone()).collect();
        cols.extend(other.basis.iter().map(|v| v.0.iter().map(|x| -x).collect()));
        let m = Matrix::from_columns(n, &cols);
        let vecs: Vec<Vector> = m
            .nullspace()
            .into_iter()
            .map(|coef| {
                let mut v = Vector::zero(n);
                for (a, u) in coef.iter().zip(&self.basis) {
                    v = &v + &u.scale(a);
                }
                v
            })
            .collect();
        Subspace::span(n, &vecs)
    }

    /// Extends this basis by standard basis vectors to a basis of the
    /// ambient space; returns only the added vectors.
    pub fn complement_by_standard(&self) -> Vec<Vector> {
        let mut cur = self.clone();
        let mut added = Vec::new();
        for i in 1..=self.ambient {
            let e = Vector::basis(self.ambient, i);
            if !cur.contains_vector(&e) {
                cur = cur.sum(&Subspace::span(self.ambient, &[e.clone()]));
                added.push(e);
            }
        }
        added
    }

    /// Basis as the rows of a matrix.
    pub fn to_rows(&self) -> Vec<Vec<Scalar>> {
        self.basis.iter().map(|v| v.0.clone()).collect()
    }
}

fn echelon_of(ambient: usize, vs: &[Vector]) -> Matrix {
    if vs.is_empty() {
        return Matrix::zeros(0, ambient);
    }
    let r = Matrix::from_rows(vs.iter().map(|v| v.0.clone()).collect()).rref();
    let rank = r.pivots.len();
    if rank == 0 {
        return Matrix::zeros(0, ambient);
    }
    Matrix::from_rows(r.matrix.to_rows().into_iter().take(rank).collect())
}

impl PartialEq for Subspace {
    fn eq(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.echelon == other.echelon
    }
}

impl Eq for Subspace {}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(dim {} in Q^{}) {:?}", self.dim(), self.ambient, self.basis)
    }
}

/// JSON mirror: matrix of `"p/q"` strings, rows are basis vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubspaceRecord {
    pub ambient: usize,
    pub basis: Vec<Vec<Scalar>>,
}

impl From<&Subspace> for SubspaceRecord {
    fn from(s: &Subspace) -> Self {
        SubspaceRecord {
            ambient: s.ambient,
            basis: s.to_rows(),
        }
    }
}
