//! Symbolic expressions over jet coordinates and parameters.

mod expr;
mod parse;
mod poly;
mod var;

pub use expr::{differentiate, simplify, substitute, Expr};
pub use parse::{parse, ParseContext};
pub use poly::{Atom, Func, Monomial, Poly};
pub use var::VarName;

use rand::Rng;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymbolicError {
    #[error("syntax error at column {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at column {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("invalid parameter name `{0}`")]
    InvalidParameter(String),
    #[error("no value assigned to `{0}`")]
    MissingVariable(VarName),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("value is not rational: {0}")]
    NotRational(String),
    #[error("expected a polynomial, got `{0}`")]
    NotPolynomial(String),
}

/// Randomized equality for expressions whose canonical forms may differ by
/// transcendental identities: compares values at 10 points drawn uniformly
/// from `[-1, 1]`, relative tolerance `tol`. Points where either side is
/// undefined are redrawn (at most 100 draws).
pub fn probably_equal<R: Rng>(a: &Expr, b: &Expr, rng: &mut R, tol: f64) -> bool {
    let pa = a.to_poly();
    let pb = b.to_poly();
    if pa == pb {
        return true;
    }
    let mut vars = pa.vars();
    vars.extend(pb.vars());
    let mut agreed = 0;
    for _ in 0..100 {
        let point: std::collections::BTreeMap<VarName, f64> =
            vars.iter().map(|v| (v.clone(), rng.gen_range(-1.0..=1.0))).collect();
        let (Ok(x), Ok(y)) = (a.evaluate_at(&point), b.evaluate_at(&point)) else {
            continue;
        };
        if (x - y).abs() > tol * x.abs().max(y.abs()).max(1.0) {
            return false;
        }
        agreed += 1;
        if agreed == 10 {
            return true;
        }
    }
    false
}
