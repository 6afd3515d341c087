use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use super::poly::{Func, Poly};
use super::{SymbolicError, VarName};
use crate::scalar::Scalar;

/// Expression tree. Canonical trees are those produced by [`simplify`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expr {
    Const(Scalar),
    Var(VarName),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, i32),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Func(Func, Box<Expr>),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Const(Scalar::from_int(n))
    }

    pub fn rational(num: i64, den: i64) -> Expr {
        Expr::Const(Scalar::new(num, den))
    }

    pub fn var(v: VarName) -> Expr {
        Expr::Var(v)
    }

    pub fn pow(self, k: i32) -> Expr {
        Expr::Pow(Box::new(self), k)
    }

    pub fn apply(f: Func, arg: Expr) -> Expr {
        Expr::Func(f, Box::new(arg))
    }

    pub fn to_poly(&self) -> Poly {
        match self {
            Expr::Const(c) => Poly::constant(c.clone()),
            Expr::Var(v) => Poly::var(v.clone()),
            Expr::Add(ts) => ts.iter().fold(Poly::zero(), |acc, t| acc.add(&t.to_poly())),
            Expr::Mul(fs) => fs.iter().fold(Poly::one(), |acc, f| acc.mul(&f.to_poly())),
            Expr::Pow(b, k) => b.to_poly().pow(*k),
            Expr::Div(a, b) => divide(a.to_poly(), b),
            Expr::Neg(a) => a.to_poly().neg(),
            Expr::Func(f, a) => Poly::func(*f, a.to_poly()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.to_poly().is_zero()
    }

    pub fn evaluate_numeric(&self, f: &dyn Fn(&VarName) -> Option<f64>) -> Result<f64, SymbolicError> {
        Ok(match self {
            Expr::Const(c) => c.to_f64(),
            Expr::Var(v) => f(v).ok_or_else(|| SymbolicError::MissingVariable(v.clone()))?,
            Expr::Add(ts) => ts.iter().map(|t| t.evaluate_numeric(f)).sum::<Result<f64, _>>()?,
            Expr::Mul(fs) => fs.iter().map(|t| t.evaluate_numeric(f)).product::<Result<f64, _>>()?,
            Expr::Pow(b, k) => {
                let x = b.evaluate_numeric(f)?;
                if x == 0.0 && *k < 0 {
                    return Err(SymbolicError::Domain("division by zero".into()));
                }
                x.powi(*k)
            }
            Expr::Div(a, b) => {
                let d = b.evaluate_numeric(f)?;
                if d == 0.0 {
                    return Err(SymbolicError::Domain("division by zero".into()));
                }
                a.evaluate_numeric(f)? / d
            }
            Expr::Neg(a) => -a.evaluate_numeric(f)?,
            Expr::Func(g, a) => g.apply_f64(a.evaluate_numeric(f)?)?,
        })
    }

    /// Evaluation with a map assignment.
    pub fn evaluate_at(&self, point: &BTreeMap<VarName, f64>) -> Result<f64, SymbolicError> {
        self.evaluate_numeric(&|v| point.get(v).copied())
    }

    pub fn evaluate_exact(&self, f: &dyn Fn(&VarName) -> Option<Scalar>) -> Result<Scalar, SymbolicError> {
        Ok(match self {
            Expr::Const(c) => c.clone(),
            Expr::Var(v) => f(v).ok_or_else(|| SymbolicError::MissingVariable(v.clone()))?,
            Expr::Add(ts) => ts.iter().map(|t| t.evaluate_exact(f)).sum::<Result<Scalar, _>>()?,
            Expr::Mul(fs) => fs.iter().map(|t| t.evaluate_exact(f)).product::<Result<Scalar, _>>()?,
            Expr::Pow(b, k) => {
                let x = b.evaluate_exact(f)?;
                if x.is_zero() && *k < 0 {
                    return Err(SymbolicError::Domain("division by zero".into()));
                }
                x.pow(*k)
            }
            Expr::Div(a, b) => {
                let d = b.evaluate_exact(f)?;
                if d.is_zero() {
                    return Err(SymbolicError::Domain("division by zero".into()));
                }
                a.evaluate_exact(f)? / d
            }
            Expr::Neg(a) => -a.evaluate_exact(f)?,
            Expr::Func(g, a) => {
                let x = a.evaluate_exact(f)?;
                g.apply_exact(&x)
                    .ok_or_else(|| SymbolicError::NotRational(format!("{}({x})", g.name())))?
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(_) => 1,
            Expr::Mul(_) | Expr::Div(..) => 2,
            Expr::Const(c) if !c.is_integer() => 2,
            Expr::Neg(_) => 3,
            Expr::Const(c) if c.is_negative() => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "(")?;
            self.fmt_prec(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Add(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    match (i, t) {
                        (0, _) => t.fmt_prec(f, 1)?,
                        (_, Expr::Neg(inner)) => {
                            write!(f, " - ")?;
                            inner.fmt_prec(f, 2)?;
                        }
                        (_, Expr::Const(c)) if c.is_negative() => write!(f, " - {}", c.abs())?,
                        _ => {
                            write!(f, " + ")?;
                            t.fmt_prec(f, 2)?;
                        }
                    }
                }
                Ok(())
            }
            Expr::Mul(fs) => {
                for (i, x) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    x.fmt_prec(f, if i == 0 { 2 } else { 4 })?;
                }
                Ok(())
            }
            Expr::Div(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "/")?;
                b.fmt_prec(f, 4)
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, 2)
            }
            Expr::Pow(b, k) => {
                b.fmt_prec(f, 5)?;
                write!(f, "^{k}")
            }
            Expr::Func(g, a) => {
                write!(f, "{}(", g.name())?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

/// Division by a product or power divides factor by factor, so that
/// canonical denominators survive a print/parse round trip unchanged.
fn divide(num: Poly, den: &Expr) -> Poly {
    match den {
        Expr::Mul(fs) => fs.iter().fold(num, divide),
        Expr::Pow(b, k) if *k > 0 => {
            let b = b.to_poly();
            (0..*k).fold(num, |acc, _| acc.div(&b))
        }
        _ => num.div(&den.to_poly()),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Canonical form: polynomial normalization over the rationals with
/// recursively canonical function arguments.
pub fn simplify(e: &Expr) -> Expr {
    e.to_poly().to_expr()
}

/// Partial derivative treating every variable as an independent coordinate.
pub fn differentiate(e: &Expr, v: &VarName) -> Expr {
    e.to_poly().diff(v).to_expr()
}

/// Simultaneous substitution followed by simplification.
pub fn substitute(e: &Expr, bindings: &BTreeMap<VarName, Expr>) -> Expr {
    let polys: BTreeMap<VarName, Poly> = bindings.iter().map(|(k, v)| (k.clone(), v.to_poly())).collect();
    e.to_poly().substitute_map(&polys).to_expr()
}

impl From<Scalar> for Expr {
    fn from(c: Scalar) -> Self {
        Expr::Const(c)
    }
}

impl From<VarName> for Expr {
    fn from(v: VarName) -> Self {
        Expr::Var(v)
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, rhs])
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, Expr::Neg(Box::new(rhs))])
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(vec![self, rhs])
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}
