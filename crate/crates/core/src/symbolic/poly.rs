//! Canonical form: a sparse sum of monomials with rational coefficients.
//!
//! A monomial is a sorted product of atoms raised to nonzero integer
//! powers. Atoms are coordinates, unary functions of canonical arguments, and
//! reciprocals of multi-term polynomials (normalized to leading coefficient 1).
//! Equality of canonical forms is structural.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{Expr, SymbolicError, VarName};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        match s {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            _ => None,
        }
    }

    pub fn apply_f64(self, x: f64) -> Result<f64, SymbolicError> {
        match self {
            Func::Sin => Ok(x.sin()),
            Func::Cos => Ok(x.cos()),
            Func::Exp => Ok(x.exp()),
            Func::Log if x > 0.0 => Ok(x.ln()),
            Func::Log => Err(SymbolicError::Domain(format!("log of nonpositive value {x}"))),
        }
    }

    /// Exact value where it is rational.
    pub fn apply_exact(self, x: &Scalar) -> Option<Scalar> {
        match self {
            Func::Sin if x.is_zero() => Some(Scalar::zero()),
            Func::Cos | Func::Exp if x.is_zero() => Some(Scalar::one()),
            Func::Log if x.is_one() => Some(Scalar::zero()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Var(VarName),
    Func(Func, Poly),
    /// `1 / q` for `q` with at least two terms and leading coefficient 1.
    Recip(Poly),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(Atom, i32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn atom(a: Atom, e: i32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(a, e)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Atom, i32)] {
        &self.0
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, ea) = &self.0[i];
            let (b, eb) = &other.0[j];
            match a.cmp(b) {
                std::cmp::Ordering::Less => {
                    out.push((a.clone(), *ea));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((b.clone(), *eb));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    if ea + eb != 0 {
                        out.push((a.clone(), ea + eb));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    fn without(&self, idx: usize) -> Monomial {
        let mut v = self.0.clone();
        v.remove(idx);
        Monomial(v)
    }

    /// Total degree in coordinates (ignores function and reciprocal atoms).
    pub fn degree(&self) -> i32 {
        self.0
            .iter()
            .filter(|(a, _)| matches!(a, Atom::Var(v) if !v.is_param()))
            .map(|(_, e)| e)
            .sum()
    }
}

/// Canonical multivariate expression.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly(BTreeMap<Monomial, Scalar>);

impl Poly {
    pub fn zero() -> Self {
        Poly(BTreeMap::new())
    }

    pub fn one() -> Self {
        Poly::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        Poly::term(c, Monomial::one())
    }

    pub fn int(c: i64) -> Self {
        Poly::constant(Scalar::from_int(c))
    }

    pub fn var(v: VarName) -> Self {
        Poly::term(Scalar::one(), Monomial::atom(Atom::Var(v), 1))
    }

    pub fn term(c: Scalar, m: Monomial) -> Self {
        let mut t = BTreeMap::new();
        if !c.is_zero() {
            t.insert(m, c);
        }
        Poly(t)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.0.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.0.len()
    }

    /// `Some(c)` when the expression is the constant `c`.
    pub fn as_constant(&self) -> Option<Scalar> {
        match self.0.len() {
            0 => Some(Scalar::zero()),
            1 => self.0.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&VarName> {
        let (m, c) = self.0.iter().next()?;
        match (self.0.len(), m.0.as_slice()) {
            (1, [(Atom::Var(v), 1)]) if c.is_one() => Some(v),
            _ => None,
        }
    }

    /// Coefficient of the constant monomial.
    pub fn constant_term(&self) -> Scalar {
        self.0.get(&Monomial::one()).cloned().unwrap_or_else(Scalar::zero)
    }

    fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.0.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), -c)).collect())
    }

    pub fn scale(&self, s: &Scalar) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(m, c)| (m.clone(), c * s)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.0 {
            for (mb, cb) in &other.0 {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: i32) -> Poly {
        if k < 0 {
            let mut out = Poly::one();
            for _ in 0..-k {
                out = out.div(self);
            }
            return out;
        }
        let mut base = self.clone();
        let mut acc = Poly::one();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// `self / d`. Monomial divisors invert exponents; other divisors become
    /// a reciprocal atom (no polynomial gcd is attempted beyond detecting
    /// `self = c d`).
    pub fn div(&self, d: &Poly) -> Poly {
        if d.0.len() == 1 {
            let (m, c) = d.0.iter().next().unwrap();
            let mut inv = Monomial::one();
            let mut extra = Poly::one();
            for (a, e) in &m.0 {
                match a {
                    Atom::Recip(q) => extra = extra.mul(&q.pow(*e)),
                    _ => inv = inv.mul(&Monomial::atom(a.clone(), -e)),
                }
            }
            return self.mul(&Poly::term(c.recip(), inv)).mul(&extra);
        }
        if d.is_zero() {
            return self.mul(&Poly::term(Scalar::one(), Monomial::atom(Atom::Recip(Poly::zero()), 1)));
        }
        if let Some(c) = self.ratio(d) {
            return Poly::constant(c);
        }
        let lc = d.0.values().next().unwrap().clone();
        let q = d.scale(&lc.recip());
        self.scale(&lc.recip())
            .mul(&Poly::term(Scalar::one(), Monomial::atom(Atom::Recip(q), 1)))
    }

    /// `Some(c)` with `self = c * d`.
    fn ratio(&self, d: &Poly) -> Option<Scalar> {
        if self.0.len() != d.0.len() || self.is_zero() {
            return None;
        }
        let mut c: Option<Scalar> = None;
        for ((ma, ca), (mb, cb)) in self.0.iter().zip(&d.0) {
            if ma != mb {
                return None;
            }
            let r = ca / cb;
            match &c {
                None => c = Some(r),
                Some(x) if *x == r => {}
                Some(_) => return None,
            }
        }
        c
    }

    /// `f(self)`, folding the arguments where `f` has a rational value.
    pub fn func(f: Func, arg: Poly) -> Poly {
        if let Some(v) = arg.as_constant().and_then(|c| f.apply_exact(&c)) {
            return Poly::constant(v);
        }
        Poly::term(Scalar::one(), Monomial::atom(Atom::Func(f, arg), 1))
    }

    pub fn contains(&self, v: &VarName) -> bool {
        self.0.keys().any(|m| m.0.iter().any(|(a, _)| atom_contains(a, v)))
    }

    pub fn vars(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<VarName>) {
        for m in self.0.keys() {
            for (a, _) in &m.0 {
                match a {
                    Atom::Var(v) => {
                        out.insert(v.clone());
                    }
                    Atom::Func(_, p) | Atom::Recip(p) => p.collect_vars(out),
                }
            }
        }
    }

    /// True when every atom is a coordinate or parameter with a
    /// nonnegative exponent.
    pub fn is_polynomial(&self) -> bool {
        self.0
            .keys()
            .all(|m| m.0.iter().all(|(a, e)| matches!(a, Atom::Var(_)) && *e > 0))
    }

    /// Highest total coordinate degree over the terms.
    pub fn degree(&self) -> i32 {
        self.0.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn diff(&self, v: &VarName) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.0 {
            for (idx, (a, e)) in m.0.iter().enumerate() {
                let da = atom_diff(a, v);
                if da.is_zero() {
                    continue;
                }
                let rest = m.without(idx).mul(&Monomial::atom(a.clone(), e - 1));
                let coef = c * &Scalar::from_int(*e as i64);
                out = out.add(&Poly::term(coef, rest).mul(&da));
            }
        }
        out
    }

    /// Simultaneous substitution of coordinates.
    pub fn substitute(&self, f: &dyn Fn(&VarName) -> Option<Poly>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.0 {
            let mut t = Poly::constant(c.clone());
            for (a, e) in &m.0 {
                let base = match a {
                    Atom::Var(v) => match f(v) {
                        Some(p) => p,
                        None => Poly::var(v.clone()),
                    },
                    Atom::Func(g, p) => Poly::func(*g, p.substitute(f)),
                    Atom::Recip(q) => Poly::one().div(&q.substitute(f)),
                };
                t = t.mul(&base.pow(*e));
            }
            out = out.add(&t);
        }
        out
    }

    pub fn substitute_map(&self, bindings: &BTreeMap<VarName, Poly>) -> Poly {
        self.substitute(&|v| bindings.get(v).cloned())
    }

    pub fn eval_f64(&self, f: &dyn Fn(&VarName) -> Option<f64>) -> Result<f64, SymbolicError> {
        let mut total = 0.0;
        for (m, c) in &self.0 {
            let mut t = c.to_f64();
            for (a, e) in &m.0 {
                let x = match a {
                    Atom::Var(v) => f(v).ok_or_else(|| SymbolicError::MissingVariable(v.clone()))?,
                    Atom::Func(g, p) => g.apply_f64(p.eval_f64(f)?)?,
                    Atom::Recip(q) => {
                        let d = q.eval_f64(f)?;
                        if d == 0.0 {
                            return Err(SymbolicError::Domain("division by zero".into()));
                        }
                        1.0 / d
                    }
                };
                if x == 0.0 && *e < 0 {
                    return Err(SymbolicError::Domain("division by zero".into()));
                }
                t *= x.powi(*e);
            }
            total += t;
        }
        Ok(total)
    }

    /// Exact value; fails on missing variables or transcendental values.
    pub fn eval_exact(&self, f: &dyn Fn(&VarName) -> Option<Scalar>) -> Result<Scalar, SymbolicError> {
        self.to_expr().evaluate_exact(f)
    }

    /// Canonical expression tree; the constant term is placed last.
    pub fn to_expr(&self) -> Expr {
        let mut terms: Vec<Expr> = self
            .0
            .iter()
            .filter(|(m, _)| !m.is_one())
            .map(|(m, c)| term_expr(c, m))
            .collect();
        if let Some(c) = self.0.get(&Monomial::one()) {
            terms.push(term_expr(c, &Monomial::one()));
        }
        match terms.len() {
            0 => Expr::Const(Scalar::zero()),
            1 => terms.pop().unwrap(),
            _ => Expr::Add(terms),
        }
    }
}

fn atom_contains(a: &Atom, v: &VarName) -> bool {
    match a {
        Atom::Var(w) => w == v,
        Atom::Func(_, p) | Atom::Recip(p) => p.contains(v),
    }
}

fn atom_diff(a: &Atom, v: &VarName) -> Poly {
    match a {
        Atom::Var(w) if w == v => Poly::one(),
        Atom::Var(_) => Poly::zero(),
        Atom::Func(f, p) => {
            let dp = p.diff(v);
            if dp.is_zero() {
                return dp;
            }
            let outer = match f {
                Func::Sin => Poly::func(Func::Cos, p.clone()),
                Func::Cos => Poly::func(Func::Sin, p.clone()).neg(),
                Func::Exp => Poly::func(Func::Exp, p.clone()),
                Func::Log => Poly::one().div(p),
            };
            outer.mul(&dp)
        }
        Atom::Recip(q) => {
            let dq = q.diff(v);
            if dq.is_zero() {
                return dq;
            }
            Poly::term(-Scalar::one(), Monomial::atom(a.clone(), 2)).mul(&dq)
        }
    }
}

fn atom_expr(a: &Atom) -> Expr {
    match a {
        Atom::Var(v) => Expr::Var(v.clone()),
        Atom::Func(f, p) => Expr::Func(*f, Box::new(p.to_expr())),
        Atom::Recip(q) => q.to_expr(),
    }
}

fn power(base: Expr, e: i32) -> Expr {
    if e == 1 {
        base
    } else {
        Expr::Pow(Box::new(base), e)
    }
}

fn product(mut fs: Vec<Expr>) -> Expr {
    if fs.len() == 1 {
        fs.pop().unwrap()
    } else {
        Expr::Mul(fs)
    }
}

fn term_expr(c: &Scalar, m: &Monomial) -> Expr {
    let mut num = Vec::new();
    let mut den = Vec::new();
    for (a, e) in &m.0 {
        match (a, *e > 0) {
            (Atom::Recip(_), _) => den.push(power(atom_expr(a), *e)),
            (_, true) => num.push(power(atom_expr(a), *e)),
            (_, false) => den.push(power(atom_expr(a), -e)),
        }
    }
    let mag = c.abs();
    if !mag.is_one() || num.is_empty() {
        num.insert(0, Expr::Const(mag));
    }
    let mut t = product(num);
    if !den.is_empty() {
        t = Expr::Div(Box::new(t), Box::new(product(den)));
    }
    if c.is_negative() {
        Expr::Neg(Box::new(t))
    } else {
        t
    }
}
