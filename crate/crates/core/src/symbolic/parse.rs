//! Recursive-descent parser for the expression language.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' '-'? integer)?
//! primary := number | identifier | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Numbers are integers or finite decimals (read exactly). Identifiers are
//! coordinate names (`x1`, `y2`, `z1_2`, `z1_12`, `p`, `p1^2`, `y1_2`,
//! `p1^2_1`) or declared parameters.

use std::collections::BTreeSet;

use num_bigint::BigInt;

use super::poly::Func;
use super::{Expr, SymbolicError, VarName};
use crate::scalar::Scalar;

/// Index ranges and parameter names in scope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseContext {
    pub n: usize,
    pub m: usize,
    params: BTreeSet<String>,
}

impl ParseContext {
    pub fn new(n: usize, m: usize) -> Self {
        ParseContext {
            n,
            m,
            params: BTreeSet::new(),
        }
    }

    /// Declares a parameter; names that look like coordinates or functions
    /// are rejected.
    pub fn with_param(mut self, name: &str) -> Result<Self, SymbolicError> {
        let shaped = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !shaped || VarName::parse_coordinate(name).is_some() || Func::from_name(name).is_some() {
            return Err(SymbolicError::InvalidParameter(name.to_string()));
        }
        self.params.insert(name.to_string());
        Ok(self)
    }

    pub fn params(&self) -> impl Iterator<Item = &String> {
        self.params.iter()
    }

    fn resolve(&self, name: &str, pos: usize) -> Result<VarName, SymbolicError> {
        if self.params.contains(name) {
            return Ok(VarName::Param(name.to_string()));
        }
        match VarName::parse_coordinate(name) {
            Some(v) if v.fits(self.n, self.m) => Ok(v),
            Some(v) => Err(SymbolicError::Parse {
                pos,
                msg: format!("index out of range in `{v}` for n = {}, m = {}", self.n, self.m),
            }),
            None => Err(SymbolicError::UnknownIdentifier {
                name: name.to_string(),
                pos,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Scalar),
    Ident(String),
    Op(char),
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, SymbolicError> {
    let cs: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        let pos = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                i += 1;
            }
            let s: String = cs[start..i].iter().collect();
            out.push((Tok::Num(decimal(&s, pos)?), pos));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            // p<i>^<mu>[_<nu>] is a single name
            let head: String = cs[start..i].iter().collect();
            let momentum = head.len() > 1 && head.starts_with('p') && head[1..].bytes().all(|b| b.is_ascii_digit());
            if momentum && i + 1 < cs.len() && cs[i] == '^' && cs[i + 1].is_ascii_digit() {
                i += 2;
                while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_') {
                    i += 1;
                }
            }
            out.push((Tok::Ident(cs[start..i].iter().collect()), pos));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), pos));
            i += 1;
        } else {
            return Err(SymbolicError::Parse {
                pos,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    out.push((Tok::End, cs.len() + 1));
    Ok(out)
}

fn decimal(s: &str, pos: usize) -> Result<Scalar, SymbolicError> {
    let bad = || SymbolicError::Parse {
        pos,
        msg: format!("malformed number `{s}`"),
    };
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if (int.is_empty() && frac.is_empty()) || frac.contains('.') {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    Ok(Scalar::from_bigs(num, den))
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    ctx: &'a ParseContext,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, msg: String) -> Result<T, SymbolicError> {
        Err(SymbolicError::Parse { pos: self.pos(), msg })
    }

    fn expect(&mut self, c: char) -> Result<(), SymbolicError> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{c}`, found {}", describe(self.peek())))
        }
    }

    fn expr(&mut self) -> Result<Expr, SymbolicError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Op('-') => {
                    self.bump();
                    terms.push(Expr::Neg(Box::new(self.term()?)));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Add(terms)
        })
    }

    fn term(&mut self) -> Result<Expr, SymbolicError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = match acc {
                        Expr::Mul(mut fs) => {
                            fs.push(rhs);
                            Expr::Mul(fs)
                        }
                        other => Expr::Mul(vec![other, rhs]),
                    };
                }
                Tok::Op('/') => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = Expr::Div(Box::new(acc), Box::new(rhs));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, SymbolicError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, SymbolicError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let neg = if *self.peek() == Tok::Op('-') {
            self.bump();
            true
        } else {
            false
        };
        match self.bump() {
            Tok::Num(c) if c.is_integer() => {
                let k: i32 = c
                    .numer()
                    .try_into()
                    .or_else(|_| self.error("exponent too large".into()))?;
                Ok(Expr::Pow(Box::new(base), if neg { -k } else { k }))
            }
            t => {
                self.at -= 1;
                self.error(format!("expected an integer exponent, found {}", describe(&t)))
            }
        }
    }

    fn primary(&mut self) -> Result<Expr, SymbolicError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(c) => Ok(Expr::Const(c)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    self.expect('(')?;
                    let e = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::Func(f, Box::new(e)));
                }
                Ok(Expr::Var(self.ctx.resolve(&name, pos)?))
            }
            t => {
                self.at -= 1;
                self.error(format!("expected an operand, found {}", describe(&t)))
            }
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(c) => format!("number `{c}`"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::End => "end of input".into(),
    }
}

/// Parses `text`; error positions are 1-based character columns.
pub fn parse(text: &str, ctx: &ParseContext) -> Result<Expr, SymbolicError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        ctx,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.error(format!("unexpected {}", describe(p.peek())));
    }
    Ok(e)
}
