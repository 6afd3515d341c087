use std::fmt;

use serde::{Serialize, Serializer};

/// Coordinate or parameter name.
///
/// Indices are 1-based: `i` is a fibre index, `mu`/`nu` base indices.
/// The derived order (parameters first, then by role) is the canonical
/// variable order used when printing.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarName {
    Param(String),
    /// `x<mu>`
    X(usize),
    /// `y<i>`
    Y(usize),
    /// `z<i>_<mu>`, first-order jet coordinate on `Z`.
    Z(usize, usize),
    /// `z<i>_<mu><nu>` with `mu <= nu`.
    Z2(usize, usize, usize),
    /// `p`, the extra momentum slot of the extended multimomentum space.
    PScalar,
    /// `p<i>^<mu>`
    P(usize, usize),
    /// `y<i>_<nu>`, jet coordinate of a section of `Z*`.
    YJet(usize, usize),
    /// `p<i>^<mu>_<nu>`
    PJet(usize, usize, usize),
}

impl VarName {
    /// Second-order jet variable with its base indices sorted.
    pub fn z2(i: usize, mu: usize, nu: usize) -> VarName {
        VarName::Z2(i, mu.min(nu), mu.max(nu))
    }

    pub fn param(name: &str) -> VarName {
        VarName::Param(name.to_string())
    }

    pub fn is_param(&self) -> bool {
        matches!(self, VarName::Param(_))
    }

    /// Checks index ranges against base dimension `n` and fibre dimension `m`.
    pub fn fits(&self, n: usize, m: usize) -> bool {
        let b = |mu: usize| (1..=n).contains(&mu);
        let f = |i: usize| (1..=m).contains(&i);
        match *self {
            VarName::Param(_) | VarName::PScalar => true,
            VarName::X(mu) => b(mu),
            VarName::Y(i) => f(i),
            VarName::Z(i, mu) | VarName::P(i, mu) | VarName::YJet(i, mu) => f(i) && b(mu),
            VarName::Z2(i, mu, nu) | VarName::PJet(i, mu, nu) => f(i) && b(mu) && b(nu),
        }
    }

    /// Parses the printed form of a coordinate (not parameters).
    pub fn parse_coordinate(s: &str) -> Option<VarName> {
        let (head, rest) = s.split_at(s.chars().next()?.len_utf8());
        let digits = |t: &str| -> Option<usize> {
            if !t.is_empty() && t.len() <= 4 && t.bytes().all(|c| c.is_ascii_digit()) && !t.starts_with('0') {
                t.parse().ok()
            } else {
                None
            }
        };
        let single = |t: &str| -> Option<Vec<usize>> {
            if t.is_empty() || !t.bytes().all(|c| (b'1'..=b'9').contains(&c)) {
                return None;
            }
            Some(t.bytes().map(|c| (c - b'0') as usize).collect())
        };
        match head {
            "x" => digits(rest).map(VarName::X),
            "y" => match rest.split_once('_') {
                None => digits(rest).map(VarName::Y),
                Some((i, nu)) => match single(nu)?.as_slice() {
                    [nu] => Some(VarName::YJet(digits(i)?, *nu)),
                    _ => None,
                },
            },
            "z" => {
                let (i, jet) = rest.split_once('_')?;
                let i = digits(i)?;
                match single(jet)?.as_slice() {
                    [mu] => Some(VarName::Z(i, *mu)),
                    [mu, nu] => Some(VarName::z2(i, *mu, *nu)),
                    _ => None,
                }
            }
            "p" if rest.is_empty() => Some(VarName::PScalar),
            "p" => {
                let (i, up) = rest.split_once('^')?;
                let i = digits(i)?;
                match up.split_once('_') {
                    None => match single(up)?.as_slice() {
                        [mu] => Some(VarName::P(i, *mu)),
                        _ => None,
                    },
                    Some((mu, nu)) => match (single(mu)?.as_slice(), single(nu)?.as_slice()) {
                        ([mu], [nu]) => Some(VarName::PJet(i, *mu, *nu)),
                        _ => None,
                    },
                }
            }
            _ => None,
        }
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarName::Param(s) => write!(f, "{s}"),
            VarName::X(mu) => write!(f, "x{mu}"),
            VarName::Y(i) => write!(f, "y{i}"),
            VarName::Z(i, mu) => write!(f, "z{i}_{mu}"),
            VarName::Z2(i, mu, nu) => write!(f, "z{i}_{mu}{nu}"),
            VarName::PScalar => write!(f, "p"),
            VarName::P(i, mu) => write!(f, "p{i}^{mu}"),
            VarName::YJet(i, nu) => write!(f, "y{i}_{nu}"),
            VarName::PJet(i, mu, nu) => write!(f, "p{i}^{mu}_{nu}"),
        }
    }
}

impl Serialize for VarName {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
