use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// A boolean variable: either an order variable `x_{i,j}` ("i precedes j") over elements
/// of `[n]`, or a plain variable `a_k`. All indices are 1-based.
///
/// Text form: `x3,1` and `a2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarId {
    Order(u16, u16),
    Plain(u16),
}

impl VarId {
    pub fn order(i: usize, j: usize) -> VarId {
        assert!(i >= 1 && j >= 1 && i <= u16::MAX as usize && j <= u16::MAX as usize);
        VarId::Order(i as u16, j as u16)
    }

    pub fn plain(k: usize) -> VarId {
        assert!(k >= 1 && k <= u16::MAX as usize);
        VarId::Plain(k as u16)
    }

    /// `(i, j)` for an order variable.
    pub fn as_order(self) -> Option<(usize, usize)> {
        match self {
            VarId::Order(i, j) => Some((i as usize, j as usize)),
            VarId::Plain(_) => None,
        }
    }

    pub fn as_plain(self) -> Option<usize> {
        match self {
            VarId::Plain(k) => Some(k as usize),
            VarId::Order(..) => None,
        }
    }

    pub fn is_diagonal(self) -> bool {
        matches!(self, VarId::Order(i, j) if i == j)
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarId::Order(i, j) => write!(f, "x{i},{j}"),
            VarId::Plain(k) => write!(f, "a{k}"),
        }
    }
}

impl FromStr for VarId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad variable `{s}`"));
        let idx = |t: &str| -> Result<usize> {
            match t.trim().parse::<usize>() {
                Ok(v) if v >= 1 && v <= u16::MAX as usize => Ok(v),
                _ => Err(bad()),
            }
        };
        let s = s.trim();
        if let Some(rest) = s.strip_prefix('x') {
            let (i, j) = rest.split_once(',').ok_or_else(bad)?;
            Ok(VarId::order(idx(i)?, idx(j)?))
        } else if let Some(rest) = s.strip_prefix('a') {
            Ok(VarId::plain(idx(rest)?))
        } else {
            Err(bad())
        }
    }
}

impl Serialize for VarId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for VarId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The variables an instance may mention: order variables over `[order_n]` (diagonal
/// included) and plain variables `a_1..a_plain_m`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Universe {
    pub order_n: usize,
    pub plain_m: usize,
}

impl Universe {
    pub fn orders(n: usize) -> Self {
        Universe {
            order_n: n,
            plain_m: 0,
        }
    }

    pub fn plain(m: usize) -> Self {
        Universe {
            order_n: 0,
            plain_m: m,
        }
    }

    pub fn contains(&self, v: VarId) -> bool {
        match v {
            VarId::Order(i, j) => {
                let n = self.order_n as u16;
                i >= 1 && j >= 1 && i <= n && j <= n
            }
            VarId::Plain(k) => k >= 1 && k as usize <= self.plain_m,
        }
    }

    pub fn check(&self, v: VarId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::OutOfUniverse {
                var: v,
                universe: self.to_string(),
            })
        }
    }

    /// Every variable of the universe, order variables first.
    pub fn vars(&self) -> Vec<VarId> {
        let mut out = Vec::with_capacity(self.order_n * self.order_n + self.plain_m);
        for i in 1..=self.order_n {
            for j in 1..=self.order_n {
                out.push(VarId::order(i, j));
            }
        }
        out.extend((1..=self.plain_m).map(VarId::plain));
        out
    }
}

impl fmt::Display for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "order n={}, plain m={}", self.order_n, self.plain_m)
    }
}

/// A boolean point to evaluate syntactic objects at.
pub trait Assignment {
    fn value(&self, v: VarId) -> bool;
}

impl<F: Fn(VarId) -> bool> Assignment for F {
    fn value(&self, v: VarId) -> bool {
        self(v)
    }
}

/// Plain-variable assignment stored as bits: `a_k` is `bits[k - 1]`; order variables
/// read as false.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlainBits(pub Vec<bool>);

impl PlainBits {
    /// The `m`-bit assignment encoded by the low bits of `code` (`a_1` is bit 0).
    pub fn from_code(code: u64, m: usize) -> Self {
        PlainBits((0..m).map(|k| code >> k & 1 == 1).collect())
    }
}

impl Assignment for PlainBits {
    fn value(&self, v: VarId) -> bool {
        match v {
            VarId::Plain(k) => self.0.get(k as usize - 1).copied().unwrap_or(false),
            VarId::Order(..) => false,
        }
    }
}

/// An explicit map; unmentioned variables read as false.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialAssignment(pub BTreeMap<VarId, bool>);

impl Assignment for PartialAssignment {
    fn value(&self, v: VarId) -> bool {
        self.0.get(&v).copied().unwrap_or(false)
    }
}

impl fmt::Display for PartialAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, (v, b)) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}={}", u8::from(*b))?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        for v in [VarId::order(3, 1), VarId::order(2, 2), VarId::plain(7)] {
            assert_eq!(v.to_string().parse::<VarId>().unwrap(), v);
        }
        assert!("x0,1".parse::<VarId>().is_err());
        assert!("y3".parse::<VarId>().is_err());
        assert!("x1".parse::<VarId>().is_err());
    }

    #[test]
    fn universe_bounds() {
        let u = Universe {
            order_n: 3,
            plain_m: 2,
        };
        assert!(u.contains(VarId::order(3, 3)));
        assert!(!u.contains(VarId::order(4, 1)));
        assert!(u.contains(VarId::plain(2)));
        assert!(u.check(VarId::plain(3)).is_err());
        assert_eq!(u.vars().len(), 11);
    }
}
