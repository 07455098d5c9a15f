use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::var::{Assignment, Universe, VarId};
use crate::{ratio, Result};

/// A multilinear monomial: a strictly increasing list of variables. The empty
/// monomial is the constant 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Monomial(Vec<VarId>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn new(vars: impl IntoIterator<Item = VarId>) -> Self {
        let mut v: Vec<VarId> = vars.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Monomial(v)
    }

    pub fn vars(&self) -> &[VarId] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// Product under `x^2 = x`: the sorted union.
    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    pub fn eval(&self, a: &impl Assignment) -> bool {
        self.0.iter().all(|&v| a.value(v))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// A multilinear polynomial with exact rational coefficients. Zero coefficients are
/// never stored, so structural equality is polynomial equality.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Polynomial::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn one() -> Self {
        Polynomial::constant(BigRational::one())
    }

    pub fn var(v: VarId) -> Self {
        Polynomial::monomial(Monomial::new([v]), BigRational::one())
    }

    pub fn monomial(m: Monomial, c: BigRational) -> Self {
        let mut p = Polynomial::zero();
        p.add_term(m, c);
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn constant_term(&self) -> BigRational {
        self.coeff(&Monomial::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of monomials with a non-zero coefficient.
    pub fn monomial_count(&self) -> usize {
        self.terms.len()
    }

    /// Degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_constant(&self, c: &BigRational) -> bool {
        if c.is_zero() {
            return self.is_zero();
        }
        self.terms.len() == 1 && self.constant_term() == *c
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn eval(&self, a: &impl Assignment) -> BigRational {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            if m.eval(a) {
                acc += c;
            }
        }
        acc
    }

    pub fn vars(&self) -> Vec<VarId> {
        let mut v: Vec<VarId> = self.terms.keys().flat_map(|m| m.0.iter().copied()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn check_universe(&self, u: &Universe) -> Result<()> {
        for v in self.vars() {
            u.check(v)?;
        }
        Ok(())
    }

    /// Multilinear product (`x^2 = x`).
    pub fn mul_poly(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn has_negative_coeff(&self) -> bool {
        self.terms.values().any(Signed::is_negative)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if m.is_one() {
                write!(f, "{}", ratio::format(&abs))?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", ratio::format(&abs))?;
            }
        }
        Ok(())
    }
}

impl AddAssign<&Polynomial> for Polynomial {
    fn add_assign(&mut self, rhs: &Polynomial) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl Add<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl Mul<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.mul_poly(rhs)
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    monomial: Monomial,
    #[serde(with = "crate::ratio")]
    coeff: BigRational,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    terms: Vec<TermRepr>,
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyRepr {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| TermRepr {
                    monomial: m.clone(),
                    coeff: c.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PolyRepr::deserialize(d)?;
        let mut p = Polynomial::zero();
        for t in repr.terms {
            p.add_term(Monomial::new(t.monomial.0), t.coeff);
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::int;

    fn a(k: usize) -> Polynomial {
        Polynomial::var(VarId::plain(k))
    }

    #[test]
    fn idempotent_product() {
        assert_eq!(&a(1) * &a(1), a(1));
        let p = &(&a(1) + &a(2)) - &Polynomial::one();
        assert_eq!(&p * &Polynomial::one(), p);
        // (a1 + a2 - 1) * a2 = a1 a2
        let expected = Polynomial::monomial(
            Monomial::new([VarId::plain(1), VarId::plain(2)]),
            int(1),
        );
        assert_eq!(&p * &a(2), expected);
    }

    #[test]
    fn cancellation_removes_terms() {
        let p = &a(1) - &a(1);
        assert!(p.is_zero());
        assert_eq!(p.degree(), 0);
        assert!(p.is_constant(&int(0)));
    }

    #[test]
    fn display_is_readable() {
        let p = &(&a(1).scale(&int(2)) - &Polynomial::one()) + &a(2);
        assert_eq!(p.to_string(), "-1 + 2*a1 + a2");
    }
}
