use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::poly::{Monomial, Polynomial};
use super::var::{Assignment, Universe, VarId};
use crate::{Error, Result};

/// A conjunction of literals. A conjunct containing both `v` and `¬v` collapses to the
/// explicit zero conjunct, which is identically false.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Conjunct {
    lits: BTreeMap<VarId, bool>,
    zero: bool,
}

impl Conjunct {
    /// The empty conjunct (constant true).
    pub fn top() -> Self {
        Conjunct::default()
    }

    pub fn zero() -> Self {
        Conjunct {
            lits: BTreeMap::new(),
            zero: true,
        }
    }

    pub fn new(
        positives: impl IntoIterator<Item = VarId>,
        negatives: impl IntoIterator<Item = VarId>,
    ) -> Self {
        let mut t = Conjunct::top();
        for v in positives {
            t.push(v, true);
        }
        for v in negatives {
            t.push(v, false);
        }
        t
    }

    pub fn from_literals(lits: impl IntoIterator<Item = (VarId, bool)>) -> Self {
        let mut t = Conjunct::top();
        for (v, b) in lits {
            t.push(v, b);
        }
        t
    }

    pub fn pos(v: VarId) -> Self {
        Conjunct::new([v], [])
    }

    pub fn neg(v: VarId) -> Self {
        Conjunct::new([], [v])
    }

    /// Adds a literal, collapsing to zero on a clash.
    pub fn push(&mut self, v: VarId, polarity: bool) {
        if self.zero {
            return;
        }
        match self.lits.insert(v, polarity) {
            Some(old) if old != polarity => *self = Conjunct::zero(),
            _ => {}
        }
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn is_top(&self) -> bool {
        !self.zero && self.lits.is_empty()
    }

    pub fn literals(&self) -> impl Iterator<Item = (VarId, bool)> + '_ {
        self.lits.iter().map(|(&v, &b)| (v, b))
    }

    pub fn literal(&self, v: VarId) -> Option<bool> {
        self.lits.get(&v).copied()
    }

    pub fn positives(&self) -> impl Iterator<Item = VarId> + '_ {
        self.lits.iter().filter(|(_, &b)| b).map(|(&v, _)| v)
    }

    pub fn negatives(&self) -> impl Iterator<Item = VarId> + '_ {
        self.lits.iter().filter(|(_, &b)| !b).map(|(&v, _)| v)
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.lits.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    /// Number of literals; 0 for the zero conjunct.
    pub fn degree(&self) -> usize {
        self.lits.len()
    }

    /// Conjunction; the result may be zero.
    pub fn and(&self, other: &Conjunct) -> Conjunct {
        if self.zero || other.zero {
            return Conjunct::zero();
        }
        let mut out = self.clone();
        for (v, b) in other.literals() {
            out.push(v, b);
            if out.zero {
                break;
            }
        }
        out
    }

    pub fn eval(&self, a: &impl Assignment) -> bool {
        !self.zero && self.lits.iter().all(|(&v, &b)| a.value(v) == b)
    }

    /// Does every assignment satisfying `self` satisfy `other`?
    pub fn implies(&self, other: &Conjunct) -> bool {
        self.zero
            || (!other.zero && other.lits.iter().all(|(v, b)| self.lits.get(v) == Some(b)))
    }

    /// `prod_{v in pos} v * prod_{v in neg} (1 - v)`, expanded.
    pub fn to_poly(&self) -> Polynomial {
        if self.zero {
            return Polynomial::zero();
        }
        let pos = Monomial::new(self.positives());
        let negs: Vec<VarId> = self.negatives().collect();
        let mut out = Polynomial::zero();
        // Expand the negated factors over subsets.
        for mask in 0u64..(1u64 << negs.len()) {
            let picked = negs
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &v)| v);
            let sign = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
            out.add_term(
                pos.mul(&Monomial::new(picked)),
                BigRational::from_integer(sign.into()),
            );
        }
        out
    }

    pub fn check_universe(&self, u: &Universe) -> Result<()> {
        self.vars().try_for_each(|v| u.check(v))
    }
}

impl fmt::Display for Conjunct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.zero {
            return write!(f, "0");
        }
        if self.lits.is_empty() {
            return write!(f, "1");
        }
        for (k, (v, b)) in self.literals().enumerate() {
            if k > 0 {
                write!(f, " & ")?;
            }
            if !b {
                write!(f, "~")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct ConjunctRepr {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pos: Vec<VarId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    neg: Vec<VarId>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    zero: bool,
}

impl Serialize for Conjunct {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ConjunctRepr {
            pos: self.positives().collect(),
            neg: self.negatives().collect(),
            zero: self.zero,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Conjunct {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ConjunctRepr::deserialize(d)?;
        if r.zero {
            return Ok(Conjunct::zero());
        }
        Ok(Conjunct::new(r.pos, r.neg))
    }
}

/// A disjunction of conjuncts. The empty DNF is constant false.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dnf {
    pub terms: Vec<Conjunct>,
}

impl Dnf {
    pub fn new(terms: Vec<Conjunct>) -> Self {
        Dnf { terms }
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(Conjunct::degree).max().unwrap_or(0)
    }

    /// `sum_t t(x) - 1`: non-negative on a boolean point exactly when the DNF is true there.
    pub fn to_poly(&self) -> Polynomial {
        let mut p = Polynomial::constant(-BigRational::one());
        for t in &self.terms {
            p += &t.to_poly();
        }
        p
    }

    pub fn eval(&self, a: &impl Assignment) -> bool {
        self.terms.iter().any(|t| t.eval(a))
    }

    pub fn vars(&self) -> Vec<VarId> {
        let mut v: Vec<VarId> = self.terms.iter().flat_map(|t| t.vars()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn check_universe(&self, u: &Universe) -> Result<()> {
        self.terms.iter().try_for_each(|t| t.check_universe(u))
    }

    /// Degree of the product of this DNF's polynomial with the conjunct `t`, read
    /// syntactically: the largest non-zero conjunction `s & t` over the terms `s`, and
    /// `t` itself for the `-1` part.
    pub fn product_degree(&self, t: &Conjunct) -> usize {
        if t.is_zero() {
            return 0;
        }
        self.terms
            .iter()
            .map(|s| s.and(t))
            .filter(|c| !c.is_zero())
            .map(|c| c.degree())
            .chain(std::iter::once(t.degree()))
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for Dnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "false");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " | ")?;
            }
            write!(f, "({t})")?;
        }
        Ok(())
    }
}

/// One weighted conjunct of a conical junta.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JuntaEntry {
    pub conjunct: Conjunct,
    #[serde(with = "crate::ratio")]
    pub weight: BigRational,
}

/// A non-negative combination of conjuncts. Unary certificates use integer weights;
/// the LP oracle produces rational ones.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConicalJunta {
    pub entries: Vec<JuntaEntry>,
}

impl ConicalJunta {
    pub fn empty() -> Self {
        ConicalJunta::default()
    }

    /// The junta `1` (the empty conjunct with multiplicity one).
    pub fn unit() -> Self {
        ConicalJunta::single(Conjunct::top(), BigRational::one())
    }

    pub fn single(conjunct: Conjunct, weight: BigRational) -> Self {
        let mut j = ConicalJunta::empty();
        j.push(conjunct, weight);
        j
    }

    /// Adds an entry. Zero weights and zero conjuncts are dropped.
    pub fn push(&mut self, conjunct: Conjunct, weight: BigRational) {
        if weight.is_zero() || conjunct.is_zero() {
            return;
        }
        self.entries.push(JuntaEntry { conjunct, weight });
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        match self.entries.iter().find(|e| e.weight.is_negative() || e.weight.is_zero()) {
            Some(e) => Err(Error::invalid(format!(
                "junta weight {} on `{}` is not positive",
                crate::ratio::format(&e.weight),
                e.conjunct
            ))),
            None => Ok(()),
        }
    }

    pub fn degree(&self) -> usize {
        self.entries
            .iter()
            .map(|e| e.conjunct.degree())
            .max()
            .unwrap_or(0)
    }

    pub fn to_poly(&self) -> Polynomial {
        let mut p = Polynomial::zero();
        for e in &self.entries {
            p += &e.conjunct.to_poly().scale(&e.weight);
        }
        p
    }

    pub fn is_unary(&self) -> bool {
        self.entries.iter().all(|e| e.weight.is_integer())
    }

    /// `sum weight * |monomials of the conjunct|`, when every weight is an integer.
    pub fn unary_size(&self) -> Option<BigUint> {
        let mut total = BigUint::zero();
        for e in &self.entries {
            if !e.weight.is_integer() {
                return None;
            }
            let w = e.weight.to_integer().to_biguint()?;
            total += w * BigUint::from(e.conjunct.to_poly().monomial_count());
        }
        Some(total)
    }

    pub fn scale(&self, c: &BigRational) -> ConicalJunta {
        let mut out = ConicalJunta::empty();
        for e in &self.entries {
            out.push(e.conjunct.clone(), &e.weight * c);
        }
        out
    }

    /// Pairwise conjunction of entries, weights multiplied.
    pub fn and(&self, other: &ConicalJunta) -> ConicalJunta {
        let mut out = ConicalJunta::empty();
        for a in &self.entries {
            for b in &other.entries {
                out.push(a.conjunct.and(&b.conjunct), &a.weight * &b.weight);
            }
        }
        out
    }

    pub fn check_universe(&self, u: &Universe) -> Result<()> {
        self.entries.iter().try_for_each(|e| e.conjunct.check_universe(u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::int;

    fn a(k: usize) -> VarId {
        VarId::plain(k)
    }

    fn mono(vs: &[usize]) -> Monomial {
        Monomial::new(vs.iter().map(|&k| a(k)))
    }

    #[test]
    fn conjunct_expansion() {
        assert_eq!(Conjunct::top().to_poly(), Polynomial::one());
        // a1 & ~a2 -> a1 - a1 a2
        let t = Conjunct::new([a(1)], [a(2)]);
        let mut expected = Polynomial::zero();
        expected.add_term(mono(&[1]), int(1));
        expected.add_term(mono(&[1, 2]), int(-1));
        assert_eq!(t.to_poly(), expected);
        // ~a1 & ~a2 -> 1 - a1 - a2 + a1 a2
        let t = Conjunct::new([], [a(1), a(2)]);
        let mut expected = Polynomial::one();
        expected.add_term(mono(&[1]), int(-1));
        expected.add_term(mono(&[2]), int(-1));
        expected.add_term(mono(&[1, 2]), int(1));
        assert_eq!(t.to_poly(), expected);
    }

    #[test]
    fn clash_is_zero() {
        let t = Conjunct::new([a(1)], [a(1)]);
        assert!(t.is_zero());
        assert!(t.to_poly().is_zero());
        assert_eq!(Conjunct::pos(a(1)).and(&Conjunct::neg(a(1))), Conjunct::zero());
    }

    #[test]
    fn dnf_polynomial() {
        let d = Dnf::new(vec![Conjunct::pos(a(1))]);
        assert_eq!(d.to_poly(), &Polynomial::var(a(1)) - &Polynomial::one());
        assert_eq!(Dnf::default().to_poly(), Polynomial::constant(int(-1)));
        // a tautology x | ~x has the zero polynomial
        let o = Dnf::new(vec![Conjunct::pos(a(1)), Conjunct::neg(a(1))]);
        assert!(o.to_poly().is_zero());
    }

    #[test]
    fn product_degree_skips_zero_products() {
        let d = Dnf::new(vec![Conjunct::pos(a(1)), Conjunct::pos(a(2))]);
        assert_eq!(d.product_degree(&Conjunct::neg(a(1))), 2);
        assert_eq!(d.product_degree(&Conjunct::pos(a(1))), 2);
        let d = Dnf::new(vec![Conjunct::pos(a(1))]);
        assert_eq!(d.product_degree(&Conjunct::neg(a(1))), 1);
    }

    #[test]
    fn unary_size_counts_multiplicity() {
        let mut j = ConicalJunta::empty();
        j.push(Conjunct::neg(a(1)), int(3));
        j.push(Conjunct::pos(a(2)), int(2));
        assert_eq!(j.unary_size(), Some(BigUint::from(8u32)));
        j.push(Conjunct::top(), crate::ratio::frac(1, 2));
        assert_eq!(j.unary_size(), None);
    }

    #[test]
    fn serde_shapes() {
        let t = Conjunct::new([VarId::order(2, 1)], [a(3)]);
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"pos":["x2,1"],"neg":["a3"]}"#);
        assert_eq!(serde_json::from_str::<Conjunct>(&s).unwrap(), t);
        let z: Conjunct = serde_json::from_str(r#"{"zero":true}"#).unwrap();
        assert!(z.is_zero());
    }
}
