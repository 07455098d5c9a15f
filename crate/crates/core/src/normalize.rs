//! Rewriting order-variable DNFs into normalized form: every term a chain `[[S]]_pi`
//! with `1 in S` and one common support size.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{ConicalJunta, Conjunct, Dnf, VarId};
use crate::order::{linear_extensions, CanonicalTerm, TotalOrder};
use crate::pe::PeEngine;
use crate::{Error, Result};

/// A DNF of chain terms sharing support size `k`, each support containing 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedDnf {
    pub k: usize,
    pub terms: Vec<CanonicalTerm>,
}

impl NormalizedDnf {
    pub fn new(k: usize, terms: Vec<CanonicalTerm>) -> Result<Self> {
        let nd = NormalizedDnf { k, terms };
        nd.validate()?;
        Ok(nd)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("support size must be positive"));
        }
        for t in &self.terms {
            if t.support_size() != self.k || !t.contains(1) {
                return Err(Error::invalid(format!(
                    "{t} is not a chain of support size {} containing 1",
                    self.k
                )));
            }
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.k - 1
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_dnf(&self) -> Dnf {
        Dnf::new(self.terms.iter().map(CanonicalTerm::to_conjunct).collect())
    }

    pub fn accepts(&self, z: &TotalOrder) -> bool {
        self.terms.iter().any(|t| t.accepts(z))
    }

    /// Number of terms accepting `z`.
    pub fn multiplicity(&self, z: &TotalOrder) -> usize {
        self.terms.iter().filter(|t| t.accepts(z)).count()
    }

    pub fn max_element(&self) -> usize {
        self.terms.iter().map(CanonicalTerm::max_element).max().unwrap_or(1)
    }
}

/// How `normalize_dnf` picks the common support size.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Padding {
    /// Smallest size accommodating every term plus element 1.
    #[default]
    Minimal,
    /// Exactly `2d + 1` for a degree-`d` input.
    TwiceDegreePlusOne,
}

/// Replaces `~x_{i,j}` by `x_{j,i}`. Over total orders the result accepts the same orders.
/// `~x_{i,i}` always holds and is dropped; `x_{i,i}` never holds and yields the zero conjunct.
pub fn eliminate_negations(t: &Conjunct) -> Result<Conjunct> {
    if t.is_zero() {
        return Ok(Conjunct::zero());
    }
    let mut out = Conjunct::top();
    for (v, b) in t.literals() {
        let (i, j) = v
            .as_order()
            .ok_or_else(|| Error::invalid(format!("{v} is not an order variable")))?;
        match (i == j, b) {
            (true, true) => return Ok(Conjunct::zero()),
            (true, false) => {}
            (false, true) => out.push(VarId::order(i, j), true),
            (false, false) => out.push(VarId::order(j, i), true),
        }
    }
    Ok(out)
}

/// The elements a conjunct mentions.
pub fn support(t: &Conjunct) -> Vec<usize> {
    let mut s = BTreeSet::new();
    for v in t.vars() {
        if let Some((i, j)) = v.as_order() {
            s.insert(i);
            s.insert(j);
        }
    }
    s.into_iter().collect()
}

/// `(i, j)` pairs of a negation-free order conjunct.
pub fn edges(t: &Conjunct) -> Vec<(usize, usize)> {
    t.positives().filter_map(VarId::as_order).collect()
}

/// `T` plus 1, padded with the smallest missing elements of `[n]` up to size `k`.
pub fn padded_support(t_support: &[usize], k: usize, n: usize) -> Result<Vec<usize>> {
    if k > n {
        return Err(Error::invalid(format!("support size {k} exceeds n = {n}")));
    }
    let mut s: BTreeSet<usize> = t_support.iter().copied().collect();
    s.insert(1);
    if s.len() > k {
        return Err(Error::invalid(format!(
            "support {:?} plus element 1 does not fit in size {k}",
            t_support
        )));
    }
    if s.iter().any(|&e| e > n) {
        return Err(Error::invalid(format!("support {:?} leaves [{n}]", t_support)));
    }
    let mut e = 1;
    while s.len() < k {
        if !s.contains(&e) {
            s.insert(e);
        }
        e += 1;
    }
    Ok(s.into_iter().collect())
}

/// The chain terms on the padded support `S` consistent with `t`. Every order accepted
/// by `t` is accepted by exactly one of them. A zero conjunct gives no terms.
pub fn normalize_term(t: &Conjunct, k: usize, n: usize) -> Result<Vec<CanonicalTerm>> {
    let t = eliminate_negations(t)?;
    if t.is_zero() {
        return Ok(Vec::new());
    }
    let s = padded_support(&support(&t), k, n)?;
    crate::Limits::default().check("chain support size", k, crate::Limits::default().max_support)?;
    linear_extensions(&s, &edges(&t))
        .into_iter()
        .map(CanonicalTerm::new)
        .collect()
}

/// Normalizes `w`, keeping the accepted orders and the pseudo-expectation.
pub fn normalize_dnf(w: &Dnf, n: usize, padding: Padding) -> Result<NormalizedDnf> {
    let mut cleaned = Vec::new();
    for t in &w.terms {
        let t = eliminate_negations(t)?;
        if !t.is_zero() {
            cleaned.push(t);
        }
    }
    let needed = cleaned
        .iter()
        .map(|t| {
            let mut s = support(t);
            if !s.contains(&1) {
                s.push(1);
            }
            s.len()
        })
        .max()
        .unwrap_or(1);
    let k = match padding {
        Padding::Minimal => needed,
        Padding::TwiceDegreePlusOne => 2 * w.degree() + 1,
    };
    if k > n {
        return Err(Error::invalid(format!(
            "cannot pad to a uniform support size {k} inside [{n}]"
        )));
    }
    let mut terms = Vec::new();
    for t in &cleaned {
        terms.extend(normalize_term(t, k, n)?);
    }
    terms.sort();
    NormalizedDnf::new(k, terms)
}

/// Given `pe[W J] < 0`, a chain `t = [[T]]_pi` with `pi(1) = 1` and `pe[W t] < 0`.
/// Returns `None` when `pe[W J] >= 0`.
pub fn extract_witness_term(
    w: &Dnf,
    j: &ConicalJunta,
    engine: &PeEngine,
) -> Result<Option<CanonicalTerm>> {
    let mut total = BigRational::zero();
    let mut values = Vec::with_capacity(j.entries.len());
    for e in &j.entries {
        let v = engine.pe_product(w, &e.conjunct)?;
        total += &v * &e.weight;
        values.push(v);
    }
    if !total.is_negative() {
        return Ok(None);
    }
    let (star, _) = j
        .entries
        .iter()
        .zip(&values)
        .find(|(_, v)| v.is_negative())
        .expect("a negative sum has a negative summand");
    let star = eliminate_negations(&star.conjunct)?;
    let mut t = support(&star);
    if !t.contains(&1) {
        t.push(1);
    }
    for pi in linear_extensions(&t, &edges(&star)) {
        if pi[0] != 1 {
            continue;
        }
        let chain = CanonicalTerm::new(pi)?;
        if engine.pe_product(w, &chain.to_conjunct())?.is_negative() {
            return Ok(Some(chain));
        }
    }
    Err(Error::precondition(
        "no refinement starting with 1 is negative; the DNF is not a weakening of M1",
    ))
}

/// The merge `N'` of `N` with `t` (which must list 1 first): accepts exactly the orders
/// accepted by both, normalized to a common support size, and
/// `pe[N t] = pe[N' + 1 - t]`.
pub fn merge(nd: &NormalizedDnf, t: &CanonicalTerm, n: usize) -> Result<NormalizedDnf> {
    if t.first() != 1 {
        return Err(Error::precondition(format!("{t} does not start with 1")));
    }
    let t_seq = t.seq();
    let t_edges: Vec<(usize, usize)> = t_seq.windows(2).map(|w| (w[0], w[1])).collect();
    let mut pieces = Vec::new();
    for s in &nd.terms {
        let mut union: BTreeSet<usize> = s.support().into_iter().collect();
        union.extend(t_seq.iter().copied());
        if union.len() > n || union.iter().any(|&e| e > n) {
            return Err(Error::invalid(format!("{s} merged with {t} leaves [{n}]")));
        }
        let s_seq = s.seq();
        let mut e = t_edges.clone();
        e.extend(s_seq.windows(2).map(|w| (w[0], w[1])));
        let union: Vec<usize> = union.into_iter().collect();
        for pi in linear_extensions(&union, &e) {
            pieces.push(CanonicalTerm::new(pi)?);
        }
    }
    let k = pieces
        .iter()
        .map(CanonicalTerm::support_size)
        .max()
        .unwrap_or_else(|| nd.k.max(t.support_size()));
    let mut terms = Vec::new();
    for p in pieces {
        if p.support_size() == k {
            terms.push(p);
        } else {
            terms.extend(normalize_term(&p.to_conjunct(), k, n)?);
        }
    }
    terms.sort();
    NormalizedDnf::new(k, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::lop;
    use crate::order::all_orders;
    use crate::ratio::frac;
    use crate::Limits;

    fn x(i: usize, j: usize) -> VarId {
        VarId::order(i, j)
    }

    fn chain(v: &[usize]) -> CanonicalTerm {
        CanonicalTerm::new(v.to_vec()).unwrap()
    }

    #[test]
    fn negations() {
        assert_eq!(
            eliminate_negations(&Conjunct::neg(x(1, 2))).unwrap(),
            Conjunct::pos(x(2, 1))
        );
        assert_eq!(
            eliminate_negations(&Conjunct::new([x(1, 2)], [x(1, 3)])).unwrap(),
            Conjunct::new([x(1, 2), x(3, 1)], [])
        );
        assert!(eliminate_negations(&Conjunct::pos(x(2, 2))).unwrap().is_zero());
        assert!(eliminate_negations(&Conjunct::neg(x(2, 2))).unwrap().is_top());
        assert!(eliminate_negations(&Conjunct::pos(VarId::plain(1))).is_err());
    }

    #[test]
    fn term_expansion() {
        let terms = normalize_term(&Conjunct::pos(x(3, 2)), 3, 4).unwrap();
        assert_eq!(terms, vec![chain(&[1, 3, 2]), chain(&[3, 1, 2]), chain(&[3, 2, 1])]);
        assert_eq!(
            normalize_term(&Conjunct::pos(x(2, 1)), 2, 3).unwrap(),
            vec![chain(&[2, 1])]
        );
        assert!(normalize_term(&Conjunct::new([x(2, 3), x(3, 4)], []), 2, 4).is_err());
    }

    #[test]
    fn m1_normalizes_to_support_two() {
        let w = lop(4).unwrap().require("M1").unwrap().clone();
        let nd = normalize_dnf(&w, 4, Padding::Minimal).unwrap();
        assert_eq!(nd.k, 2);
        assert_eq!(nd.terms, vec![chain(&[2, 1]), chain(&[3, 1]), chain(&[4, 1])]);
        let padded = normalize_dnf(&w, 4, Padding::TwiceDegreePlusOne).unwrap();
        assert_eq!(padded.k, 3);
        for z in all_orders(4, &Limits::default()).unwrap() {
            assert_eq!(w.eval(&z), nd.accepts(&z));
            assert_eq!(w.eval(&z), padded.accepts(&z));
        }
    }

    #[test]
    fn merge_example() {
        let nd = NormalizedDnf::new(3, vec![chain(&[2, 1, 3])]).unwrap();
        let merged = merge(&nd, &chain(&[1, 4]), 4).unwrap();
        assert_eq!(merged.terms, vec![chain(&[2, 1, 3, 4]), chain(&[2, 1, 4, 3])]);
        let engine = PeEngine::new(4);
        let lhs = engine.pe_product(&nd.to_dnf(), &chain(&[1, 4]).to_conjunct()).unwrap();
        // pe[N t] = pe[[[2 1 3]] x14] - pe[x14] = 1/12 - 1/2
        assert_eq!(lhs, frac(1, 12) - frac(1, 2));
        let stub = merge(&nd, &chain(&[1]), 4).unwrap();
        assert_eq!(stub, nd);
        assert!(merge(&nd, &chain(&[4, 1]), 4).is_err());
    }

    #[test]
    fn contradictory_merge_drops_terms() {
        let nd = NormalizedDnf::new(2, vec![chain(&[3, 1]), chain(&[2, 1])]).unwrap();
        let merged = merge(&nd, &chain(&[1, 3]), 3).unwrap();
        assert!(merged.terms.iter().all(|t| t.seq()[0] == 2));
    }

    #[test]
    fn witness_for_trivial_junta() {
        let engine = PeEngine::new(4);
        // {x12} is not a weakening of M1, so its trivial-junta witness is the stub [[1]].
        let w = lop(4).unwrap().require("M1").unwrap().clone();
        assert_eq!(extract_witness_term(&w, &ConicalJunta::unit(), &engine).unwrap(), None);
        let bad = Dnf::new(vec![Conjunct::new([x(1, 2)], [])]);
        let found = extract_witness_term(&bad, &ConicalJunta::unit(), &engine).unwrap();
        assert_eq!(found, Some(chain(&[1])));
    }
}
