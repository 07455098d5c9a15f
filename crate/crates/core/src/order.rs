//! Total orders on `[n]`, chain terms `[[S]]_pi`, and brute-force enumeration.
//!
//! Orders are sequences listing elements first to last, so `1z` is "the order starting
//! with 1 followed by z". The position view is kept alongside for O(1) `x_{i,j}` lookups.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{Assignment, Conjunct, VarId};
use crate::{Error, Limits, Result};

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

pub fn factorial_u64(n: usize) -> u64 {
    assert!(n <= 20, "{n}! overflows u64");
    (1..=n as u64).product()
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k as u64).fold(1u64, |acc, i| acc * (n as u64 - i) / (i + 1))
}

/// Rearranges `seq` into its lexicographic successor; false when `seq` is the last one.
pub fn next_permutation<T: Ord>(seq: &mut [T]) -> bool {
    if seq.len() < 2 {
        return false;
    }
    let mut i = seq.len() - 1;
    while i > 0 && seq[i - 1] >= seq[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = seq.len() - 1;
    while seq[j] <= seq[i - 1] {
        j -= 1;
    }
    seq.swap(i - 1, j);
    seq[i..].reverse();
    true
}

/// All orderings of `elements` in lexicographic order.
pub fn permutations(elements: &[usize]) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = elements.to_vec();
    cur.sort_unstable();
    let mut out = vec![cur.clone()];
    while next_permutation(&mut cur) {
        out.push(cur.clone());
    }
    out
}

/// Orderings of `elements` (listed first to last) in which every `(a, b)` edge has `a`
/// before `b`, generated in lexicographic order. Edges touching other elements are
/// ignored.
pub fn linear_extensions(elements: &[usize], edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut elems = elements.to_vec();
    elems.sort_unstable();
    elems.dedup();
    let idx = |e: usize| elems.binary_search(&e).ok();
    let mut preds = vec![0u64; elems.len()];
    for &(a, b) in edges {
        if let (Some(ia), Some(ib)) = (idx(a), idx(b)) {
            preds[ib] |= 1 << ia;
        }
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(elems.len());
    extend(&elems, &preds, 0, &mut cur, &mut out);
    out
}

fn extend(elems: &[usize], preds: &[u64], placed: u64, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == elems.len() {
        out.push(cur.clone());
        return;
    }
    for (k, &e) in elems.iter().enumerate() {
        if placed >> k & 1 == 0 && preds[k] & !placed == 0 {
            cur.push(e);
            extend(elems, preds, placed | 1 << k, cur, out);
            cur.pop();
        }
    }
}

/// Number of orderings of `0..size` respecting `edges` (a before b), by walking them.
pub fn count_extensions(size: usize, edges: &[(usize, usize)]) -> u64 {
    let mut preds = vec![0u64; size];
    for &(a, b) in edges {
        if a == b {
            return 0;
        }
        preds[b] |= 1 << a;
    }
    fn walk(preds: &[u64], placed: u64, depth: usize) -> u64 {
        if depth == preds.len() {
            return 1;
        }
        let mut total = 0;
        for k in 0..preds.len() {
            if placed >> k & 1 == 0 && preds[k] & !placed == 0 {
                total += walk(preds, placed | 1 << k, depth + 1);
            }
        }
        total
    }
    walk(&preds, 0, 0)
}

/// A total order on `[n]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TotalOrder {
    seq: Vec<u16>,
    pos: Vec<u16>,
}

impl TotalOrder {
    pub fn new(seq: Vec<usize>) -> Result<Self> {
        let n = seq.len();
        let mut pos = vec![u16::MAX; n + 1];
        for (p, &e) in seq.iter().enumerate() {
            if e == 0 || e > n || pos[e] != u16::MAX {
                return Err(Error::invalid(format!("{seq:?} is not a permutation of 1..={n}")));
            }
            pos[e] = p as u16;
        }
        Ok(TotalOrder {
            seq: seq.into_iter().map(|e| e as u16).collect(),
            pos,
        })
    }

    pub fn identity(n: usize) -> Self {
        TotalOrder::new((1..=n).collect()).expect("identity is a permutation")
    }

    fn from_raw(seq: &[u16]) -> Self {
        let mut pos = vec![0u16; seq.len() + 1];
        for (p, &e) in seq.iter().enumerate() {
            pos[e as usize] = p as u16;
        }
        TotalOrder {
            seq: seq.to_vec(),
            pos,
        }
    }

    pub fn n(&self) -> usize {
        self.seq.len()
    }

    pub fn seq(&self) -> Vec<usize> {
        self.seq.iter().map(|&e| e as usize).collect()
    }

    pub fn first(&self) -> usize {
        self.seq[0] as usize
    }

    pub fn position(&self, e: usize) -> usize {
        self.pos[e] as usize
    }

    /// `i` strictly before `j`; false on the diagonal.
    pub fn precedes(&self, i: usize, j: usize) -> bool {
        self.pos[i] < self.pos[j]
    }

    /// The elements of `set` in the order this order lists them.
    pub fn restrict(&self, set: &[usize]) -> Result<Vec<usize>> {
        let n = self.n();
        let mut want = vec![false; n + 1];
        for &e in set {
            if e == 0 || e > n {
                return Err(Error::invalid(format!("element {e} is not in [{n}]")));
            }
            want[e] = true;
        }
        Ok(self
            .seq
            .iter()
            .map(|&e| e as usize)
            .filter(|&e| want[e])
            .collect())
    }

    /// `z \ T`: the restriction to the complement of `set`.
    pub fn without(&self, set: &[usize]) -> Result<Vec<usize>> {
        let n = self.n();
        let mut keep = vec![true; n + 1];
        for &e in set {
            if e == 0 || e > n {
                return Err(Error::invalid(format!("element {e} is not in [{n}]")));
            }
            keep[e] = false;
        }
        Ok(self
            .seq
            .iter()
            .map(|&e| e as usize)
            .filter(|&e| keep[e])
            .collect())
    }

    /// Does the induced assignment satisfy `t`? Order variables only.
    pub fn satisfies(&self, t: &Conjunct) -> Result<bool> {
        if t.is_zero() {
            return Ok(false);
        }
        let n = self.n();
        let mut ok = true;
        for (v, b) in t.literals() {
            match v.as_order() {
                Some((i, j)) if i >= 1 && j >= 1 && i <= n && j <= n => {
                    ok &= self.precedes(i, j) == b;
                }
                _ => {
                    return Err(Error::OutOfUniverse {
                        var: v,
                        universe: format!("orders on [{n}]"),
                    })
                }
            }
        }
        Ok(ok)
    }

    /// The order listing `prefix` first and then `rest`.
    pub fn concat(prefix: &[usize], rest: &[usize]) -> Result<Self> {
        TotalOrder::new(prefix.iter().chain(rest).copied().collect())
    }
}

impl Assignment for TotalOrder {
    fn value(&self, v: VarId) -> bool {
        match v.as_order() {
            Some((i, j)) if i <= self.n() && j <= self.n() => self.precedes(i, j),
            _ => false,
        }
    }
}

impl fmt::Debug for TotalOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.seq)
    }
}

impl fmt::Display for TotalOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.seq.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for TotalOrder {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.seq.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TotalOrder {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        TotalOrder::new(v).map_err(serde::de::Error::custom)
    }
}

/// Lexicographic iterator over all orders on `[n]`.
pub struct Orders {
    cur: Vec<u16>,
    fixed: usize,
    done: bool,
}

impl Iterator for Orders {
    type Item = TotalOrder;

    fn next(&mut self) -> Option<TotalOrder> {
        if self.done {
            return None;
        }
        let out = TotalOrder::from_raw(&self.cur);
        let fixed = self.fixed;
        self.done = !next_permutation(&mut self.cur[fixed..]);
        Some(out)
    }
}

/// Orders starting with `first` (lexicographic within the block).
fn orders_starting_with(n: usize, first: usize) -> Orders {
    let mut cur = vec![first as u16];
    cur.extend((1..=n as u16).filter(|&e| e as usize != first));
    Orders {
        cur,
        fixed: 1,
        done: false,
    }
}

/// All `n!` orders in lexicographic order.
pub fn all_orders(n: usize, limits: &Limits) -> Result<Orders> {
    limits.check_orders(n)?;
    Ok(Orders {
        cur: (1..=n as u16).collect(),
        fixed: 0,
        done: n == 0,
    })
}

/// All orders satisfying `keep`, in lexicographic order.
pub fn enumerate_orders(
    n: usize,
    limits: &Limits,
    keep: impl Fn(&TotalOrder) -> bool,
) -> Result<Vec<TotalOrder>> {
    Ok(all_orders(n, limits)?.filter(|z| keep(z)).collect())
}

/// Folds over every order of `[n]`, split across workers by first element. `combine`
/// must be associative and commutative for the result to be deterministic.
pub fn par_fold_orders<A, F, C>(n: usize, limits: &Limits, init: A, fold: F, combine: C) -> Result<A>
where
    A: Clone + Send + Sync,
    F: Fn(A, &TotalOrder) -> A + Sync + Send,
    C: Fn(A, A) -> A + Sync + Send,
{
    limits.check_orders(n)?;
    if n == 0 {
        return Ok(init);
    }
    let parts: Vec<A> = (1..=n)
        .into_par_iter()
        .map(|first| orders_starting_with(n, first).fold(init.clone(), |acc, z| fold(acc, &z)))
        .collect();
    Ok(parts.into_iter().fold(init, combine))
}

/// `|{z in Ord : z satisfies t}|` by exhaustive enumeration: the number of linear
/// extensions of the relation `t` induces.
pub fn count_satisfying(t: &Conjunct, n: usize, limits: &Limits) -> Result<u64> {
    // Surface malformed variables before fanning out.
    TotalOrder::identity(n).satisfies(t)?;
    par_fold_orders(
        n,
        limits,
        0u64,
        |acc, z| acc + u64::from(z.satisfies(t).unwrap_or(false)),
        |a, b| a + b,
    )
}

/// A chain term `[[pi(1) .. pi(k)]]`, i.e. `x_{pi1,pi2} x_{pi2,pi3} ..`. A single-element
/// chain is the constant term with that support (used for the trivial junta).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalTerm {
    seq: Vec<u16>,
}

impl CanonicalTerm {
    pub fn new(seq: Vec<usize>) -> Result<Self> {
        if seq.is_empty() {
            return Err(Error::invalid("a chain term needs a non-empty support"));
        }
        let mut seen = BTreeSet::new();
        for &e in &seq {
            if e == 0 || e > u16::MAX as usize || !seen.insert(e) {
                return Err(Error::invalid(format!("{seq:?} is not a sequence of distinct elements")));
            }
        }
        Ok(CanonicalTerm {
            seq: seq.into_iter().map(|e| e as u16).collect(),
        })
    }

    pub fn seq(&self) -> Vec<usize> {
        self.seq.iter().map(|&e| e as usize).collect()
    }

    pub fn support(&self) -> Vec<usize> {
        let mut s = self.seq();
        s.sort_unstable();
        s
    }

    pub fn contains(&self, e: usize) -> bool {
        self.seq.iter().any(|&x| x as usize == e)
    }

    pub fn support_size(&self) -> usize {
        self.seq.len()
    }

    pub fn first(&self) -> usize {
        self.seq[0] as usize
    }

    pub fn get(&self, idx: usize) -> Option<usize> {
        self.seq.get(idx).map(|&e| e as usize)
    }

    pub fn max_element(&self) -> usize {
        self.seq.iter().copied().max().unwrap_or(0) as usize
    }

    /// Degree of the chain: `k - 1`.
    pub fn degree(&self) -> usize {
        self.seq.len() - 1
    }

    pub fn to_conjunct(&self) -> Conjunct {
        Conjunct::new(
            self.seq
                .windows(2)
                .map(|w| VarId::order(w[0] as usize, w[1] as usize)),
            [],
        )
    }

    /// `z` restricted to the support equals the chain.
    pub fn accepts(&self, z: &TotalOrder) -> bool {
        self.seq
            .windows(2)
            .all(|w| z.precedes(w[0] as usize, w[1] as usize))
    }
}

impl fmt::Debug for CanonicalTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CanonicalTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[")?;
        for (k, e) in self.seq.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "]]")
    }
}

impl Serialize for CanonicalTerm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.seq.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CanonicalTerm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        CanonicalTerm::new(v).map_err(serde::de::Error::custom)
    }
}

/// `n!/k!`: the orders of `[n]` consistent with a chain of support size `k`.
pub fn count_consistent(t: &CanonicalTerm, n: usize) -> Result<BigUint> {
    let k = t.support_size();
    if k > n || t.max_element() > n {
        return Err(Error::invalid(format!("{t} does not fit in [{n}]")));
    }
    Ok(factorial(n) / factorial(k))
}

/// `z` restricted to `set`, as an order on `set`.
pub fn restrict(z: &TotalOrder, set: &[usize]) -> Result<Vec<usize>> {
    z.restrict(set)
}

pub fn satisfies(z: &TotalOrder, t: &Conjunct) -> Result<bool> {
    z.satisfies(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(v: &[usize]) -> TotalOrder {
        TotalOrder::new(v.to_vec()).unwrap()
    }

    fn chain(v: &[usize]) -> CanonicalTerm {
        CanonicalTerm::new(v.to_vec()).unwrap()
    }

    #[test]
    fn restriction() {
        let z = ord(&[3, 1, 2]);
        assert_eq!(z.restrict(&[1, 3]).unwrap(), vec![3, 1]);
        assert_eq!(z.restrict(&[1, 2, 3]).unwrap(), z.seq());
        assert_eq!(z.without(&[1]).unwrap(), vec![3, 2]);
        assert!(z.restrict(&[4]).is_err());
    }

    #[test]
    fn satisfaction() {
        let z = ord(&[2, 1, 3]);
        assert!(z.satisfies(&Conjunct::pos(VarId::order(2, 1))).unwrap());
        assert!(z.satisfies(&chain(&[2, 1, 3]).to_conjunct()).unwrap());
        assert!(!ord(&[1, 2, 3]).satisfies(&chain(&[2, 1, 3]).to_conjunct()).unwrap());
        assert!(!z.satisfies(&Conjunct::pos(VarId::order(2, 2))).unwrap());
        assert!(z.satisfies(&Conjunct::neg(VarId::order(2, 2))).unwrap());
        assert!(z.satisfies(&Conjunct::pos(VarId::plain(1))).is_err());
        assert!(z.satisfies(&Conjunct::pos(VarId::order(4, 1))).is_err());
    }

    #[test]
    fn consistent_counts() {
        assert_eq!(count_consistent(&chain(&[2, 1]), 3).unwrap(), BigUint::from(3u32));
        assert_eq!(count_consistent(&chain(&[2, 1, 3]), 3).unwrap(), BigUint::from(1u32));
        assert!(count_consistent(&chain(&[2, 1, 3, 4]), 3).is_err());
    }

    #[test]
    fn satisfying_counts() {
        let l = Limits::default();
        let x = |i, j| VarId::order(i, j);
        assert_eq!(count_satisfying(&Conjunct::pos(x(1, 2)), 4, &l).unwrap(), 12);
        assert_eq!(count_satisfying(&Conjunct::new([x(1, 2), x(3, 4)], []), 4, &l).unwrap(), 6);
        assert_eq!(count_satisfying(&Conjunct::new([x(1, 2), x(2, 1)], []), 4, &l).unwrap(), 0);
        let tight = Limits {
            max_order_n: 3,
            ..Limits::default()
        };
        assert!(count_satisfying(&Conjunct::pos(x(1, 2)), 4, &tight).is_err());
    }

    #[test]
    fn enumeration() {
        let l = Limits::default();
        let all: Vec<_> = all_orders(3, &l).unwrap().map(|z| z.seq()).collect();
        assert_eq!(
            all,
            vec![
                vec![1, 2, 3],
                vec![1, 3, 2],
                vec![2, 1, 3],
                vec![2, 3, 1],
                vec![3, 1, 2],
                vec![3, 2, 1]
            ]
        );
        assert_eq!(enumerate_orders(3, &l, |z| z.first() != 1).unwrap().len(), 4);
        let t = chain(&[1, 4]);
        assert_eq!(enumerate_orders(4, &l, |z| t.accepts(z)).unwrap().len(), 12);
    }

    #[test]
    fn parallel_fold_counts_everything() {
        let l = Limits::default();
        let total = par_fold_orders(6, &l, 0u64, |a, _| a + 1, |a, b| a + b).unwrap();
        assert_eq!(total, 720);
    }

    #[test]
    fn small_helpers() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(2, 3), 0);
        assert_eq!(factorial_u64(6), 720);
        assert_eq!(permutations(&[3, 1]).len(), 2);
    }

    #[test]
    fn extensions() {
        let ext = linear_extensions(&[1, 2, 3], &[(3, 2)]);
        assert_eq!(ext, vec![vec![1, 3, 2], vec![3, 1, 2], vec![3, 2, 1]]);
        assert_eq!(count_extensions(4, &[(0, 1), (2, 3)]), 6);
        assert_eq!(count_extensions(3, &[(0, 1), (1, 0)]), 0);
        assert_eq!(count_extensions(5, &[]), 120);
    }
}
