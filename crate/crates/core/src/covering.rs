//! Covering sets of total orders by the collections `C_{S,sigma}` of orders inducing
//! a fixed order `sigma` on a `d`-set `S`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::normalize::NormalizedDnf;
use crate::order::{all_orders, factorial_u64, permutations, CanonicalTerm, TotalOrder};
use crate::pe::next_combination;
use crate::{Error, Limits, Result};

/// `C_{S,sigma}`, stored as `sigma` listing `S` in order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoverSet(CanonicalTerm);

impl CoverSet {
    pub fn new(seq: Vec<usize>) -> Result<Self> {
        if seq.len() < 2 {
            return Err(Error::invalid("a cover set needs |S| >= 2"));
        }
        Ok(CoverSet(CanonicalTerm::new(seq)?))
    }

    pub fn seq(&self) -> Vec<usize> {
        self.0.seq()
    }

    pub fn d(&self) -> usize {
        self.0.support_size()
    }

    pub fn contains(&self, z: &TotalOrder) -> bool {
        self.0.accepts(z)
    }

    pub fn as_term(&self) -> &CanonicalTerm {
        &self.0
    }
}

impl std::fmt::Display for CoverSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Every order of `[n]` inducing the set's order on `S`.
pub fn covered(cs: &CoverSet, n: usize, limits: &Limits) -> Result<Vec<TotalOrder>> {
    if cs.0.max_element() > n {
        return Err(Error::invalid(format!("{cs} leaves [{n}]")));
    }
    Ok(all_orders(n, limits)?.filter(|z| cs.contains(z)).collect())
}

/// The orders to be covered.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverUniverse {
    /// Every total order.
    Ord,
    /// Orders in which 1 is not first.
    OrdStar,
    /// Orders accepted by a fixed chain term.
    Term(CanonicalTerm),
}

impl CoverUniverse {
    pub fn contains(&self, z: &TotalOrder) -> bool {
        match self {
            CoverUniverse::Ord => true,
            CoverUniverse::OrdStar => z.first() != 1,
            CoverUniverse::Term(t) => t.accepts(z),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverInstance {
    pub n: usize,
    pub d: usize,
    pub universe: CoverUniverse,
    /// Only sets with `1 in S`, the shape of normalized weakenings of `M_1`.
    pub anchored: bool,
}

impl CoverInstance {
    pub fn new(n: usize, d: usize, universe: CoverUniverse) -> Self {
        CoverInstance {
            n,
            d,
            universe,
            anchored: false,
        }
    }

    pub fn anchored(mut self) -> Self {
        self.anchored = true;
        self
    }

    /// Every admissible cover set, `S` in lexicographic order and `sigma` within it.
    pub fn sets(&self) -> Result<Vec<CoverSet>> {
        if self.d < 2 || self.d > self.n {
            return Err(Error::invalid(format!(
                "need 2 <= d <= n, got d={}, n={}",
                self.d, self.n
            )));
        }
        let mut out = Vec::new();
        let mut idx: Vec<usize> = (0..self.d).collect();
        loop {
            let s: Vec<usize> = idx.iter().map(|&i| i + 1).collect();
            if !self.anchored || s.contains(&1) {
                for sigma in permutations(&s) {
                    out.push(CoverSet::new(sigma)?);
                }
            }
            if !next_combination(&mut idx, self.n) {
                break;
            }
        }
        Ok(out)
    }
}

/// Exact minimum cover with its witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverResult {
    pub instance: CoverInstance,
    pub universe_size: usize,
    /// `None` when the admissible sets cannot cover the universe.
    pub min: Option<usize>,
    pub cover: Vec<CoverSet>,
    /// `ceil(|universe| d! / n!)`.
    pub counting_bound: usize,
    pub nodes: u64,
}

type Bits = Vec<u64>;

fn popcount(b: &[u64]) -> usize {
    b.iter().map(|w| w.count_ones() as usize).sum()
}

fn residual(set: &[u64], covered: &[u64]) -> usize {
    set.iter().zip(covered).map(|(s, c)| (s & !c).count_ones() as usize).sum()
}

struct Problem {
    sets: Vec<CoverSet>,
    bits: Vec<Bits>,
    /// Sets covering each universe element.
    by_element: Vec<Vec<usize>>,
    size: usize,
    words: usize,
}

impl Problem {
    fn build(inst: &CoverInstance, limits: &Limits) -> Result<Problem> {
        let universe: Vec<TotalOrder> = all_orders(inst.n, limits)?
            .filter(|z| inst.universe.contains(z))
            .collect();
        let words = universe.len().div_ceil(64).max(1);
        let mut sets = Vec::new();
        let mut bits = Vec::new();
        for cs in inst.sets()? {
            let mut b = vec![0u64; words];
            for (p, z) in universe.iter().enumerate() {
                if cs.contains(z) {
                    b[p / 64] |= 1 << (p % 64);
                }
            }
            if popcount(&b) > 0 {
                sets.push(cs);
                bits.push(b);
            }
        }
        let mut by_element = vec![Vec::new(); universe.len()];
        for (k, b) in bits.iter().enumerate() {
            for (p, list) in by_element.iter_mut().enumerate() {
                if b[p / 64] >> (p % 64) & 1 == 1 {
                    list.push(k);
                }
            }
        }
        Ok(Problem {
            sets,
            bits,
            by_element,
            size: universe.len(),
            words,
        })
    }

    fn first_uncovered(&self, covered: &[u64]) -> Option<usize> {
        for (w, &c) in covered.iter().enumerate() {
            let free = !c;
            if free != 0 {
                let p = w * 64 + free.trailing_zeros() as usize;
                return (p < self.size).then_some(p);
            }
        }
        None
    }

    fn with(&self, covered: &[u64], k: usize) -> Bits {
        covered.iter().zip(&self.bits[k]).map(|(a, b)| a | b).collect()
    }

    /// Branch options at the first uncovered element, largest residual gain first.
    fn branches(&self, covered: &[u64], e: usize) -> Vec<usize> {
        let mut opts: Vec<(usize, usize)> = self.by_element[e]
            .iter()
            .map(|&k| (residual(&self.bits[k], covered), k))
            .collect();
        opts.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        opts.into_iter().map(|(_, k)| k).collect()
    }

    fn greedy(&self) -> Option<Vec<usize>> {
        let mut covered = vec![0u64; self.words];
        let mut chosen = Vec::new();
        while popcount(&covered) < self.size {
            let (gain, k) = (0..self.bits.len())
                .map(|k| (residual(&self.bits[k], &covered), k))
                .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))?;
            if gain == 0 {
                return None;
            }
            covered = self.with(&covered, k);
            chosen.push(k);
        }
        Some(chosen)
    }

    fn lower_bound(&self, covered: &[u64]) -> usize {
        let left = self.size - popcount(covered);
        if left == 0 {
            return 0;
        }
        let best = self.bits.iter().map(|b| residual(b, covered)).max().unwrap_or(0);
        if best == 0 {
            usize::MAX / 2
        } else {
            left.div_ceil(best)
        }
    }
}

const MEMO_CAP: usize = 1 << 20;

struct Shared {
    /// Smallest cover size found so far (exclusive bound for the search).
    best: AtomicUsize,
    nodes: AtomicU64,
    budget: Option<u64>,
    out_of_budget: AtomicBool,
}

impl Shared {
    fn tick(&self) -> bool {
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        match self.budget {
            Some(b) if n > b => {
                self.out_of_budget.store(true, Ordering::Relaxed);
                false
            }
            _ => true,
        }
    }
}

/// Depth-first search below `covered`. With `first_only` the search stops at the first
/// cover smaller than `best`; otherwise it keeps tightening `best`.
fn dfs(
    p: &Problem,
    covered: &Bits,
    chosen: &mut Vec<usize>,
    shared: &Shared,
    memo: &mut HashMap<Bits, usize>,
    found: &mut Option<Vec<usize>>,
    first_only: bool,
) {
    if shared.out_of_budget.load(Ordering::Relaxed) || (first_only && found.is_some()) {
        return;
    }
    if !shared.tick() {
        return;
    }
    let Some(e) = p.first_uncovered(covered) else {
        if chosen.len() < shared.best.load(Ordering::Relaxed) {
            shared.best.fetch_min(chosen.len(), Ordering::Relaxed);
            *found = Some(chosen.clone());
        }
        return;
    };
    if chosen.len() + p.lower_bound(covered) >= shared.best.load(Ordering::Relaxed) {
        return;
    }
    match memo.get(covered) {
        Some(&depth) if depth <= chosen.len() => return,
        _ => {
            if memo.len() < MEMO_CAP {
                memo.insert(covered.clone(), chosen.len());
            }
        }
    }
    for k in p.branches(covered, e) {
        let next = p.with(covered, k);
        chosen.push(k);
        dfs(p, &next, chosen, shared, memo, found, first_only);
        chosen.pop();
        if first_only && found.is_some() {
            return;
        }
    }
}

enum Search {
    Optimum(Option<Vec<usize>>),
    Budget,
}

/// The smallest cover with fewer than `bound` sets, if any. The witness is the first
/// one met in the fixed branching order.
fn search(p: &Problem, bound: usize, budget: Option<u64>) -> (Search, u64) {
    let shared = Shared {
        best: AtomicUsize::new(bound),
        nodes: AtomicU64::new(0),
        budget,
        out_of_budget: AtomicBool::new(false),
    };
    let start = vec![0u64; p.words];
    let Some(e) = p.first_uncovered(&start) else {
        return (Search::Optimum(Some(Vec::new())), 0);
    };
    // Parallel pass over the top-level branches establishes the optimum.
    let top = p.branches(&start, e);
    top.par_iter().for_each(|&k| {
        let mut memo = HashMap::new();
        let mut found = None;
        let mut chosen = vec![k];
        dfs(p, &p.with(&start, k), &mut chosen, &shared, &mut memo, &mut found, false);
    });
    let nodes = shared.nodes.load(Ordering::Relaxed);
    if shared.out_of_budget.load(Ordering::Relaxed) {
        return (Search::Budget, nodes);
    }
    let opt = shared.best.load(Ordering::Relaxed);
    if opt >= bound {
        return (Search::Optimum(None), nodes);
    }
    // Sequential pass pins down a reproducible witness of that size.
    let again = Shared {
        best: AtomicUsize::new(opt + 1),
        nodes: AtomicU64::new(0),
        budget: None,
        out_of_budget: AtomicBool::new(false),
    };
    let mut memo = HashMap::new();
    let mut found = None;
    dfs(p, &start, &mut Vec::new(), &again, &mut memo, &mut found, true);
    let nodes = nodes + again.nodes.load(Ordering::Relaxed);
    (Search::Optimum(found), nodes)
}

fn sorted_sets(p: &Problem, ks: &[usize]) -> Vec<CoverSet> {
    let mut v: Vec<CoverSet> = ks.iter().map(|&k| p.sets[k].clone()).collect();
    v.sort();
    v
}

fn counting_bound(inst: &CoverInstance, universe_size: usize) -> usize {
    let per = (factorial_u64(inst.n) / factorial_u64(inst.d)) as usize;
    universe_size.div_ceil(per)
}

/// Exact minimum number of cover sets of size `d` covering the universe.
pub fn min_cover(inst: &CoverInstance, limits: &Limits) -> Result<CoverResult> {
    let p = Problem::build(inst, limits)?;
    let counting = counting_bound(inst, p.size);
    let mut result = CoverResult {
        instance: inst.clone(),
        universe_size: p.size,
        min: None,
        cover: Vec::new(),
        counting_bound: counting,
        nodes: 0,
    };
    let Some(greedy) = p.greedy() else {
        return Ok(result);
    };
    if greedy.len() <= counting.max(p.lower_bound(&vec![0u64; p.words])) {
        result.min = Some(greedy.len());
        result.cover = sorted_sets(&p, &greedy);
        return Ok(result);
    }
    let (outcome, nodes) = search(&p, greedy.len(), None);
    result.nodes = nodes;
    let best = match outcome {
        Search::Optimum(Some(ks)) => ks,
        Search::Optimum(None) => greedy,
        Search::Budget => unreachable!("no budget was set"),
    };
    result.min = Some(best.len());
    result.cover = sorted_sets(&p, &best);
    Ok(result)
}

/// Whether the minimum cover of `Ord*1` by `d`-sets is at least `d!`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerBoundCheck {
    pub n: usize,
    pub d: usize,
    pub min: usize,
    pub d_factorial: u64,
    pub holds: bool,
}

pub fn verify_lower_bound(n: usize, d: usize, limits: &Limits) -> Result<LowerBoundCheck> {
    let r = min_cover(&CoverInstance::new(n, d, CoverUniverse::OrdStar), limits)?;
    let min = r.min.ok_or_else(|| Error::invalid("Ord*1 is always coverable"))?;
    let df = factorial_u64(d);
    Ok(LowerBoundCheck {
        n,
        d,
        min,
        d_factorial: df,
        holds: min as u64 >= df,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HuntOutcome {
    Found(Vec<CoverSet>),
    NoneExists,
    /// The node budget ran out first.
    Unknown,
}

/// Looks for a cover of `Ord*1` with fewer than `d!` sets of size `d`.
pub fn hunt_sub_factorial(
    n: usize,
    d: usize,
    anchored: bool,
    node_budget: u64,
    limits: &Limits,
) -> Result<(HuntOutcome, u64)> {
    let mut inst = CoverInstance::new(n, d, CoverUniverse::OrdStar);
    inst.anchored = anchored;
    let p = Problem::build(&inst, limits)?;
    let target = factorial_u64(d) as usize;
    if let Some(g) = p.greedy() {
        if g.len() < target {
            return Ok((HuntOutcome::Found(sorted_sets(&p, &g)), 0));
        }
    }
    let (outcome, nodes) = search(&p, target, Some(node_budget));
    Ok(match outcome {
        Search::Optimum(Some(ks)) => (HuntOutcome::Found(sorted_sets(&p, &ks)), nodes),
        Search::Optimum(None) => (HuntOutcome::NoneExists, nodes),
        Search::Budget => (HuntOutcome::Unknown, nodes),
    })
}

/// An anchored cover as the normalized DNF with one chain term per set.
pub fn cover_to_dnf(cover: &[CoverSet]) -> Result<NormalizedDnf> {
    let k = cover.first().map(CoverSet::d).unwrap_or(2);
    let mut terms: Vec<CanonicalTerm> = cover.iter().map(|c| c.0.clone()).collect();
    terms.sort();
    NormalizedDnf::new(k, terms)
}

/// The cover sets of a normalized DNF.
pub fn dnf_to_cover(nd: &NormalizedDnf) -> Result<Vec<CoverSet>> {
    nd.terms.iter().map(|t| CoverSet::new(t.seq())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cs(v: &[usize]) -> CoverSet {
        CoverSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn covered_orders() {
        let l = Limits::default();
        let got: Vec<String> = covered(&cs(&[2, 3]), 3, &l)
            .unwrap()
            .iter()
            .map(ToString::to_string)
            .collect();
        assert_eq!(got, vec!["(1 2 3)", "(2 1 3)", "(2 3 1)"]);
        for n in 3..=6 {
            assert_eq!(covered(&cs(&[3, 1]), n, &l).unwrap().len() as u64, factorial_u64(n) / 2);
        }
        assert_eq!(covered(&cs(&[3, 1, 2]), 3, &l).unwrap().len(), 1);
    }

    #[test]
    fn small_minimums() {
        let l = Limits::default();
        let r = min_cover(&CoverInstance::new(3, 2, CoverUniverse::Ord), &l).unwrap();
        assert_eq!(r.min, Some(2));
        let r = min_cover(&CoverInstance::new(3, 2, CoverUniverse::OrdStar), &l).unwrap();
        assert_eq!((r.universe_size, r.min), (4, Some(2)));
        let r = min_cover(&CoverInstance::new(4, 2, CoverUniverse::OrdStar), &l).unwrap();
        assert_eq!((r.universe_size, r.min), (18, Some(2)));
        // d = n: singletons, below d! because Ord*1 misses (n-1)! orders.
        let r = min_cover(&CoverInstance::new(3, 3, CoverUniverse::OrdStar), &l).unwrap();
        assert_eq!(r.min, Some(4));
    }

    #[test]
    fn witnesses_cover_and_are_reproducible() {
        let l = Limits::default();
        let inst = CoverInstance::new(5, 3, CoverUniverse::OrdStar);
        let a = min_cover(&inst, &l).unwrap();
        let b = min_cover(&inst, &l).unwrap();
        assert_eq!(a.cover, b.cover);
        for z in all_orders(5, &l).unwrap().filter(|z| z.first() != 1) {
            assert!(a.cover.iter().any(|c| c.contains(&z)), "{z} uncovered");
        }
        assert_eq!(a.cover.len(), a.min.unwrap());
    }

    #[test]
    fn hunt_at_four() {
        let l = Limits::default();
        let (out, _) = hunt_sub_factorial(4, 2, false, 1_000_000, &l).unwrap();
        assert_eq!(out, HuntOutcome::NoneExists);
        let (out, _) = hunt_sub_factorial(4, 2, false, 0, &l).unwrap();
        assert_eq!(out, HuntOutcome::Unknown);
    }

    #[test]
    fn term_universe() {
        let l = Limits::default();
        let t = CanonicalTerm::new(vec![2, 1]).unwrap();
        let r = min_cover(&CoverInstance::new(4, 2, CoverUniverse::Term(t)), &l).unwrap();
        assert_eq!(r.universe_size, 12);
        assert_eq!(r.min, Some(1));
    }

    #[test]
    fn dnf_translation() {
        let cover = vec![cs(&[2, 1]), cs(&[3, 1])];
        let nd = cover_to_dnf(&cover).unwrap();
        assert_eq!(nd.k, 2);
        assert_eq!(dnf_to_cover(&nd).unwrap(), cover);
    }
}
