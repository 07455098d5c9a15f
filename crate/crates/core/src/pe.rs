//! The uniform-order pseudo-expectation: `pe[m]` is the fraction of total orders on
//! `[n]` satisfying the monomial `m`, extended linearly.
//!
//! A conjunct only constrains the elements it mentions, so its value is computed on its
//! support alone and cached under a relabeled key. The exhaustive `n!` route lives in
//! [`crate::oracle`] and is used to cross-check this one.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{ConicalJunta, Conjunct, Dnf, Monomial, Polynomial, Universe, VarId};
use crate::formulas::AxiomFamily;
use crate::normalize::{edges, eliminate_negations, merge, support, NormalizedDnf};
use crate::order::{all_orders, binomial, count_extensions, factorial, CanonicalTerm, TotalOrder};
use crate::{ratio, Error, Limits, Result};

mod biguint_str {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

type Key = (usize, Vec<(u8, u8)>);

/// Evaluates the uniform-order pseudo-expectation on `[n]`.
pub struct PeEngine {
    n: usize,
    limits: Limits,
    cache: Mutex<HashMap<Key, u64>>,
}

impl PeEngine {
    pub fn new(n: usize) -> Self {
        PeEngine::with_limits(n, Limits::default())
    }

    pub fn with_limits(n: usize, limits: Limits) -> Self {
        PeEngine {
            n,
            limits,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    pub fn universe(&self) -> Universe {
        Universe::orders(self.n)
    }

    /// Orderings of the support satisfying the edges, with the support size.
    fn support_count(&self, t: &Conjunct) -> Result<(u64, usize)> {
        t.check_universe(&self.universe())?;
        let t = eliminate_negations(t)?;
        if t.is_zero() {
            return Ok((0, 0));
        }
        let s = support(&t);
        self.limits.check("conjunct support", s.len(), self.limits.max_support)?;
        let pos = |e: usize| s.binary_search(&e).expect("edge endpoints are in the support") as u8;
        let mut key_edges: Vec<(u8, u8)> = edges(&t).into_iter().map(|(a, b)| (pos(a), pos(b))).collect();
        key_edges.sort_unstable();
        let key = (s.len(), key_edges);
        if let Some(&c) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok((c, s.len()));
        }
        let as_usize: Vec<(usize, usize)> = key.1.iter().map(|&(a, b)| (a as usize, b as usize)).collect();
        let c = count_extensions(key.0, &as_usize);
        self.cache.lock().expect("cache poisoned").insert(key, c);
        Ok((c, s.len()))
    }

    /// `pe[t]` for a conjunct (negations allowed).
    pub fn pe_conjunct(&self, t: &Conjunct) -> Result<BigRational> {
        let (count, size) = self.support_count(t)?;
        if count == 0 {
            return Ok(BigRational::zero());
        }
        Ok(BigRational::new(BigInt::from(count), BigInt::from(factorial(size))))
    }

    /// Number of orders on `[n]` satisfying `t`.
    pub fn count_conjunct(&self, t: &Conjunct) -> Result<BigUint> {
        let (count, size) = self.support_count(t)?;
        Ok(BigUint::from(count) * factorial(self.n) / factorial(size))
    }

    /// `pe[[[S]]_pi] = 1/k!` by the closed form.
    pub fn pe_chain(&self, t: &CanonicalTerm) -> Result<BigRational> {
        if t.max_element() > self.n {
            return Err(Error::invalid(format!("{t} does not fit in [{}]", self.n)));
        }
        Ok(BigRational::new(BigInt::one(), BigInt::from(factorial(t.support_size()))))
    }

    pub fn pe_monomial(&self, m: &Monomial) -> Result<BigRational> {
        for v in m.vars() {
            if v.as_plain().is_some() {
                return Err(Error::invalid(format!("{v} is not an order variable")));
            }
        }
        self.pe_conjunct(&Conjunct::new(m.vars().iter().copied(), []))
    }

    pub fn pe_poly(&self, p: &Polynomial) -> Result<BigRational> {
        let mut acc = BigRational::zero();
        for (m, c) in p.terms() {
            acc += self.pe_monomial(m)? * c;
        }
        Ok(acc)
    }

    /// `pe[sum_t t - 1]`.
    pub fn pe_dnf(&self, d: &Dnf) -> Result<BigRational> {
        let mut acc = -BigRational::one();
        for t in &d.terms {
            acc += self.pe_conjunct(t)?;
        }
        Ok(acc)
    }

    /// `pe[D t] = sum_s pe[s & t] - pe[t]`.
    pub fn pe_product(&self, d: &Dnf, t: &Conjunct) -> Result<BigRational> {
        let mut acc = -self.pe_conjunct(t)?;
        for s in &d.terms {
            acc += self.pe_conjunct(&s.and(t))?;
        }
        Ok(acc)
    }

    pub fn pe_junta(&self, j: &ConicalJunta) -> Result<BigRational> {
        let mut acc = BigRational::zero();
        for e in &j.entries {
            acc += self.pe_conjunct(&e.conjunct)? * &e.weight;
        }
        Ok(acc)
    }

    /// `pe[D J]`.
    pub fn pe_dnf_junta(&self, d: &Dnf, j: &ConicalJunta) -> Result<BigRational> {
        let mut acc = BigRational::zero();
        for e in &j.entries {
            acc += self.pe_product(d, &e.conjunct)? * &e.weight;
        }
        Ok(acc)
    }

    /// `pe[N] = |N|/k! - 1` for a normalized DNF.
    pub fn pe_normalized(&self, nd: &NormalizedDnf) -> Result<BigRational> {
        if nd.max_element() > self.n {
            return Err(Error::invalid(format!("normalized DNF leaves [{}]", self.n)));
        }
        Ok(BigRational::new(BigInt::from(nd.len()), BigInt::from(factorial(nd.k))) - BigRational::one())
    }

    /// Full report for a polynomial, with per-monomial order counts.
    pub fn report(&self, p: &Polynomial) -> Result<PeReport> {
        let universe = factorial(self.n);
        let mut breakdown = Vec::new();
        let mut value = BigRational::zero();
        for (m, c) in p.terms() {
            let v = self.pe_monomial(m)?;
            let orders = (v.clone() * BigRational::from_integer(BigInt::from(universe.clone())))
                .to_integer()
                .to_biguint()
                .expect("counts are non-negative");
            value += &v * c;
            breakdown.push(PeTerm {
                monomial: m.to_string(),
                coeff: c.clone(),
                orders,
            });
        }
        Ok(PeReport {
            n: self.n,
            value,
            breakdown,
            universe_size: universe,
        })
    }
}

/// Linear functionals checked against the pseudo-expectation conditions.
pub trait Functional: Sync {
    /// The value on the polynomial of `t`.
    fn conjunct(&self, t: &Conjunct) -> Result<BigRational>;

    /// The value on `(sum_s s - 1) t`.
    fn axiom_product(&self, d: &Dnf, t: &Conjunct) -> Result<BigRational> {
        let mut acc = -self.conjunct(t)?;
        for s in &d.terms {
            let st = s.and(t);
            if !st.is_zero() {
                acc += self.conjunct(&st)?;
            }
        }
        Ok(acc)
    }
}

impl Functional for PeEngine {
    fn conjunct(&self, t: &Conjunct) -> Result<BigRational> {
        self.pe_conjunct(t)
    }

    fn axiom_product(&self, d: &Dnf, t: &Conjunct) -> Result<BigRational> {
        self.pe_product(d, t)
    }
}

/// A table of values on monomials, extended linearly. Monomials outside the table are
/// an error.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MonomialTable(pub BTreeMap<Monomial, BigRational>);

impl MonomialTable {
    pub fn eval(&self, p: &Polynomial) -> Result<BigRational> {
        let mut acc = BigRational::zero();
        for (m, c) in p.terms() {
            let v = self
                .0
                .get(m)
                .ok_or_else(|| Error::invalid(format!("monomial {m} is outside the table")))?;
            acc += v * c;
        }
        Ok(acc)
    }
}

impl Functional for MonomialTable {
    fn conjunct(&self, t: &Conjunct) -> Result<BigRational> {
        self.eval(&t.to_poly())
    }
}

/// One line of a [`PeReport`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeTerm {
    pub monomial: String,
    #[serde(with = "crate::ratio")]
    pub coeff: BigRational,
    /// Orders on `[n]` satisfying the monomial.
    #[serde(with = "biguint_str")]
    pub orders: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeReport {
    pub n: usize,
    #[serde(with = "crate::ratio")]
    pub value: BigRational,
    pub breakdown: Vec<PeTerm>,
    #[serde(with = "biguint_str")]
    pub universe_size: BigUint,
}

/// Every conjunct of degree at most `d` over the universe: order variables positive
/// only, plain variables with either polarity. Ordered by degree, then lexicographically.
pub fn basis_conjuncts(u: &Universe, d: usize, limits: &Limits) -> Result<Vec<Conjunct>> {
    let order_vars: Vec<VarId> = u.vars().into_iter().filter(|v| v.as_order().is_some()).collect();
    let plain_vars: Vec<VarId> = u.vars().into_iter().filter(|v| v.as_plain().is_some()).collect();
    let mut estimate: u128 = 0;
    for size in 0..=d {
        for p in 0..=size.min(plain_vars.len()) {
            let o = size - p;
            estimate += binomial(order_vars.len(), o) as u128
                * binomial(plain_vars.len(), p) as u128
                * (1u128 << p);
        }
    }
    limits.check(
        "basis conjunct count",
        estimate.min(usize::MAX as u128) as usize,
        limits.max_conjuncts,
    )?;
    let all: Vec<(VarId, bool)> = order_vars
        .iter()
        .map(|&v| (v, true))
        .chain(plain_vars.iter().map(|&v| (v, false)))
        .collect();
    let mut out = Vec::new();
    for size in 0..=d.min(all.len()) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let plain_count = idx.iter().filter(|&&k| !all[k].1).count();
            for mask in 0u64..(1u64 << plain_count) {
                let mut bit = 0;
                let mut t = Conjunct::top();
                for &k in &idx {
                    let (v, order_only) = all[k];
                    if order_only {
                        t.push(v, true);
                    } else {
                        t.push(v, mask >> bit & 1 == 0);
                        bit += 1;
                    }
                }
                out.push(t);
            }
            if !next_combination(&mut idx, all.len()) {
                break;
            }
        }
    }
    Ok(out)
}

/// Advances a sorted index combination; false after the last one.
pub fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// The first failed condition found by [`check_conditions`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: u8,
    pub axiom: Option<String>,
    pub conjunct: Conjunct,
    #[serde(with = "crate::ratio")]
    pub value: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionsReport {
    pub family: String,
    pub degree: usize,
    pub conjuncts_checked: usize,
    pub products_checked: usize,
    pub passed: bool,
    pub violation: Option<Violation>,
}

/// Checks the degree-`d` pseudo-expectation conditions for `functional` on `fam`:
/// value 1 on the constant, non-negative on every basis conjunct of degree at most `d`,
/// and non-negative on every `D_i t` whose product has degree at most `d`.
pub fn check_conditions(
    fam: &AxiomFamily,
    d: usize,
    functional: &dyn Functional,
    limits: &Limits,
) -> Result<ConditionsReport> {
    let basis = basis_conjuncts(&fam.universe, d, limits)?;
    let mut report = ConditionsReport {
        family: fam.name.clone(),
        degree: d,
        conjuncts_checked: 0,
        products_checked: 0,
        passed: true,
        violation: None,
    };
    let one = functional.conjunct(&Conjunct::top())?;
    if !one.is_one() {
        report.passed = false;
        report.violation = Some(Violation {
            condition: 1,
            axiom: None,
            conjunct: Conjunct::top(),
            value: one,
        });
        return Ok(report);
    }
    let values: Vec<Result<BigRational>> = basis.par_iter().map(|t| functional.conjunct(t)).collect();
    report.conjuncts_checked = basis.len();
    for (t, v) in basis.iter().zip(values) {
        let v = v?;
        if v.is_negative() {
            report.passed = false;
            report.violation = Some(Violation {
                condition: 2,
                axiom: None,
                conjunct: t.clone(),
                value: v,
            });
            return Ok(report);
        }
    }
    for ax in &fam.axioms {
        let products: Vec<&Conjunct> = basis
            .iter()
            .filter(|t| ax.dnf.product_degree(t) <= d)
            .collect();
        let values: Vec<Result<BigRational>> = products
            .par_iter()
            .map(|t| functional.axiom_product(&ax.dnf, t))
            .collect();
        report.products_checked += products.len();
        for (t, v) in products.into_iter().zip(values) {
            let v = v?;
            if v.is_negative() {
                report.passed = false;
                report.violation = Some(Violation {
                    condition: 3,
                    axiom: Some(ax.label.clone()),
                    conjunct: t.clone(),
                    value: v,
                });
                return Ok(report);
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KfactReport {
    #[serde(with = "crate::ratio")]
    pub pe: BigRational,
    pub terms: usize,
    #[serde(with = "biguint_str")]
    pub k_factorial: BigUint,
}

/// `pe[N] = terms/k! - 1`: non-negative exactly when `N` has at least `k!` terms.
pub fn kfact_criterion(nd: &NormalizedDnf) -> KfactReport {
    let kf = factorial(nd.k);
    KfactReport {
        pe: BigRational::new(BigInt::from(nd.len()), BigInt::from(kf.clone())) - BigRational::one(),
        terms: nd.len(),
        k_factorial: kf,
    }
}

/// `|R|` and `|S_i|` for a normalized DNF, checked against `n! pe[N]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OvercountReport {
    pub n: usize,
    pub rejected: u64,
    pub accepted_by_exactly: BTreeMap<usize, u64>,
    /// `n! pe[N]`.
    pub scaled_pe: i64,
    /// `sum_{i >= 2} (i - 1)|S_i| - |R|`.
    pub overcount: i64,
    pub holds: bool,
}

/// Enumerates every order on `[n]`, tallies how many terms of `nd` accept it, and
/// compares the over-count with `n! pe[N]`.
pub fn overcount_identity(nd: &NormalizedDnf, n: usize, engine: &PeEngine) -> Result<OvercountReport> {
    let mut hist: BTreeMap<usize, u64> = BTreeMap::new();
    for z in all_orders(n, engine.limits())? {
        *hist.entry(nd.multiplicity(&z)).or_default() += 1;
    }
    let rejected = hist.remove(&0).unwrap_or(0);
    let overcount: i64 = hist.iter().map(|(&i, &c)| (i as i64 - 1) * c as i64).sum::<i64>() - rejected as i64;
    let scaled = engine.pe_dnf(&nd.to_dnf())? * BigRational::from_integer(BigInt::from(factorial(n)));
    let scaled_pe = scaled
        .to_integer()
        .to_i64()
        .ok_or_else(|| Error::invalid("scaled pseudo-expectation overflows"))?;
    Ok(OvercountReport {
        n,
        rejected,
        accepted_by_exactly: hist,
        scaled_pe,
        overcount,
        holds: scaled.is_integer() && scaled_pe == overcount,
    })
}

/// Which hitting structure a [`HitMatrix`] records.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HitMode {
    Pairs,
    Triples,
}

/// `H_z` for a rejected order `1z`: `index` lists the elements rows are indexed by, and
/// `entries` is the flattened matrix (pairs) or array (triples) over `index`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitMatrix {
    pub mode: HitMode,
    pub z: Vec<usize>,
    pub index: Vec<usize>,
    pub entries: Vec<bool>,
    /// Number of 1-entries.
    pub ones: usize,
    /// Hitting pairs/triples, as sorted element tuples.
    pub hits: Vec<Vec<usize>>,
    /// The guaranteed floor: `q - C(m,2)` for pairs, `(q - 4 C(m,3)) / 2` for triples.
    #[serde(with = "crate::ratio")]
    pub bound: BigRational,
    pub bound_holds: bool,
}

/// Hitting pairs of an `m x m` 0/1 matrix given row-major; the diagonal is ignored.
pub fn count_hitting_pairs(m: usize, entries: &[bool]) -> usize {
    let mut hits = 0;
    for i in 0..m {
        for j in i + 1..m {
            if entries[i * m + j] && entries[j * m + i] {
                hits += 1;
            }
        }
    }
    hits
}

/// Hitting triples of an `m x m x m` array: unordered triples all of whose six
/// orientations are 1.
pub fn count_hitting_triples(m: usize, entries: &[bool]) -> usize {
    let at = |i: usize, j: usize, k: usize| entries[(i * m + j) * m + k];
    let mut hits = 0;
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                if at(i, j, k) && at(i, k, j) && at(j, i, k) && at(j, k, i) && at(k, i, j) && at(k, j, i) {
                    hits += 1;
                }
            }
        }
    }
    hits
}

/// `q - C(m,2)` for an `m x m` matrix with `q` off-diagonal ones.
pub fn pair_bound(m: usize, q: usize) -> BigRational {
    ratio::int(q as i64 - binomial(m, 2) as i64)
}

/// `(q - 4 C(m,3)) / 2` for an `m`-sided array with `q` ones.
pub fn triple_bound(m: usize, q: usize) -> BigRational {
    ratio::frac(q as i64 - 4 * binomial(m, 3) as i64, 2)
}

/// Does a term `[[T]]_pi` start `i, 1` and agree with `i1(z \ i)`?
fn z_good(term: &CanonicalTerm, i: usize, z: &[usize]) -> bool {
    if term.get(0) != Some(i) || term.get(1) != Some(1) {
        return false;
    }
    let mut order = vec![i, 1];
    order.extend(z.iter().copied().filter(|&e| e != i));
    let seq = term.seq();
    let restricted: Vec<usize> = order.into_iter().filter(|e| seq.contains(e)).collect();
    restricted == seq
}

fn check_z(z: &[usize], n: usize) -> Result<TotalOrder> {
    let mut full = vec![1];
    full.extend_from_slice(z);
    if full.len() != n {
        return Err(Error::invalid(format!("{z:?} is not an order on [{n}] \\ 1")));
    }
    TotalOrder::new(full)
}

/// `H_z(i, j) = 1` iff `i != j` and some term is z-good for `i` while omitting `j`.
/// Requires `1z` to be rejected by `nd`.
pub fn pair_matrix(nd: &NormalizedDnf, z: &[usize], n: usize) -> Result<HitMatrix> {
    let one_z = check_z(z, n)?;
    if nd.accepts(&one_z) {
        return Err(Error::precondition(format!("the order {one_z} is accepted")));
    }
    let index: Vec<usize> = (2..=n).collect();
    let m = index.len();
    let mut entries = vec![false; m * m];
    for (a, &i) in index.iter().enumerate() {
        for term in nd.terms.iter().filter(|t| z_good(t, i, z)) {
            for (b, &j) in index.iter().enumerate() {
                if a != b && !term.contains(j) {
                    entries[a * m + b] = true;
                }
            }
        }
    }
    let ones = entries.iter().filter(|&&e| e).count();
    let mut hits = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            if entries[a * m + b] && entries[b * m + a] {
                hits.push(vec![index[a], index[b]]);
            }
        }
    }
    let bound = pair_bound(m, ones);
    Ok(HitMatrix {
        mode: HitMode::Pairs,
        z: z.to_vec(),
        bound_holds: ratio::int(hits.len() as i64) >= bound,
        index,
        entries,
        ones,
        hits,
        bound,
    })
}

/// `H_z(i, j, k) = 1` iff `i, j, k` are distinct elements outside `T*` and some term of
/// `merged` is z-good for `i` while omitting `j` and `k`. Requires `t*` to start with 1
/// and `1z` to be consistent with `t*` and rejected by `merged`.
pub fn triple_array(
    merged: &NormalizedDnf,
    t_star: &CanonicalTerm,
    z: &[usize],
    n: usize,
) -> Result<HitMatrix> {
    if t_star.first() != 1 {
        return Err(Error::precondition(format!("{t_star} does not start with 1")));
    }
    let one_z = check_z(z, n)?;
    if !t_star.accepts(&one_z) {
        return Err(Error::precondition(format!("{one_z} is not consistent with {t_star}")));
    }
    if merged.accepts(&one_z) {
        return Err(Error::precondition(format!("the order {one_z} is accepted")));
    }
    let index: Vec<usize> = (1..=n).filter(|&e| !t_star.contains(e)).collect();
    let m = index.len();
    let mut entries = vec![false; m * m * m];
    for (a, &i) in index.iter().enumerate() {
        for term in merged.terms.iter().filter(|t| z_good(t, i, z)) {
            for (b, &j) in index.iter().enumerate() {
                for (c, &k) in index.iter().enumerate() {
                    if a != b && b != c && a != c && !term.contains(j) && !term.contains(k) {
                        entries[(a * m + b) * m + c] = true;
                    }
                }
            }
        }
    }
    let ones = entries.iter().filter(|&&e| e).count();
    let at = |i: usize, j: usize, k: usize| entries[(i * m + j) * m + k];
    let mut hits = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                if at(a, b, c) && at(a, c, b) && at(b, a, c) && at(b, c, a) && at(c, a, b) && at(c, b, a) {
                    hits.push(vec![index[a], index[b], index[c]]);
                }
            }
        }
    }
    let bound = triple_bound(m, ones);
    Ok(HitMatrix {
        mode: HitMode::Triples,
        z: z.to_vec(),
        bound_holds: ratio::int(hits.len() as i64) >= bound,
        index,
        entries,
        ones,
        hits,
        bound,
    })
}

/// For each hitting pair `{i, j}` of `h`, the number of terms of `nd` accepting
/// `ij1(z \ {i,j})` and `ji1(z \ {i,j})`.
pub fn pair_overcounts(nd: &NormalizedDnf, h: &HitMatrix) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for pair in &h.hits {
        let (i, j) = (pair[0], pair[1]);
        let rest: Vec<usize> = h.z.iter().copied().filter(|&e| e != i && e != j).collect();
        let a = TotalOrder::concat(&[i, j, 1], &rest)?;
        let b = TotalOrder::concat(&[j, i, 1], &rest)?;
        out.push((nd.multiplicity(&a), nd.multiplicity(&b)));
    }
    Ok(out)
}

/// Outcome of [`verify_m1_nonneg`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct M1Report {
    #[serde(with = "crate::ratio")]
    pub pe: BigRational,
    pub nonnegative: bool,
    /// Support size and term count of the merged DNF `N'`.
    pub merged_k: usize,
    pub merged_terms: usize,
    /// Orders consistent with `t*` rejected by `N'`.
    pub rejected: u64,
    /// `sum (mult - 1)` over accepted orders consistent with `t*`.
    pub overcount: u64,
    /// `n! pe[N t*] = overcount - rejected`, checked exactly.
    pub identity_holds: bool,
}

/// Computes the sign of `pe[N t*]` for a weakening `N` of `M_1`, with the merge-based
/// over-count certificate. Fails with the violating order when `N` rejects an order
/// consistent with `t*` that does not start with 1.
pub fn verify_m1_nonneg(
    nd: &NormalizedDnf,
    t_star: &CanonicalTerm,
    n: usize,
    engine: &PeEngine,
) -> Result<M1Report> {
    let mut rejected = 0u64;
    let mut overcount = 0u64;
    let merged = merge(nd, t_star, n)?;
    for z in all_orders(n, engine.limits())? {
        if !t_star.accepts(&z) {
            continue;
        }
        if z.first() != 1 && !nd.accepts(&z) {
            return Err(Error::precondition(format!(
                "not a weakening of M1: the order {z} is rejected"
            )));
        }
        match merged.multiplicity(&z) {
            0 => rejected += 1,
            m => overcount += m as u64 - 1,
        }
    }
    let pe = engine.pe_product(&nd.to_dnf(), &t_star.to_conjunct())?;
    let scaled = &pe * BigRational::from_integer(BigInt::from(factorial(n)));
    let identity_holds = scaled == ratio::int(overcount as i64 - rejected as i64);
    Ok(M1Report {
        nonnegative: !pe.is_negative(),
        pe,
        merged_k: merged.k,
        merged_terms: merged.len(),
        rejected,
        overcount,
        identity_holds,
    })
}

/// Result of scanning every normalized support-`k` weakening of `M_1` with fewer than
/// `k!` terms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct M1Scan {
    pub n: usize,
    pub k: usize,
    /// Chains with 1 in the support and not listed first (the only ones that accept
    /// orders of `Ord*1`).
    pub candidates: usize,
    /// Smallest weakening found with fewer than `k!` terms.
    pub witness: Option<NormalizedDnf>,
}

impl M1Scan {
    pub fn negative_exists(&self) -> bool {
        self.witness.is_some()
    }
}

/// Searches subsets of chain terms of support size `k` (containing 1) for a weakening
/// of `M_1` with fewer than `k!` terms, i.e. `pe < 0`. Sizes too small to cover
/// `Ord*1` by counting are skipped.
pub fn scan_m1_weakenings(n: usize, k: usize, limits: &Limits) -> Result<M1Scan> {
    if k < 2 || k > n {
        return Err(Error::invalid(format!("need 2 <= k <= n, got k={k}, n={n}")));
    }
    let targets: Vec<TotalOrder> = all_orders(n, limits)?.filter(|z| z.first() != 1).collect();
    let words = targets.len().div_ceil(64);
    let mut candidates = Vec::new();
    let rest: Vec<usize> = (2..=n).collect();
    let mut idx: Vec<usize> = (0..k - 1).collect();
    loop {
        let mut s = vec![1];
        s.extend(idx.iter().map(|&i| rest[i]));
        for pi in crate::order::permutations(&s) {
            if pi[0] == 1 {
                continue;
            }
            let term = CanonicalTerm::new(pi)?;
            let mut bits = vec![0u64; words];
            for (p, z) in targets.iter().enumerate() {
                if term.accepts(z) {
                    bits[p / 64] |= 1 << (p % 64);
                }
            }
            candidates.push((term, bits));
        }
        if !next_combination(&mut idx, rest.len()) {
            break;
        }
    }
    let per_term = (factorial(n) / factorial(k)).to_usize().unwrap_or(usize::MAX);
    let kf = factorial(k).to_usize().unwrap_or(usize::MAX);
    let mut witness = None;
    for size in 1..kf {
        if size.saturating_mul(per_term) < targets.len() {
            continue;
        }
        let mut pick: Vec<usize> = (0..size).collect();
        if size > candidates.len() {
            break;
        }
        loop {
            let mut acc = vec![0u64; words];
            for &p in &pick {
                for (a, b) in acc.iter_mut().zip(&candidates[p].1) {
                    *a |= b;
                }
            }
            let covered: usize = acc.iter().map(|w| w.count_ones() as usize).sum();
            if covered == targets.len() {
                let mut terms: Vec<CanonicalTerm> = pick.iter().map(|&p| candidates[p].0.clone()).collect();
                terms.sort();
                witness = Some(NormalizedDnf::new(k, terms)?);
                break;
            }
            if !next_combination(&mut pick, candidates.len()) {
                break;
            }
        }
        if witness.is_some() {
            break;
        }
    }
    Ok(M1Scan {
        n,
        k,
        candidates: candidates.len(),
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::lop;
    use crate::normalize::{normalize_dnf, Padding};
    use crate::ratio::{frac, int};

    fn x(i: usize, j: usize) -> VarId {
        VarId::order(i, j)
    }

    fn chain(v: &[usize]) -> CanonicalTerm {
        CanonicalTerm::new(v.to_vec()).unwrap()
    }

    #[test]
    fn m_axiom_values() {
        for n in 3..=8 {
            let e = PeEngine::new(n);
            let m1 = lop(n).unwrap().require("M1").unwrap().clone();
            assert_eq!(e.pe_dnf(&m1).unwrap(), frac(n as i64 - 3, 2));
            assert_eq!(e.pe_poly(&m1.to_poly()).unwrap(), frac(n as i64 - 3, 2));
        }
        let e = PeEngine::new(5);
        assert_eq!(e.pe_chain(&chain(&[3, 1, 2])).unwrap(), frac(1, 6));
        assert_eq!(e.pe_conjunct(&chain(&[3, 1, 2]).to_conjunct()).unwrap(), frac(1, 6));
        assert_eq!(e.pe_poly(&Polynomial::one()).unwrap(), int(1));
    }

    #[test]
    fn report_counts() {
        let e = PeEngine::new(4);
        let r = e.report(&Polynomial::var(x(1, 2))).unwrap();
        assert_eq!(r.value, frac(1, 2));
        assert_eq!(r.breakdown[0].orders, BigUint::from(12u32));
        assert_eq!(r.universe_size, BigUint::from(24u32));
        assert!(e.pe_poly(&Polynomial::var(VarId::plain(1))).is_err());
    }

    #[test]
    fn kfact_examples() {
        let w = lop(4).unwrap().require("M1").unwrap().clone();
        let nd = normalize_dnf(&w, 4, Padding::Minimal).unwrap();
        let r = kfact_criterion(&nd);
        assert_eq!(r.pe, frac(1, 2));
        assert_eq!(r.terms, 3);
        let single = NormalizedDnf::new(2, vec![chain(&[2, 1])]).unwrap();
        assert_eq!(kfact_criterion(&single).pe, frac(-1, 2));
        let ov = overcount_identity(&nd, 4, &PeEngine::new(4)).unwrap();
        assert!(ov.holds);
        assert_eq!(ov.rejected, 6);
    }

    #[test]
    fn uniform_pe_conditions_small() {
        let fam = lop(5).unwrap();
        let e = PeEngine::new(5);
        let r = check_conditions(&fam, 1, &e, &Limits::default()).unwrap();
        assert!(r.passed, "{r:?}");
        // pe[M1 x12] = (n-2)/6 - 1/2 < 0 for n = 4.
        let fam = lop(4).unwrap();
        let r = check_conditions(&fam, 2, &PeEngine::new(4), &Limits::default()).unwrap();
        assert!(!r.passed);
        assert_eq!(r.violation.unwrap().condition, 3);
    }

    #[test]
    fn basis_sizes() {
        let l = Limits::default();
        assert_eq!(basis_conjuncts(&Universe::orders(3), 2, &l).unwrap().len(), 1 + 9 + 36);
        assert_eq!(basis_conjuncts(&Universe::plain(2), 2, &l).unwrap().len(), 1 + 4 + 4);
    }

    #[test]
    fn hitting_observations() {
        // 3x3 with q = 4 off-diagonal ones.
        let h = [false, true, true, true, false, false, false, true, false];
        assert!(count_hitting_pairs(3, &h) as i64 >= 4 - 3);
        let m1 = lop(5).unwrap().require("M1").unwrap().clone();
        let nd = normalize_dnf(&m1, 5, Padding::Minimal).unwrap();
        // N = {[[i 1]] : i = 2..5} accepts everything but 1z; every pair is hitting.
        let hm = pair_matrix(&nd, &[2, 3, 4, 5], 5).unwrap();
        assert_eq!(hm.hits.len(), 6);
        assert!(hm.bound_holds);
        for (a, b) in pair_overcounts(&nd, &hm).unwrap() {
            assert!(a >= 2 && b >= 2);
        }
        assert!(pair_matrix(&nd, &[2, 3, 4], 5).is_err());
    }

    #[test]
    fn m1_scan_small() {
        let l = Limits::default();
        assert!(!scan_m1_weakenings(4, 2, &l).unwrap().negative_exists());
        assert!(!scan_m1_weakenings(5, 3, &l).unwrap().negative_exists());
        let w = lop(5).unwrap().require("M1").unwrap().clone();
        let nd = normalize_dnf(&w, 5, Padding::Minimal).unwrap();
        let e = PeEngine::new(5);
        let r = verify_m1_nonneg(&nd, &chain(&[1]), 5, &e).unwrap();
        assert!(r.nonnegative && r.identity_holds);
        assert_eq!(r.pe, frac(1, 1));
        let bad = NormalizedDnf::new(2, vec![chain(&[2, 1])]).unwrap();
        assert!(verify_m1_nonneg(&bad, &chain(&[1]), 5, &e).is_err());
    }
}
