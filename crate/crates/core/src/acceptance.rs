//! The acceptance experiments. Each criterion returns a table and a verdict; the
//! `report` command and the acceptance test target both run them from here.

use std::collections::BTreeSet;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{ConicalJunta, Conjunct, Dnf, Universe, VarId};
use crate::covering::{
    cover_to_dnf, hunt_sub_factorial, min_cover, CoverInstance, CoverUniverse, HuntOutcome,
};
use crate::formulas::{least_number, least_number_refutation, lop, lop_kind, Axiom, AxiomFamily};
use crate::normalize::{merge, normalize_dnf, NormalizedDnf, Padding};
use crate::order::{all_orders, count_consistent, factorial, factorial_u64, par_fold_orders, CanonicalTerm, TotalOrder};
use crate::pe::{
    check_conditions, count_hitting_pairs, count_hitting_triples, kfact_criterion, overcount_identity,
    pair_matrix, pair_overcounts, scan_m1_weakenings, triple_array, PeEngine,
};
use crate::ratio::{format, frac, int};
use crate::reductions::{
    check_formulation, factorize, random_formulation, transform_sa_proof, Formulation, SearchProblem,
};
use crate::sa::{check_sa_proof, check_weakening, lp_degree_oracle, verify_oracle_result, OracleVerdict, SAProof};
use crate::{oracle, Limits, Result};

/// Seed and caps shared by every criterion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub limits: Limits,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 20_240_601,
            limits: Limits::default(),
        }
    }
}

impl SuiteConfig {
    fn rng(&self, criterion: u8) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ (u64::from(criterion) << 56))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub summary: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Wall-clock time; left out of serialized reports so they stay reproducible.
    #[serde(skip)]
    pub seconds: f64,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {}  {} ({}; {:.1}s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.summary,
            self.seconds
        )
    }

    /// Tab-separated table with a header row.
    pub fn tsv(&self) -> String {
        let mut out = self.columns.join("\t");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join("\t"));
            out.push('\n');
        }
        out
    }
}

struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn finish(self, id: u8, title: &str, passed: bool, summary: String, start: Instant) -> CriterionOutcome {
        CriterionOutcome {
            id,
            title: title.to_string(),
            passed,
            summary,
            columns: self.columns,
            rows: self.rows,
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

fn yes(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}

pub const CRITERIA: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

pub fn run(id: u8, cfg: &SuiteConfig) -> Result<CriterionOutcome> {
    match id {
        1 => criterion_1(cfg),
        2 => criterion_2(cfg),
        3 => criterion_3(cfg),
        4 => criterion_4(cfg),
        5 => criterion_5(cfg),
        6 => criterion_6(cfg),
        7 => criterion_7(cfg),
        8 => criterion_8(cfg),
        9 => criterion_9(cfg),
        10 => criterion_10(cfg),
        _ => Err(crate::Error::invalid(format!("no criterion {id}"))),
    }
}

pub fn run_all(cfg: &SuiteConfig) -> Result<Vec<CriterionOutcome>> {
    CRITERIA.iter().map(|&id| run(id, cfg)).collect()
}

// ---------------------------------------------------------------------------------
// Random instances.

/// A chain on a random `k`-subset of `[n]`. With `with_one` the subset contains 1, and
/// with `one_first` 1 is listed first.
pub fn random_chain<R: Rng>(rng: &mut R, n: usize, k: usize, with_one: bool, one_first: bool) -> CanonicalTerm {
    let mut pool: Vec<usize> = (if with_one { 2 } else { 1 }..=n).collect();
    pool.shuffle(rng);
    let mut s: Vec<usize> = pool.into_iter().take(if with_one { k - 1 } else { k }).collect();
    if with_one {
        s.push(1);
    }
    s.shuffle(rng);
    if with_one && one_first {
        let p = s.iter().position(|&e| e == 1).expect("1 was added");
        s.remove(p);
        s.insert(0, 1);
    }
    CanonicalTerm::new(s).expect("distinct elements")
}

/// A normalized DNF on `[n]` with support size `k` and up to `max_terms` distinct terms.
pub fn random_normalized<R: Rng>(rng: &mut R, n: usize, k: usize, max_terms: usize) -> NormalizedDnf {
    let want = rng.gen_range(1..=max_terms);
    let mut terms = BTreeSet::new();
    for _ in 0..4 * want {
        if terms.len() == want {
            break;
        }
        terms.insert(random_chain(rng, n, k, true, false));
    }
    NormalizedDnf::new(k, terms.into_iter().collect()).expect("chains contain 1")
}

fn random_order_literal<R: Rng>(rng: &mut R, n: usize) -> (VarId, bool) {
    let i = rng.gen_range(1..=n);
    let mut j = rng.gen_range(1..n);
    if j >= i {
        j += 1;
    }
    (VarId::order(i, j), rng.gen_bool(0.5))
}

/// A conjunct of `deg` random off-diagonal order literals (fewer if some collide).
pub fn random_order_conjunct<R: Rng>(rng: &mut R, n: usize, deg: usize) -> Conjunct {
    Conjunct::from_literals((0..deg).map(|_| random_order_literal(rng, n)))
}

/// A DNF over order variables with up to `max_terms` terms of degree at most `max_deg`.
pub fn random_order_dnf<R: Rng>(rng: &mut R, n: usize, max_deg: usize, max_terms: usize) -> Dnf {
    let terms = (0..rng.gen_range(1..=max_terms))
        .map(|_| {
            let d = rng.gen_range(1..=max_deg);
            random_order_conjunct(rng, n, d)
        })
        .collect();
    Dnf::new(terms)
}

/// A junta of up to three order conjuncts of degree at most `max_deg` with small
/// positive rational weights.
pub fn random_junta<R: Rng>(rng: &mut R, n: usize, max_deg: usize) -> ConicalJunta {
    let mut j = ConicalJunta::empty();
    for _ in 0..rng.gen_range(1..=3) {
        let d = rng.gen_range(0..=max_deg);
        let w = frac(rng.gen_range(1..=5), rng.gen_range(1..=3));
        j.push(random_order_conjunct(rng, n, d), w);
    }
    j
}

/// A `Sigma_2`-weakening of `d`: each term may lose literals, and up to two random
/// terms are added.
pub fn random_weakening<R: Rng>(rng: &mut R, d: &Dnf, n: usize) -> Dnf {
    let mut terms: Vec<Conjunct> = d
        .terms
        .iter()
        .map(|t| Conjunct::from_literals(t.literals().filter(|_| !rng.gen_bool(0.3))))
        .collect();
    for _ in 0..rng.gen_range(0..=2) {
        let deg = rng.gen_range(1..=2);
        terms.push(random_order_conjunct(rng, n, deg));
    }
    terms.shuffle(rng);
    Dnf::new(terms)
}

/// An unsatisfiable family on `m` plain variables, grown one random axiom at a time.
pub fn random_unsat_family<R: Rng>(rng: &mut R, m: usize, name: &str) -> AxiomFamily {
    loop {
        let mut axioms: Vec<Axiom> = Vec::new();
        for k in 0..40 {
            let terms = (0..rng.gen_range(1..=2))
                .map(|_| {
                    let deg = rng.gen_range(1..=m.min(2));
                    Conjunct::from_literals(
                        (0..deg).map(|_| (VarId::plain(rng.gen_range(1..=m)), rng.gen_bool(0.5))),
                    )
                })
                .collect();
            axioms.push(Axiom {
                label: format!("D{k}"),
                dnf: Dnf::new(terms),
            });
            let fam = AxiomFamily::new(name, Universe::plain(m), axioms.clone()).expect("plain variables in range");
            if fam.find_satisfying(m).expect("few variables").is_none() {
                return fam;
            }
        }
    }
}

// ---------------------------------------------------------------------------------

fn criterion_1(cfg: &SuiteConfig) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut t = Table::new(&["n", "(n-3)/2", "engine", "enumeration (DNF)", "enumeration (poly, M1)", "ok"]);
    let mut all = true;
    for n in 3..=8 {
        let fam = lop(n)?;
        let e = PeEngine::with_limits(n, cfg.limits.clone());
        let closed = frac(n as i64 - 3, 2);
        let mut engine_ok = true;
        let mut enum_ok = true;
        for i in 1..=n {
            let m = fam.require(&format!("M{i}"))?;
            engine_ok &= e.pe_dnf(m)? == closed;
            enum_ok &= oracle::pe_dnf(m, n, &cfg.limits)? == closed;
        }
        let poly = oracle::pe_poly(&fam.require("M1")?.to_poly(), n, &cfg.limits)?;
        let ok = engine_ok && enum_ok && poly == closed;
        all &= ok;
        t.push(vec![
            n.to_string(),
            format(&closed),
            yes(engine_ok),
            yes(enum_ok),
            format(&poly),
            yes(ok),
        ]);
    }
    Ok(t.finish(1, "pe[M_i] = (n-3)/2, n = 3..8", all, "every M_i, three routes".into(), start))
}

fn criterion_2(cfg: &SuiteConfig) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut rng = cfg.rng(2);
    let mut t = Table::new(&["n", "k", "chains", "1/k!", "engine", "n!/k! count", "enumeration", "ok"]);
    let mut all = true;
    let mut total = 0;
    for n in 2..=8 {
        let e = PeEngine::with_limits(n, cfg.limits.clone());
        for k in 2..=n {
            let mut chains: Vec<CanonicalTerm> = vec![
                CanonicalTerm::new((1..=k).collect())?,
                CanonicalTerm::new((1..=k).rev().collect())?,
                CanonicalTerm::new((n + 1 - k..=n).collect())?,
            ];
            for _ in 0..5 {
                chains.push(random_chain(&mut rng, n, k, false, false));
            }
            let expect = BigRational::new(BigInt::one(), BigInt::from(factorial(k)));
            let count = factorial(n) / factorial(k);
            let engine_ok = chains
                .iter()
                .map(|c| e.pe_chain(c))
                .collect::<Result<Vec<_>>>()?
                .iter()
                .all(|v| *v == expect);
            let count_ok = chains
                .iter()
                .map(|c| count_consistent(c, n))
                .collect::<Result<Vec<_>>>()?
                .iter()
                .all(|v| *v == count);
            let counts = par_fold_orders(
                n,
                &cfg.limits,
                vec![0u64; chains.len()],
                |mut acc, z| {
                    for (a, c) in acc.iter_mut().zip(&chains) {
                        *a += u64::from(c.accepts(z));
                    }
                    acc
                },
                |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
            )?;
            let enum_ok = counts.iter().all(|&c| num_bigint::BigUint::from(c) == count);
            let ok = engine_ok && count_ok && enum_ok;
            all &= ok;
            total += chains.len();
            t.push(vec![
                n.to_string(),
                k.to_string(),
                chains.len().to_string(),
                format(&expect),
                yes(engine_ok),
                yes(count_ok),
                yes(enum_ok),
                yes(ok),
            ]);
        }
    }
    Ok(t.finish(
        2,
        "pe[[S]]_pi = 1/k!, 2 <= k <= n <= 8",
        all,
        format!("{total} chains"),
        start,
    ))
}

fn criterion_3(cfg: &SuiteConfig) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut rng = cfg.rng(3);
    let samples = 1200;
    let mut t = Table::new(&["n", "samples", "pe < 0", "k!-criterion ok", "enumeration ok", "over-count ok"]);
    let mut all = true;
    let mut stats = [(0usize, 0usize, 0usize, 0usize, 0usize); 7];
    let engines: Vec<PeEngine> = (0..=6).map(|n| PeEngine::with_limits(n, cfg.limits.clone())).collect();
    for _ in 0..samples {
        let n = rng.gen_range(3..=6);
        let k = rng.gen_range(2..=n.min(4));
        let max_terms = factorial_u64(k) as usize + 2;
        let nd = random_normalized(&mut rng, n, k, max_terms);
        let e = &engines[n];
        let kf = kfact_criterion(&nd);
        let pe = e.pe_normalized(&nd)?;
        let sign_ok = pe.is_negative() == (nd.len() < factorial_u64(k) as usize);
        let kfact_ok = pe == kf.pe && sign_ok;
        let enum_ok = oracle::pe_dnf(&nd.to_dnf(), n, &cfg.limits)? == pe;
        let over_ok = overcount_identity(&nd, n, e)?.holds;
        let s = &mut stats[n];
        s.0 += 1;
        s.1 += usize::from(pe.is_negative());
        s.2 += usize::from(kfact_ok);
        s.3 += usize::from(enum_ok);
        s.4 += usize::from(over_ok);
        all &= kfact_ok && enum_ok && over_ok;
    }
    for (n, s) in stats.iter().enumerate().skip(3) {
        t.push(vec![
            n.to_string(),
            s.0.to_string(),
            s.1.to_string(),
            format!("{}/{}", s.2, s.0),
            format!("{}/{}", s.3, s.0),
            format!("{}/{}", s.4, s.0),
        ]);
    }
    Ok(t.finish(
        3,
        "k!-criterion and over-count identity on random normalized DNFs",
        all,
        format!("{samples} samples, n <= 6"),
        start,
    ))
}

fn criterion_4(cfg: &SuiteConfig) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut rng = cfg.rng(4);
    let samples = 600;
    let engines: Vec<PeEngine> = (0..=6).map(|n| PeEngine::with_limits(n, cfg.limits.clone())).collect();
    let mut orders: Vec<Vec<TotalOrder>> = vec![Vec::new(); 7];
    for (n, slot) in orders.iter_mut().enumerate().skip(3) {
        *slot = all_orders(n, &cfg.limits)?.collect();
    }
    let mut counts = [0usize; 6];
    let mut all = true;
    for _ in 0..samples {
        let n = rng.gen_range(3..=6);
        let w = random_order_dnf(&mut rng, n, 3, 4);
        let e = &engines[n];
        let pe_w = e.pe_dnf(&w)?;
        let pe_enum = oracle::pe_dnf(&w, n, &cfg.limits)?;
        let mut paddings = vec![Padding::Minimal];
        if 2 * w.degree() < n {
            paddings.push(Padding::TwiceDegreePlusOne);
        }
        let mut accepts_ok = true;
        let mut pe_ok = pe_w == pe_enum;
        let mut size_ok = true;
        let mut merge_ok = true;
        for padding in paddings {
            let nd = normalize_dnf(&w, n, padding)?;
            size_ok &= nd.k <= 2 * w.degree() + 1;
            pe_ok &= e.pe_normalized(&nd)? == pe_w;
            accepts_ok &= orders[n].iter().all(|z| nd.accepts(z) == w.eval(z));
            let len = rng.gen_range(1..=3.min(n));
            let tm = random_chain(&mut rng, n, len, true, true);
            let merged = merge(&nd, &tm, n)?;
            let lhs = e.pe_product(&nd.to_dnf(), &tm.to_conjunct())?;
            let rhs = e.pe_normalized(&merged)? + BigRational::one() - e.pe_chain(&tm)?;
            merge_ok &= lhs == rhs;
            merge_ok &= orders[n].iter().all(|z| merged.accepts(z) == (nd.accepts(z) && tm.accepts(z)));
            counts[5] += 1;
        }
        counts[0] += 1;
        counts[1] += usize::from(accepts_ok);
        counts[2] += usize::from(pe_ok);
        counts[3] += usize::from(size_ok);
        counts[4] += usize::from(merge_ok);
        all &= accepts_ok && pe_ok && size_ok && merge_ok;
    }
    let mut t = Table::new(&["check", "passed", "of"]);
    for (name, k) in [
        ("accepted orders preserved", 1),
        ("pe preserved (engine = enumeration)", 2),
        ("support size <= 2d+1", 3),
        ("merge: pe[N t] = pe[N' + 1 - t], same accepted orders", 4),
    ] {
        t.push(vec![name.to_string(), counts[k].to_string(), counts[0].to_string()]);
    }
    t.push(vec!["normalizations run".into(), counts[5].to_string(), "".into()]);
    Ok(t.finish(
        4,
        "normalization preserves orders and pe; merge identity",
        all,
        format!("{samples} random DNFs of degree <= 3, n <= 6"),
        start,
    ))
}

fn criterion_5(cfg: &SuiteConfig) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut rng = cfg.rng(5);
    let samples = 600;
    let families: Vec<AxiomFamily> = (3..=6).map(lop).collect::<Result<_>>()?;
    let engines: Vec<PeEngine> = (3..=6).map(|n| PeEngine::with_limits(n, cfg.limits.clone())).collect();
    let kinds = ['R', 'A', 'T', 'O'];
    let mut per: Vec<(usize, Option<BigRational>, bool)> = vec![(0, None, true); kinds.len()];
    let mut all = true;
    for _ in 0..samples {
        let idx = rng.gen_range(0..families.len());
        let (fam, e, n) = (&families[idx], &engines[idx], idx + 3);
        let non_m: Vec<&Axiom> = fam.axioms.iter().filter(|a| lop_kind(&a.label) != Some('M')).collect();
        let ax = non_m[rng.gen_range(0..non_m.len())];
        let w = random_weakening(&mut rng, &ax.dnf, n);
        check_weakening(fam, [(ax.label.as_str(), &w)], &cfg.limits)?;
        let j = random_junta(&mut rng, n, 3);
        let v = e.pe_dnf_junta(&w, &j)?;
        let kind = lop_kind(&ax.label).expect("LOP label");
        let slot = &mut per[kinds.iter().position(|&k| k == kind).expect("non-M kind")];
        slot.0 += 1;
        slot.1 = Some(match slot.1.take() {
            Some(m) if m <= v => m,
            _ => v.clone(),
        });
        let ok = !v.is_negative();
        slot.2 &= ok;
        all &= ok;
    }
    let mut t = Table::new(&["axiom kind", "samples", "min pe[W J]", "all >= 0"]);
    for (k, s) in kinds.iter().zip(&per) {
        t.push(vec![
            k.to_string(),
            s.0.to_string(),
            s.1.as_ref().map(format).unwrap_or_default(),
            yes(s.2),
        ]);
    }
    Ok(t.finish(
        5,
        "pe[W J] >= 0 for weakenings of non-M axioms",
        all,
        format!("{samples} weakening/junta pairs, n <= 6"),
        start,
    ))
}

fn random_pair_entries<R: Rng>(rng: &mut R, m: usize) -> Vec<bool> {
    let p = rng.gen_range(0.05..0.95);
    let mut e = vec![false; m * m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                e[i * m + j] = rng.gen_bool(p);
            }
        }
    }
    e
}

/// Entries symmetric in the last two indices and zero off distinct triples, the shape
/// `triple_array` produces.
fn random_triple_entries<R: Rng>(rng: &mut R, m: usize) -> Vec<bool> {
    let p = rng.gen_range(0.05..0.95);
    let mut e = vec![false; m * m * m];
    for i in 0..m {
        for j in 0..m {
            for k in j + 1..m {
                if i != j && i != k && rng.gen_bool(p) {
                    e[(i * m + j) * m + k] = true;
                    e[(i * m + k) * m + j] = true;
                }
            }
        }
    }
    e
}

fn random_z<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut z: Vec<usize> = (2..=n).collect();
    z.shuffle(rng);
    z
}

fn criterion_6(cfg: &SuiteConfig) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut rng = cfg.rng(6);
    let mut t = Table::new(&["source", "kind", "samples", "bound holds", "min slack (hits - bound)"]);
    let mut all = true;
    let record = |t: &mut Table, source: &str, kind: &str, results: &[(bool, BigRational)]| {
        let ok = results.iter().filter(|r| r.0).count();
        let slack = results.iter().map(|r| r.1.clone()).min().unwrap_or_else(BigRational::zero);
        t.push(vec![
            source.into(),
            kind.into(),
            results.len().to_string(),
            ok.to_string(),
            format(&slack),
        ]);
        ok == results.len()
    };

    let mut res = Vec::new();
    for _ in 0..500 {
        let m = rng.gen_range(2..=8);
        let e = random_pair_entries(&mut rng, m);
        let q = e.iter().filter(|&&b| b).count();
        let h = count_hitting_pairs(m, &e);
        let bound = q as i64 - crate::order::binomial(m, 2) as i64;
        res.push((h as i64 >= bound, int(h as i64 - bound)));
    }
    all &= record(&mut t, "random", "pairs", &res);

    let mut res = Vec::new();
    for _ in 0..500 {
        let m = rng.gen_range(3..=7);
        let e = random_triple_entries(&mut rng, m);
        let q = e.iter().filter(|&&b| b).count() as i64;
        let h = count_hitting_triples(m, &e) as i64;
        let c = crate::order::binomial(m, 3) as i64;
        res.push((2 * h >= q - 4 * c, frac(2 * h - q + 4 * c, 2)));
    }
    all &= record(&mut t, "random", "triples", &res);

    // From normalized DNFs rejecting the order 1z.
    let mut res = Vec::new();
    let mut overcount_ok = true;
    for _ in 0..300 {
        let n = rng.gen_range(4..=6);
        let k = rng.gen_range(2..=3);
        let nd = random_normalized(&mut rng, n, k, 30);
        let z = random_z(&mut rng, n);
        let one_z = TotalOrder::concat(&[1], &z)?;
        let nd = NormalizedDnf::new(k, nd.terms.into_iter().filter(|s| !s.accepts(&one_z)).collect())?;
        let h = pair_matrix(&nd, &z, n)?;
        let agree = count_hitting_pairs(h.index.len(), &h.entries) == h.hits.len();
        overcount_ok &= pair_overcounts(&nd, &h)?.iter().all(|&(a, b)| a >= 2 && b >= 2);
        res.push((h.bound_holds && agree, int(h.hits.len() as i64) - &h.bound));
    }
    all &= record(&mut t, "normalized DNF", "pairs", &res);
    all &= overcount_ok;

    let mut res = Vec::new();
    for _ in 0..300 {
        let n = rng.gen_range(5..=6);
        let k = rng.gen_range(2..=3);
        let nd = random_normalized(&mut rng, n, k, 30);
        let len = rng.gen_range(1..=2);
        let t_star = random_chain(&mut rng, n, len, true, true);
        // Reorder z so that 1z agrees with t*.
        let mut z = random_z(&mut rng, n);
        let tail: Vec<usize> = t_star.seq()[1..].to_vec();
        let slots: Vec<usize> = z.iter().enumerate().filter(|(_, e)| tail.contains(e)).map(|(p, _)| p).collect();
        for (p, &e) in slots.iter().zip(&tail) {
            z[*p] = e;
        }
        let one_z = TotalOrder::concat(&[1], &z)?;
        let nd = NormalizedDnf::new(k, nd.terms.into_iter().filter(|s| !s.accepts(&one_z)).collect())?;
        let merged = merge(&nd, &t_star, n)?;
        let h = triple_array(&merged, &t_star, &z, n)?;
        let agree = count_hitting_triples(h.index.len(), &h.entries) == h.hits.len();
        res.push((h.bound_holds && agree, int(h.hits.len() as i64) - &h.bound));
    }
    all &= record(&mut t, "merged normalized DNF", "triples", &res);
    t.push(vec![
        "normalized DNF".into(),
        "hit pairs accepted >= 2 times both ways".into(),
        "300".into(),
        yes(overcount_ok),
        "".into(),
    ]);
    Ok(t.finish(
        6,
        "hitting pairs >= q - C(m,2), hitting triples >= (q - 4 C(m,3))/2",
        all,
        "1600 matrices/arrays".into(),
        start,
    ))
}

fn criterion_7(cfg: &SuiteConfig) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut t = Table::new(&["n", "verifies to -1", "degree", "unary size", "degree + log2 size"]);
    let mut all = true;
    for n in 1..=16 {
        let fam = least_number(n)?;
        let proof = least_number_refutation(n)?;
        let (ok, row) = match check_sa_proof(&fam, &proof, &cfg.limits) {
            Ok(m) => (
                m.degree <= 1,
                vec![
                    n.to_string(),
                    "yes".into(),
                    m.degree.to_string(),
                    m.unary_size.clone().unwrap_or_default(),
                    m.complexity.map(|c| format!("{c:.3}")).unwrap_or_default(),
                ],
            ),
            Err(e) => (false, vec![n.to_string(), format!("no: {e}"), "".into(), "".into(), "".into()]),
        };
        all &= ok;
        t.push(row);
    }
    Ok(t.finish(7, "LeastNumber certificate, n = 1..16", all, "degree <= 1".into(), start))
}

/// A refutation of `p`'s false-formula family: the built-in one for LeastNumber,
/// otherwise the first degree at which the LP oracle finds one.
fn refutation_for(p: &SearchProblem, ln: Option<usize>, limits: &Limits) -> Result<SAProof> {
    if let Some(n) = ln {
        return least_number_refutation(n);
    }
    let fam = p.to_family()?;
    for d in 1..=p.input_bits.max(1) {
        let r = lp_degree_oracle(&fam, d, limits)?;
        if let Some(proof) = r.refutation {
            return Ok(proof);
        }
    }
    Err(crate::Error::invalid(format!("`{}` has no refutation up to its size", p.name)))
}

fn criterion_8(cfg: &SuiteConfig) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut rng = cfg.rng(8);
    let mut sources: Vec<(SearchProblem, Option<usize>)> = Vec::new();
    for n in 2..=5 {
        sources.push((SearchProblem::from_family(&least_number(n)?)?, Some(n)));
    }
    for k in 0..4 {
        let m = 2 + k % 3;
        let fam = random_unsat_family(&mut rng, m, &format!("rand{k}"));
        sources.push((SearchProblem::from_family(&fam)?, None));
    }
    let targets: Vec<(SearchProblem, SAProof)> = sources
        .iter()
        .filter(|(p, _)| p.input_bits <= 3)
        .map(|(p, ln)| Ok((p.clone(), refutation_for(p, *ln, &cfg.limits)?)))
        .collect::<Result<_>>()?;
    let samples = 120;
    let mut t = Table::new(&["Q", "R", "samples", "factorize ok", "composite = phi", "transform ok", "max degree / bound"]);
    // samples, factorize ok, composite ok, transform ok, worst degree, its bound
    type Tally = (usize, usize, usize, usize, usize, usize);
    let mut rows: std::collections::BTreeMap<(String, String), Tally> = Default::default();
    let mut all = true;
    for _ in 0..samples {
        let (q, _) = &sources[rng.gen_range(0..sources.len())];
        let (r, refutation) = &targets[rng.gen_range(0..targets.len())];
        let f_depth = rng.gen_range(1..=2);
        let phi: Formulation = random_formulation(&mut rng, q, r, f_depth, &cfg.limits)?;
        let valid = check_formulation(q, r, &phi, &cfg.limits)?.is_none();
        let fac = factorize(q, r, &phi, &cfg.limits);
        let fac_ok = valid && fac.is_ok();
        let same = match &fac {
            Ok(f) => {
                let c = f.compose();
                (0..1u64 << q.input_bits).all(|code| {
                    let x = crate::algebra::PlainBits::from_code(code, q.input_bits);
                    c.apply_f(&x) == phi.apply_f(&x)
                        && (0..r.outputs.len()).all(|b| c.g[b].eval(&x) == phi.g[b].eval(&x))
                })
            }
            Err(_) => false,
        };
        let tr = transform_sa_proof(q, r, &phi, refutation, &cfg.limits);
        let (tr_ok, deg, bound) = match &tr {
            Ok(out) => (out.metrics.degree <= out.degree_bound, out.metrics.degree, out.degree_bound),
            Err(_) => (false, 0, 0),
        };
        let row = rows.entry((q.name.clone(), r.name.clone())).or_default();
        row.0 += 1;
        row.1 += usize::from(fac_ok);
        row.2 += usize::from(same);
        row.3 += usize::from(tr_ok);
        if deg * row.5.max(1) >= row.4 * bound.max(1) {
            row.4 = deg;
            row.5 = bound;
        }
        all &= fac_ok && same && tr_ok;
    }
    for ((q, r), s) in rows {
        t.push(vec![
            q,
            r,
            s.0.to_string(),
            s.1.to_string(),
            s.2.to_string(),
            s.3.to_string(),
            format!("{}/{}", s.4, s.5),
        ]);
    }
    Ok(t.finish(
        8,
        "factorization and SA pull-back on random valid formulations",
        all,
        format!("{samples} formulations, <= 5 input bits"),
        start,
    ))
}

fn criterion_9(cfg: &SuiteConfig) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut rng = cfg.rng(9);
    let mut t = Table::new(&[
        "family",
        "d",
        "LP",
        "columns",
        "pivots",
        "answer verifies",
        "uniform PE conditions",
    ]);
    let mut all = true;
    let mut uniform_failures = Vec::new();
    for (n, d) in [(3, 1), (3, 2), (4, 1), (4, 2)] {
        let fam = lop(n)?;
        let r = lp_degree_oracle(&fam, d, &cfg.limits)?;
        let verdict = verify_oracle_result(&fam, &r, &cfg.limits)?;
        let ok = verdict.is_valid();
        all &= ok;
        let uniform = if r.feasible {
            "n/a (refutable)".to_string()
        } else {
            let rep = check_conditions(&fam, d, &PeEngine::with_limits(n, cfg.limits.clone()), &cfg.limits)?;
            if !rep.passed {
                all = false;
                uniform_failures.push(format!("lop({n}) d={d}"));
            }
            match rep.violation {
                None => "pass".to_string(),
                Some(v) => format!(
                    "FAIL: condition {} on {} * {} = {}",
                    v.condition,
                    v.axiom.unwrap_or_default(),
                    v.conjunct,
                    format(&v.value)
                ),
            }
        };
        t.push(vec![
            fam.name.clone(),
            d.to_string(),
            if r.feasible { "refutation" } else { "dual" }.into(),
            r.columns.to_string(),
            r.pivots.to_string(),
            yes(ok),
            uniform,
        ]);
    }
    let mut random_ok = 0;
    for k in 0..20 {
        let m = 2 + k % 2;
        let fam = random_unsat_family(&mut rng, m, &format!("random{k}"));
        let d = 1 + k % 2;
        let r = lp_degree_oracle(&fam, d, &cfg.limits)?;
        let verdict = verify_oracle_result(&fam, &r, &cfg.limits)?;
        let exactly_one = r.refutation.is_some() != r.dual.is_some();
        let ok = verdict.is_valid() && exactly_one;
        random_ok += usize::from(ok);
        all &= ok;
        t.push(vec![
            format!("{} ({} axioms, m={m})", fam.name, fam.len()),
            d.to_string(),
            match verdict {
                OracleVerdict::Refutation(_) => "refutation",
                OracleVerdict::Dual(_) => "dual",
            }
            .into(),
            r.columns.to_string(),
            r.pivots.to_string(),
            yes(ok),
            "".into(),
        ]);
    }
    let summary = if uniform_failures.is_empty() {
        format!("LOP answers verified; {random_ok}/20 random families verified")
    } else {
        format!(
            "uniform PE fails where the LP is infeasible: {}; {random_ok}/20 random families verified",
            uniform_failures.join(", ")
        )
    };
    Ok(t.finish(9, "LP duality and the uniform-order PE", all, summary, start))
}

fn criterion_10(cfg: &SuiteConfig) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut t = Table::new(&["universe", "n", "d", "min cover", "d!", "check", "ok"]);
    let mut all = true;
    for n in 2..=6 {
        for d in 2..=n {
            let r = min_cover(&CoverInstance::new(n, d, CoverUniverse::Ord), &cfg.limits)?;
            let df = factorial_u64(d) as usize;
            let ok = r.min == Some(df);
            all &= ok;
            t.push(vec![
                "Ord".into(),
                n.to_string(),
                d.to_string(),
                r.min.map(|m| m.to_string()).unwrap_or_default(),
                df.to_string(),
                "= d!".into(),
                yes(ok),
            ]);
        }
    }
    for n in 3..=7 {
        let r = min_cover(&CoverInstance::new(n, 2, CoverUniverse::OrdStar), &cfg.limits)?;
        let ok = r.min.is_some_and(|m| m >= 2);
        all &= ok;
        t.push(vec![
            "Ord*1".into(),
            n.to_string(),
            "2".into(),
            r.min.map(|m| m.to_string()).unwrap_or_default(),
            "2".into(),
            ">= d!".into(),
            yes(ok),
        ]);
    }
    // Anchored covers are normalized weakenings of M1; compare with the PE scan.
    for (n, d) in [(3, 2), (4, 2), (5, 2), (4, 3), (5, 3), (6, 3)] {
        let free = min_cover(&CoverInstance::new(n, d, CoverUniverse::OrdStar), &cfg.limits)?;
        let anchored = min_cover(&CoverInstance::new(n, d, CoverUniverse::OrdStar).anchored(), &cfg.limits)?;
        let scan = scan_m1_weakenings(n, d, &cfg.limits)?;
        let df = factorial_u64(d) as usize;
        let below = anchored.min.is_some_and(|m| m < df);
        let mut ok = below == scan.negative_exists();
        let nd = cover_to_dnf(&anchored.cover)?;
        let pe = PeEngine::with_limits(n, cfg.limits.clone()).pe_normalized(&nd)?;
        ok &= pe.is_negative() == below;
        all &= ok;
        t.push(vec![
            "Ord*1 (free / anchored)".into(),
            n.to_string(),
            d.to_string(),
            format!(
                "{} / {}",
                free.min.map(|m| m.to_string()).unwrap_or_default(),
                anchored.min.map(|m| m.to_string()).unwrap_or_default()
            ),
            df.to_string(),
            format!(
                "scan finds pe < 0: {}; witness pe = {}",
                yes(scan.negative_exists()),
                format(&pe)
            ),
            yes(ok),
        ]);
    }
    let (hunt, nodes) = hunt_sub_factorial(6, 3, false, 5_000_000, &cfg.limits)?;
    t.push(vec![
        "Ord*1 hunt below d!".into(),
        "6".into(),
        "3".into(),
        match &hunt {
            HuntOutcome::Found(c) => format!("found {}", c.len()),
            HuntOutcome::NoneExists => "none exists".into(),
            HuntOutcome::Unknown => "unknown".into(),
        },
        "6".into(),
        format!("{nodes} nodes"),
        "recorded".into(),
    ]);
    Ok(t.finish(
        10,
        "permutation covering: Ord, Ord*1 and the PE equivalence",
        all,
        "exact branch and bound".into(),
        start,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_respect_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let c = random_chain(&mut rng, 6, 3, true, true);
            assert_eq!(c.first(), 1);
            assert_eq!(c.support_size(), 3);
            let nd = random_normalized(&mut rng, 5, 3, 8);
            assert!(nd.validate().is_ok());
            let fam = random_unsat_family(&mut rng, 3, "t");
            assert!(fam.find_satisfying(3).unwrap().is_none());
        }
    }

    #[test]
    fn weakenings_are_implied() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let fam = lop(4).unwrap();
        for ax in &fam.axioms {
            let w = random_weakening(&mut rng, &ax.dnf, 4);
            assert!(oracle::implies(&ax.dnf, &w, &Limits::default()).unwrap());
        }
    }
}
