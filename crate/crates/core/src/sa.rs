//! Sherali-Adams certificates over weakened axioms: the checker, boolean weakening
//! validation, and the exact LP degree oracle.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{ConicalJunta, Conjunct, Dnf, Monomial, PartialAssignment, Polynomial, VarId};
use crate::formulas::{Axiom, AxiomFamily};
use crate::lp::{self, Column, LpOutcome};
use crate::pe::{basis_conjuncts, check_conditions, ConditionsReport, MonomialTable};
use crate::{Error, Limits, Result};

/// A weakened axiom `D'` of the source axiom `source`, with its junta.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeakeningEntry {
    pub source: String,
    pub dnf: Dnf,
    pub junta: ConicalJunta,
}

/// `sum_i D'_i J_i + J = -1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SAProof {
    pub weakening: Vec<WeakeningEntry>,
    pub slack: ConicalJunta,
}

impl SAProof {
    /// `sum_i D'_i J_i + J` as a polynomial.
    pub fn total(&self) -> Polynomial {
        let mut p = self.slack.to_poly();
        for e in &self.weakening {
            p += &(&e.dnf.to_poly() * &e.junta.to_poly());
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SAMetrics {
    pub degree: usize,
    /// Monomials counted with multiplicity; absent when some weight is not an integer.
    pub unary_size: Option<String>,
    /// `degree + log2(unary_size)`.
    pub complexity: Option<f64>,
    pub entries: usize,
}

/// For every `(source, D')`, checks `D_source => D'` by enumerating, term by term of the
/// source, the variables of `D'` the term leaves free.
pub fn check_weakening<'a>(
    fam: &AxiomFamily,
    pool: impl IntoIterator<Item = (&'a str, &'a Dnf)>,
    limits: &Limits,
) -> Result<()> {
    for (source, weak) in pool {
        let d = fam.require(source)?;
        weak.check_universe(&fam.universe)?;
        if let Some(witness) = implication_counterexample(d, weak, limits)? {
            return Err(Error::WeakeningFailed {
                label: source.to_string(),
                witness,
            });
        }
    }
    Ok(())
}

/// An assignment making `d` true and `weak` false, if there is one.
pub fn implication_counterexample(
    d: &Dnf,
    weak: &Dnf,
    limits: &Limits,
) -> Result<Option<PartialAssignment>> {
    let weak_vars = weak.vars();
    for s in &d.terms {
        if s.is_zero() || weak.terms.iter().any(|w| s.implies(w)) {
            continue;
        }
        let free: Vec<VarId> = weak_vars.iter().copied().filter(|v| s.literal(*v).is_none()).collect();
        limits.check("free variables in a weakening check", free.len(), limits.max_free_vars)?;
        for code in 0u64..(1u64 << free.len()) {
            let mut a: BTreeMap<VarId, bool> = s.literals().collect();
            for (k, &v) in free.iter().enumerate() {
                a.insert(v, code >> k & 1 == 1);
            }
            let a = PartialAssignment(a);
            if !weak.eval(&a) {
                return Ok(Some(a));
            }
        }
    }
    Ok(None)
}

/// Verifies a certificate against `fam` and reports its degree and size.
pub fn check_sa_proof(fam: &AxiomFamily, proof: &SAProof, limits: &Limits) -> Result<SAMetrics> {
    check_weakening(
        fam,
        proof.weakening.iter().map(|e| (e.source.as_str(), &e.dnf)),
        limits,
    )?;
    for e in &proof.weakening {
        e.junta.validate()?;
        e.junta.check_universe(&fam.universe)?;
    }
    proof.slack.validate()?;
    proof.slack.check_universe(&fam.universe)?;
    let total = proof.total();
    if !total.is_constant(&-BigRational::one()) {
        let residual = &total + &Polynomial::one();
        return Err(Error::IdentityFailed {
            residual: Box::new(residual),
        });
    }
    Ok(metrics(fam, proof))
}

/// Degree and unary size, counting every original axiom, every `D'_i J_i` and `J`.
pub fn metrics(fam: &AxiomFamily, proof: &SAProof) -> SAMetrics {
    let mut degree = fam.degree().max(proof.slack.degree());
    for e in &proof.weakening {
        for je in &e.junta.entries {
            degree = degree.max(e.dnf.product_degree(&je.conjunct));
        }
    }
    let mut size = Some(BigUint::zero());
    for ax in &fam.axioms {
        size = size.map(|s| s + BigUint::from(ax.dnf.to_poly().monomial_count()));
    }
    for e in &proof.weakening {
        let d = e.dnf.to_poly();
        for je in &e.junta.entries {
            let count = BigUint::from((&d * &je.conjunct.to_poly()).monomial_count());
            size = match (size, weight_as_uint(&je.weight)) {
                (Some(s), Some(w)) => Some(s + w * count),
                _ => None,
            };
        }
    }
    size = match (size, proof.slack.unary_size()) {
        (Some(a), Some(b)) => Some(a + b),
        _ => None,
    };
    let complexity = size.as_ref().map(|s| degree as f64 + log2(s));
    SAMetrics {
        degree,
        unary_size: size.map(|s| s.to_string()),
        complexity,
        entries: proof.weakening.len(),
    }
}

fn weight_as_uint(w: &BigRational) -> Option<BigUint> {
    if w.is_integer() && !w.is_negative() {
        w.to_integer().to_biguint()
    } else {
        None
    }
}

fn log2(v: &BigUint) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    let bits = v.bits();
    if bits <= 52 {
        return v.to_f64().unwrap_or(f64::INFINITY).log2();
    }
    let shift = bits - 52;
    (v >> shift).to_f64().unwrap_or(f64::INFINITY).log2() + shift as f64
}

/// A pseudo-expectation as explicit monomial values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualEntry {
    pub monomial: Monomial,
    #[serde(with = "crate::ratio")]
    pub value: BigRational,
}

/// Exactly one of `refutation` and `dual` is present.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeOracleResult {
    pub family: String,
    pub degree: usize,
    pub feasible: bool,
    pub refutation: Option<SAProof>,
    pub dual: Option<Vec<DualEntry>>,
    pub columns: usize,
    pub rows: usize,
    pub pivots: usize,
}

impl DegreeOracleResult {
    pub fn dual_table(&self) -> Option<MonomialTable> {
        self.dual.as_ref().map(|d| {
            MonomialTable(d.iter().map(|e| (e.monomial.clone(), e.value.clone())).collect())
        })
    }
}

enum Col {
    Axiom(usize, Conjunct),
    Slack(Conjunct),
}

/// Decides whether `fam` has a degree-`d` refutation with non-negative rational junta
/// weights, juntas drawn from [`basis_conjuncts`]. On failure the Farkas dual is the
/// pseudo-expectation, normalized to value 1 on the constant.
pub fn lp_degree_oracle(fam: &AxiomFamily, d: usize, limits: &Limits) -> Result<DegreeOracleResult> {
    let pool: Vec<(String, Dnf)> = Vec::new();
    sigma2_lp_oracle(fam, d, &pool, limits)
}

/// [`lp_degree_oracle`] on `fam` extended by an explicit pool of weakenings
/// `(source label, D')`. The pool is validated first; the answer is only as strong as
/// the pool.
pub fn sigma2_lp_oracle(
    fam: &AxiomFamily,
    d: usize,
    pool: &[(String, Dnf)],
    limits: &Limits,
) -> Result<DegreeOracleResult> {
    check_weakening(fam, pool.iter().map(|(s, w)| (s.as_str(), w)), limits)?;
    let mut sources: Vec<Axiom> = fam.axioms.clone();
    let mut source_label: Vec<String> = fam.axioms.iter().map(|a| a.label.clone()).collect();
    for (s, w) in pool {
        w.check_universe(&fam.universe)?;
        sources.push(Axiom {
            label: s.clone(),
            dnf: w.clone(),
        });
        source_label.push(s.clone());
    }
    let basis = basis_conjuncts(&fam.universe, d, limits)?;
    let mut cols: Vec<Col> = Vec::new();
    for (a, ax) in sources.iter().enumerate() {
        for t in &basis {
            if ax.dnf.product_degree(t) <= d {
                cols.push(Col::Axiom(a, t.clone()));
            }
        }
    }
    cols.extend(basis.iter().cloned().map(Col::Slack));
    limits.check("LP columns", cols.len(), limits.max_lp_columns)?;

    let mut rows: BTreeMap<Monomial, usize> = BTreeMap::new();
    rows.insert(Monomial::one(), 0);
    let mut columns: Vec<Column> = Vec::with_capacity(cols.len());
    for c in &cols {
        let p = match c {
            Col::Axiom(a, t) => &sources[*a].dnf.to_poly() * &t.to_poly(),
            Col::Slack(t) => t.to_poly(),
        };
        let mut column = Vec::new();
        for (m, v) in p.terms() {
            let next = rows.len();
            let r = *rows.entry(m.clone()).or_insert(next);
            column.push((r, v.clone()));
        }
        columns.push(column);
    }
    // Zero columns and positive multiples of earlier columns add nothing.
    let mut seen: BTreeSet<Column> = BTreeSet::new();
    let mut keep = Vec::with_capacity(columns.len());
    for column in &columns {
        let Some((_, lead)) = column.iter().min_by_key(|(r, _)| *r) else {
            keep.push(false);
            continue;
        };
        let scale = lead.abs();
        let mut key: Column = column.iter().map(|(r, v)| (*r, v / &scale)).collect();
        key.sort_by_key(|(r, _)| *r);
        keep.push(seen.insert(key));
    }
    let (cols, columns): (Vec<Col>, Vec<Column>) = cols
        .into_iter()
        .zip(columns)
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(c, _)| c)
        .unzip();
    let nrows = rows.len();
    let mut b = vec![BigRational::zero(); nrows];
    b[0] = -BigRational::one();
    let (outcome, stats) = lp::solve(nrows, &columns, &b)?;
    debug_assert!(lp::verify(nrows, &columns, &b, &outcome));

    let mut result = DegreeOracleResult {
        family: fam.name.clone(),
        degree: d,
        feasible: false,
        refutation: None,
        dual: None,
        columns: columns.len(),
        rows: nrows,
        pivots: stats.pivots,
    };
    match outcome {
        LpOutcome::Feasible(x) => {
            let mut juntas: BTreeMap<usize, ConicalJunta> = BTreeMap::new();
            let mut slack = ConicalJunta::empty();
            for (c, w) in cols.iter().zip(x) {
                if w.is_zero() {
                    continue;
                }
                match c {
                    Col::Axiom(a, t) => juntas.entry(*a).or_default().push(t.clone(), w),
                    Col::Slack(t) => slack.push(t.clone(), w),
                }
            }
            let weakening = juntas
                .into_iter()
                .map(|(a, junta)| WeakeningEntry {
                    source: source_label[a].clone(),
                    dnf: sources[a].dnf.clone(),
                    junta,
                })
                .collect();
            result.feasible = true;
            result.refutation = Some(SAProof { weakening, slack });
        }
        LpOutcome::Infeasible(y) => {
            let scale = y[0].clone();
            if !scale.is_positive() {
                return Err(Error::invalid("Farkas certificate has a non-positive constant"));
            }
            let mut dual: Vec<DualEntry> = rows
                .into_iter()
                .map(|(m, r)| DualEntry {
                    monomial: m,
                    value: &y[r] / &scale,
                })
                .collect();
            dual.sort_by(|a, b| a.monomial.cmp(&b.monomial));
            result.dual = Some(dual);
        }
    }
    Ok(result)
}

/// Re-verifies an oracle answer: the refutation with the checker, or the dual with the
/// pseudo-expectation conditions over the same basis.
pub fn verify_oracle_result(
    fam: &AxiomFamily,
    result: &DegreeOracleResult,
    limits: &Limits,
) -> Result<OracleVerdict> {
    match (&result.refutation, result.dual_table()) {
        (Some(proof), None) => {
            let m = check_sa_proof(fam, proof, limits)?;
            Ok(OracleVerdict::Refutation(m))
        }
        (None, Some(table)) => {
            let r = check_conditions(fam, result.degree, &table, limits)?;
            Ok(OracleVerdict::Dual(r))
        }
        _ => Err(Error::invalid("oracle result must carry exactly one of refutation and dual")),
    }
}

#[derive(Clone, Debug)]
pub enum OracleVerdict {
    Refutation(SAMetrics),
    Dual(ConditionsReport),
}

impl OracleVerdict {
    pub fn is_valid(&self) -> bool {
        match self {
            OracleVerdict::Refutation(_) => true,
            OracleVerdict::Dual(r) => r.passed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Universe;
    use crate::formulas::{least_number, least_number_refutation};
    use crate::ratio::int;

    fn a(k: usize) -> VarId {
        VarId::plain(k)
    }

    fn fam(axioms: Vec<(&str, Dnf)>, m: usize) -> AxiomFamily {
        AxiomFamily::new(
            "toy",
            Universe::plain(m),
            axioms
                .into_iter()
                .map(|(l, dnf)| Axiom {
                    label: l.to_string(),
                    dnf,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn weakening_checks() {
        let l = Limits::default();
        let f = fam(vec![("p", Dnf::new(vec![Conjunct::pos(a(1))]))], 2);
        let d = f.require("p").unwrap().clone();
        assert!(check_weakening(&f, [("p", &d)], &l).is_ok());
        let sup = Dnf::new(vec![Conjunct::pos(a(1)), Conjunct::pos(a(2))]);
        assert!(check_weakening(&f, [("p", &sup)], &l).is_ok());
        let other = Dnf::new(vec![Conjunct::pos(a(2))]);
        match check_weakening(&f, [("p", &other)], &l) {
            Err(Error::WeakeningFailed { witness, .. }) => {
                assert_eq!(witness.0.get(&a(1)), Some(&true));
                assert_eq!(witness.0.get(&a(2)), Some(&false));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn least_number_certificates() {
        let l = Limits::default();
        for n in 1..=10 {
            let f = least_number(n).unwrap();
            let p = least_number_refutation(n).unwrap();
            let m = check_sa_proof(&f, &p, &l).unwrap();
            assert_eq!(m.degree, 1);
            // originals: (n+1) + sum_i i; weakened copies: (n+1) + sum_i 2^{n-i} i
            let expect: u64 = 2 * (n as u64 + 1)
                + (1..=n as u64).map(|i| i + (1u64 << (n as u64 - i)) * i).sum::<u64>();
            assert_eq!(m.unary_size.unwrap(), expect.to_string());
        }
    }

    #[test]
    fn corrupted_certificate_reports_residual() {
        let f = least_number(3).unwrap();
        let mut p = least_number_refutation(3).unwrap();
        p.weakening.pop();
        assert!(matches!(
            check_sa_proof(&f, &p, &Limits::default()),
            Err(Error::IdentityFailed { .. })
        ));
    }

    #[test]
    fn oracle_on_toys() {
        let l = Limits::default();
        let f = fam(
            vec![
                ("p", Dnf::new(vec![Conjunct::pos(a(1))])),
                ("q", Dnf::new(vec![Conjunct::neg(a(1))])),
            ],
            1,
        );
        let r = lp_degree_oracle(&f, 1, &l).unwrap();
        assert!(r.feasible);
        assert!(verify_oracle_result(&f, &r, &l).unwrap().is_valid());

        let sat = fam(vec![("p", Dnf::new(vec![Conjunct::pos(a(1))]))], 1);
        let r = lp_degree_oracle(&sat, 2, &l).unwrap();
        assert!(!r.feasible);
        let table = r.dual_table().unwrap();
        assert_eq!(table.eval(&Polynomial::var(a(1))).unwrap(), int(1));
        assert!(verify_oracle_result(&sat, &r, &l).unwrap().is_valid());
    }
}
