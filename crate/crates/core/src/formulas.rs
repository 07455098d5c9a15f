//! The concrete unsatisfiable DNF families: the linear ordering principle and
//! LeastNumber, plus the explicit exponential-size LeastNumber certificate.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::algebra::{Assignment, Conjunct, Dnf, Universe, VarId};
use crate::sa::{SAProof, WeakeningEntry};
use crate::algebra::ConicalJunta;
use crate::{Error, Result};

/// A labeled axiom of a family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axiom {
    pub label: String,
    pub dnf: Dnf,
}

/// A conjunction of DNFs over a declared universe. Read as a search problem it is
/// "given an assignment, name a false axiom".
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomFamily {
    pub name: String,
    pub universe: Universe,
    pub axioms: Vec<Axiom>,
}

impl AxiomFamily {
    pub fn new(name: impl Into<String>, universe: Universe, axioms: Vec<Axiom>) -> Result<Self> {
        let fam = AxiomFamily {
            name: name.into(),
            universe,
            axioms,
        };
        fam.validate()?;
        Ok(fam)
    }

    /// Labels unique, every axiom inside the universe.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for ax in &self.axioms {
            if !seen.insert(ax.label.as_str()) {
                return Err(Error::invalid(format!("duplicate axiom label `{}`", ax.label)));
            }
            ax.dnf.check_universe(&self.universe)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.axioms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty()
    }

    pub fn get(&self, label: &str) -> Option<&Dnf> {
        self.axioms.iter().find(|a| a.label == label).map(|a| &a.dnf)
    }

    pub fn require(&self, label: &str) -> Result<&Dnf> {
        self.get(label)
            .ok_or_else(|| Error::invalid(format!("family `{}` has no axiom `{label}`", self.name)))
    }

    pub fn degree(&self) -> usize {
        self.axioms.iter().map(|a| a.dnf.degree()).max().unwrap_or(0)
    }

    /// Labels of the axioms falsified by `a`: the solutions of the false-formula problem.
    pub fn falsified(&self, a: &impl Assignment) -> Vec<&str> {
        self.axioms
            .iter()
            .filter(|ax| !ax.dnf.eval(a))
            .map(|ax| ax.label.as_str())
            .collect()
    }

    /// Exhaustive satisfiability check over every assignment of the mentioned
    /// variables; returns a satisfying assignment if one exists.
    pub fn find_satisfying(&self, max_vars: usize) -> Result<Option<crate::algebra::PartialAssignment>> {
        let mut vars: Vec<VarId> = self.axioms.iter().flat_map(|a| a.dnf.vars()).collect();
        vars.sort_unstable();
        vars.dedup();
        crate::Limits::default().check("family variables", vars.len(), max_vars)?;
        for code in 0u64..(1u64 << vars.len()) {
            let pa = crate::algebra::PartialAssignment(
                vars.iter()
                    .enumerate()
                    .map(|(k, &v)| (v, code >> k & 1 == 1))
                    .collect(),
            );
            if self.axioms.iter().all(|ax| ax.dnf.eval(&pa)) {
                return Ok(Some(pa));
            }
        }
        Ok(None)
    }
}

fn x(i: usize, j: usize) -> VarId {
    VarId::order(i, j)
}

fn axiom(label: String, terms: Vec<Conjunct>) -> Axiom {
    Axiom {
        label,
        dnf: Dnf::new(terms),
    }
}

/// The linear ordering principle on `[n]`: non-minimality `M_i`, irreflexivity `R_i`,
/// asymmetry `A_{i,j}` (i < j), transitivity `T_{i,j,k}` (ordered distinct triples)
/// and totality `O_{i,j}` (ordered distinct pairs).
pub fn lop(n: usize) -> Result<AxiomFamily> {
    if n < 3 {
        return Err(Error::invalid(format!("LOP needs n >= 3, got {n}")));
    }
    let mut axioms = Vec::new();
    for i in 1..=n {
        let terms = (1..=n).filter(|&j| j != i).map(|j| Conjunct::pos(x(j, i))).collect();
        axioms.push(axiom(format!("M{i}"), terms));
    }
    for i in 1..=n {
        axioms.push(axiom(format!("R{i}"), vec![Conjunct::neg(x(i, i))]));
    }
    for i in 1..=n {
        for j in i + 1..=n {
            axioms.push(axiom(
                format!("A{i},{j}"),
                vec![Conjunct::neg(x(i, j)), Conjunct::neg(x(j, i))],
            ));
        }
    }
    for i in 1..=n {
        for j in 1..=n {
            for k in 1..=n {
                if i == j || j == k || i == k {
                    continue;
                }
                axioms.push(axiom(
                    format!("T{i},{j},{k}"),
                    vec![
                        Conjunct::pos(x(i, k)),
                        Conjunct::neg(x(i, j)),
                        Conjunct::neg(x(j, k)),
                    ],
                ));
            }
        }
    }
    for i in 1..=n {
        for j in 1..=n {
            if i != j {
                axioms.push(axiom(
                    format!("O{i},{j}"),
                    vec![Conjunct::pos(x(i, j)), Conjunct::neg(x(i, j))],
                ));
            }
        }
    }
    AxiomFamily::new(format!("lop({n})"), Universe::orders(n), axioms)
}

/// Which LOP axiom group a label belongs to (`'M'`, `'R'`, `'A'`, `'T'`, `'O'`).
pub fn lop_kind(label: &str) -> Option<char> {
    label.chars().next().filter(|c| "MRATO".contains(*c))
}

/// LeastNumber on `n` bits: "not all zero" plus "bit i is the least set bit" for each i.
pub fn least_number(n: usize) -> Result<AxiomFamily> {
    if n < 1 {
        return Err(Error::invalid("LeastNumber needs n >= 1"));
    }
    let a = VarId::plain;
    let mut axioms = vec![axiom(
        "nonzero".to_string(),
        (1..=n).map(|k| Conjunct::pos(a(k))).collect(),
    )];
    for i in 1..=n {
        let mut terms = vec![Conjunct::neg(a(i))];
        terms.extend((1..i).map(|j| Conjunct::pos(a(j))));
        axioms.push(axiom(format!("least{i}"), terms));
    }
    AxiomFamily::new(format!("least-number({n})"), Universe::plain(n), axioms)
}

/// The degree-1 certificate `(sum a_i - 1) + sum_i 2^i (-a_{n-i} + sum_{j<n-i} a_j) = -1`
/// with the identity weakening and an empty slack junta.
pub fn least_number_refutation(n: usize) -> Result<SAProof> {
    let fam = least_number(n)?;
    let mut weakening = vec![WeakeningEntry {
        source: "nonzero".to_string(),
        dnf: fam.require("nonzero")?.clone(),
        junta: ConicalJunta::unit(),
    }];
    for i in 0..n {
        let label = format!("least{}", n - i);
        let weight = BigRational::from_integer(BigInt::one() << i);
        weakening.push(WeakeningEntry {
            dnf: fam.require(&label)?.clone(),
            source: label,
            junta: ConicalJunta::single(Conjunct::top(), weight),
        });
    }
    Ok(SAProof {
        weakening,
        slack: ConicalJunta::empty(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::{all_orders, binomial};
    use crate::Limits;

    #[test]
    fn lop_shapes() {
        let f = lop(3).unwrap();
        assert_eq!(
            f.get("M1").unwrap(),
            &Dnf::new(vec![Conjunct::pos(x(2, 1)), Conjunct::pos(x(3, 1))])
        );
        assert_eq!(
            f.get("T1,2,3").unwrap(),
            &Dnf::new(vec![
                Conjunct::pos(x(1, 3)),
                Conjunct::neg(x(1, 2)),
                Conjunct::neg(x(2, 3))
            ])
        );
        let f4 = lop(4).unwrap();
        assert_eq!(f4.len(), 4 + 4 + 6 + 24 + 12);
        assert_eq!(f4.len() as u64, 4 + 4 + binomial(4, 2) + 4 * 3 * 2 + 4 * 3);
        assert!(f.get("O1,2").unwrap().to_poly().is_zero());
        assert!(lop(2).is_err());
    }

    #[test]
    fn every_order_violates_exactly_its_minimum() {
        for n in 3..=6 {
            let f = lop(n).unwrap();
            for z in all_orders(n, &Limits::default()).unwrap() {
                assert_eq!(f.falsified(&z), vec![format!("M{}", z.first())]);
            }
        }
    }

    #[test]
    fn unsatisfiable_families() {
        assert!(lop(3).unwrap().find_satisfying(22).unwrap().is_none());
        for n in 1..=6 {
            let f = least_number(n).unwrap();
            assert_eq!(f.len(), n + 1);
            assert!(f.find_satisfying(22).unwrap().is_none());
        }
        let f = least_number(3).unwrap();
        assert_eq!(
            f.get("least2").unwrap(),
            &Dnf::new(vec![Conjunct::neg(VarId::plain(2)), Conjunct::pos(VarId::plain(1))])
        );
    }
}
