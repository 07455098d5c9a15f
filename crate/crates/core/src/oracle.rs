//! Brute-force reference routes. Nothing here shares code with the fast paths it is
//! used to check: pseudo-expectations are averages over all `n!` orders, implication
//! is checked over every assignment of the mentioned variables, and composition is
//! checked pointwise.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::algebra::{compose, Conjunct, DecisionTree, Dnf, PartialAssignment, PlainBits, Polynomial, VarId};
use crate::order::{factorial, par_fold_orders, CanonicalTerm};
use crate::{Limits, Result};

fn average(total: BigRational, n: usize) -> BigRational {
    total / BigRational::from_integer(BigInt::from(factorial(n)))
}

/// `E_z[p(z)]` over uniformly random total orders of `[n]`.
pub fn pe_poly(p: &Polynomial, n: usize, limits: &Limits) -> Result<BigRational> {
    p.check_universe(&crate::algebra::Universe::orders(n))?;
    let total = par_fold_orders(
        n,
        limits,
        BigRational::zero(),
        |acc, z| acc + p.eval(z),
        |a, b| a + b,
    )?;
    Ok(average(total, n))
}

/// `E_z[sum_t t(z) - 1]`.
pub fn pe_dnf(d: &Dnf, n: usize, limits: &Limits) -> Result<BigRational> {
    let accepted_terms = par_fold_orders(
        n,
        limits,
        0u64,
        |acc, z| acc + d.terms.iter().filter(|t| t.eval(z)).count() as u64,
        |a, b| a + b,
    )?;
    Ok(average(BigRational::from_integer(BigInt::from(accepted_terms)), n) - BigRational::from_integer(1.into()))
}

/// `E_z[(sum_s s(z) - 1) t(z)]`.
pub fn pe_product(d: &Dnf, t: &Conjunct, n: usize, limits: &Limits) -> Result<BigRational> {
    let total = par_fold_orders(
        n,
        limits,
        0i64,
        |acc, z| {
            if t.eval(z) {
                acc + d.terms.iter().filter(|s| s.eval(z)).count() as i64 - 1
            } else {
                acc
            }
        },
        |a, b| a + b,
    )?;
    Ok(average(BigRational::from_integer(total.into()), n))
}

/// Fraction of orders accepted by a chain term.
pub fn pe_chain(t: &CanonicalTerm, n: usize, limits: &Limits) -> Result<BigRational> {
    let count = par_fold_orders(n, limits, 0u64, |acc, z| acc + u64::from(t.accepts(z)), |a, b| a + b)?;
    Ok(average(BigRational::from_integer(count.into()), n))
}

/// Number of orders accepted by `d`.
pub fn count_accepted(d: &Dnf, n: usize, limits: &Limits) -> Result<u64> {
    par_fold_orders(n, limits, 0u64, |acc, z| acc + u64::from(d.eval(z)), |a, b| a + b)
}

/// Whether `d => weak` over every assignment to the variables either mentions.
pub fn implies(d: &Dnf, weak: &Dnf, limits: &Limits) -> Result<bool> {
    let mut vars: Vec<VarId> = d.vars();
    vars.extend(weak.vars());
    vars.sort_unstable();
    vars.dedup();
    limits.check("variables in an implication check", vars.len(), limits.max_free_vars)?;
    for code in 0u64..(1u64 << vars.len()) {
        let a = PartialAssignment(
            vars.iter()
                .enumerate()
                .map(|(k, &v)| (v, code >> k & 1 == 1))
                .collect(),
        );
        if d.eval(&a) && !weak.eval(&a) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The first `x` on which `compose(p, f)(x) != p(f(x))`, as a bit string.
pub fn compose_mismatch(
    p: &Polynomial,
    f: &[DecisionTree<bool>],
    input_bits: usize,
    limits: &Limits,
) -> Result<Option<String>> {
    limits.check("input bits", input_bits, limits.max_input_bits)?;
    let composed = compose(p, f)?;
    for code in 0u64..(1u64 << input_bits) {
        let x = PlainBits::from_code(code, input_bits);
        let a = PlainBits(f.iter().map(|t| *t.eval(&x)).collect());
        if composed.eval(&x) != p.eval(&a) {
            return Ok(Some(x.0.iter().map(|&b| if b { '1' } else { '0' }).collect()));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::lop;
    use crate::pe::PeEngine;
    use crate::ratio::frac;

    #[test]
    fn agrees_with_engine_on_lop_axioms() {
        let l = Limits::default();
        let n = 5;
        let fam = lop(n).unwrap();
        let e = PeEngine::new(n);
        for ax in &fam.axioms {
            assert_eq!(pe_dnf(&ax.dnf, n, &l).unwrap(), e.pe_dnf(&ax.dnf).unwrap(), "{}", ax.label);
            assert_eq!(pe_poly(&ax.dnf.to_poly(), n, &l).unwrap(), e.pe_dnf(&ax.dnf).unwrap());
        }
        assert_eq!(pe_dnf(fam.require("M2").unwrap(), n, &l).unwrap(), frac(1, 1));
    }

    #[test]
    fn chain_fraction() {
        let t = CanonicalTerm::new(vec![3, 1, 2]).unwrap();
        assert_eq!(pe_chain(&t, 5, &Limits::default()).unwrap(), frac(1, 6));
    }

    #[test]
    fn composition_pointwise() {
        let a = VarId::plain;
        let p = &(&Polynomial::var(a(1)) * &Polynomial::var(a(2))) - &Polynomial::var(a(1));
        let f = vec![
            DecisionTree::query(a(1), DecisionTree::var(a(2)), DecisionTree::leaf(true)),
            DecisionTree::var(a(3)),
        ];
        assert_eq!(compose_mismatch(&p, &f, 3, &Limits::default()).unwrap(), None);
    }
}
