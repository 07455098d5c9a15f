use loplab::acceptance::{random_chain, random_normalized, random_order_dnf, random_unsat_family};
use loplab::normalize::{normalize_dnf, Padding};
use loplab::order::factorial;
use loplab::pe::{kfact_criterion, PeEngine};
use loplab::formulas::least_number;
use loplab::reductions::{check_ce_formulation, check_formulation, factorize, random_formulation, SearchProblem};
use loplab::{oracle, Limits};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chain_pe_is_inverse_factorial(seed: u64, n in 2usize..=6, k in 2usize..=6) {
        prop_assume!(k <= n);
        let t = random_chain(&mut rng(seed), n, k, false, false);
        let expect = BigRational::new(1.into(), BigInt::from(factorial(k)));
        prop_assert_eq!(PeEngine::new(n).pe_chain(&t).unwrap(), expect.clone());
        prop_assert_eq!(oracle::pe_chain(&t, n, &Limits::default()).unwrap(), expect);
    }

    #[test]
    fn normalization_keeps_pe(seed: u64, n in 3usize..=6) {
        let w = random_order_dnf(&mut rng(seed), n, 3, 3);
        let e = PeEngine::new(n);
        let nd = normalize_dnf(&w, n, Padding::Minimal).unwrap();
        prop_assert_eq!(e.pe_normalized(&nd).unwrap(), e.pe_dnf(&w).unwrap());
        prop_assert!(nd.k <= 2 * w.degree() + 1);
    }

    #[test]
    fn kfact_sign_matches_term_count(seed: u64, n in 3usize..=6, k in 2usize..=4) {
        prop_assume!(k <= n);
        let nd = random_normalized(&mut rng(seed), n, k, 30);
        let r = kfact_criterion(&nd);
        prop_assert_eq!(&r.pe, &PeEngine::new(n).pe_normalized(&nd).unwrap());
        prop_assert_eq!(r.pe < BigRational::from_integer(0.into()), BigUint::from(nd.len()) < factorial(k));
    }
}

fn toy_problems(seed: u64) -> (SearchProblem, SearchProblem) {
    let mut g = rng(seed);
    let q = SearchProblem::from_family(&least_number(3).unwrap()).unwrap();
    let r = SearchProblem::from_family(&random_unsat_family(&mut g, 2, "r")).unwrap();
    (q, r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn factorization_is_sound(seed: u64, depth in 1usize..=2) {
        let l = Limits::default();
        let (q, r) = toy_problems(seed);
        let phi = random_formulation(&mut rng(seed ^ 1), &q, &r, depth, &l).unwrap();
        prop_assert!(check_formulation(&q, &r, &phi, &l).unwrap().is_none());
        let fac = factorize(&q, &r, &phi, &l).unwrap();
        prop_assert!(check_formulation(&q, &fac.reduced.problem, &fac.weakening, &l).unwrap().is_none());
        prop_assert!(check_ce_formulation(&fac.reduced.problem, &r, &fac.ce, &l).unwrap().is_none());
        let composite = fac.compose();
        prop_assert!(check_formulation(&q, &r, &composite, &l).unwrap().is_none());
        prop_assert_eq!(composite, phi);
    }

    /// Duplicating a source witness, with `h` copied for it, keeps a counter-example
    /// formulation valid.
    #[test]
    fn ce_validity_survives_witness_extension(seed: u64, pick: usize) {
        let l = Limits::default();
        let (q, r) = toy_problems(seed);
        let phi = random_formulation(&mut rng(seed ^ 2), &q, &r, 2, &l).unwrap();
        let fac = factorize(&q, &r, &phi, &l).unwrap();
        let p = &fac.reduced.problem;
        let z0 = pick % p.witnesses.len();
        let mut p2 = p.clone();
        p2.witnesses.push(format!("{}'", p.witnesses[z0]));
        for row in &mut p2.relation {
            let t = row[z0].clone();
            row.push(t);
        }
        let mut ce = fac.ce.clone();
        for row in &mut ce.h {
            let t = row[z0].clone();
            row.push(t);
        }
        prop_assert!(check_ce_formulation(&p2, &r, &ce, &l).unwrap().is_none());
    }
}
