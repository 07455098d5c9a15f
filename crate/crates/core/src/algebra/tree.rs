use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::poly::Polynomial;
use super::syntax::{ConicalJunta, Conjunct, Dnf};
use super::var::{Assignment, Universe, VarId};
use crate::{Error, Result};

/// A decision tree querying boolean variables, with leaves labeled from `L`.
///
/// JSON form: `{"leaf": label}` or `{"query": {"var": "a1", "zero": .., "one": ..}}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionTree<L> {
    Leaf(L),
    Query {
        var: VarId,
        zero: Box<DecisionTree<L>>,
        one: Box<DecisionTree<L>>,
    },
}

impl<L> DecisionTree<L> {
    pub fn leaf(label: L) -> Self {
        DecisionTree::Leaf(label)
    }

    pub fn query(var: VarId, zero: DecisionTree<L>, one: DecisionTree<L>) -> Self {
        DecisionTree::Query {
            var,
            zero: Box::new(zero),
            one: Box::new(one),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            DecisionTree::Leaf(_) => 0,
            DecisionTree::Query { zero, one, .. } => 1 + zero.depth().max(one.depth()),
        }
    }

    pub fn eval(&self, a: &impl Assignment) -> &L {
        let mut node = self;
        loop {
            match node {
                DecisionTree::Leaf(l) => return l,
                DecisionTree::Query { var, zero, one } => {
                    node = if a.value(*var) { one } else { zero };
                }
            }
        }
    }

    /// Every root-to-leaf path as the conjunct of answers along it. Paths are pairwise
    /// contradictory, so every assignment satisfies exactly one of them.
    pub fn paths(&self) -> Vec<(Conjunct, &L)> {
        let mut out = Vec::new();
        self.collect_paths(Conjunct::top(), &mut out);
        out
    }

    fn collect_paths<'a>(&'a self, prefix: Conjunct, out: &mut Vec<(Conjunct, &'a L)>) {
        match self {
            DecisionTree::Leaf(l) => out.push((prefix, l)),
            DecisionTree::Query { var, zero, one } => {
                let mut p0 = prefix.clone();
                p0.push(*var, false);
                zero.collect_paths(p0, out);
                let mut p1 = prefix;
                p1.push(*var, true);
                one.collect_paths(p1, out);
            }
        }
    }

    pub fn leaves(&self) -> Vec<&L> {
        match self {
            DecisionTree::Leaf(l) => vec![l],
            DecisionTree::Query { zero, one, .. } => {
                let mut v = zero.leaves();
                v.extend(one.leaves());
                v
            }
        }
    }

    pub fn map<M>(&self, f: &impl Fn(&L) -> M) -> DecisionTree<M> {
        match self {
            DecisionTree::Leaf(l) => DecisionTree::Leaf(f(l)),
            DecisionTree::Query { var, zero, one } => DecisionTree::query(*var, zero.map(f), one.map(f)),
        }
    }

    /// Checks that every query is in the universe and no path queries a variable twice.
    pub fn validate(&self, u: &Universe) -> Result<()> {
        fn go<L>(t: &DecisionTree<L>, u: &Universe, seen: &mut Vec<VarId>) -> Result<()> {
            if let DecisionTree::Query { var, zero, one } = t {
                u.check(*var)?;
                if seen.contains(var) {
                    return Err(Error::invalid(format!("variable {var} queried twice on a path")));
                }
                seen.push(*var);
                go(zero, u, seen)?;
                go(one, u, seen)?;
                seen.pop();
            }
            Ok(())
        }
        go(self, u, &mut Vec::new())
    }

    pub fn vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        fn go<L>(t: &DecisionTree<L>, out: &mut Vec<VarId>) {
            if let DecisionTree::Query { var, zero, one } = t {
                out.push(*var);
                go(zero, out);
                go(one, out);
            }
        }
        go(self, &mut out);
        out.sort_unstable();
        out.dedup();
        out
    }
}

impl<L: Clone + PartialEq> DecisionTree<L> {
    /// Removes queries whose answer is already fixed on the path, and collapses queries
    /// whose two children are identical.
    pub fn pruned(&self) -> DecisionTree<L> {
        fn go<L: Clone + PartialEq>(
            t: &DecisionTree<L>,
            fixed: &mut BTreeMap<VarId, bool>,
        ) -> DecisionTree<L> {
            match t {
                DecisionTree::Leaf(l) => DecisionTree::Leaf(l.clone()),
                DecisionTree::Query { var, zero, one } => {
                    if let Some(&b) = fixed.get(var) {
                        return go(if b { one } else { zero }, fixed);
                    }
                    fixed.insert(*var, false);
                    let z = go(zero, fixed);
                    fixed.insert(*var, true);
                    let o = go(one, fixed);
                    fixed.remove(var);
                    if z == o {
                        z
                    } else {
                        DecisionTree::query(*var, z, o)
                    }
                }
            }
        }
        go(self, &mut BTreeMap::new())
    }

    /// Substitutes each query of `a_k` by the tree `f[k-1]`: the result computes
    /// `x -> self(f(x))`. Queries must be plain variables `a_1..a_m`, `m = f.len()`.
    pub fn compose(&self, f: &[DecisionTree<bool>]) -> Result<DecisionTree<L>> {
        fn go<L: Clone>(t: &DecisionTree<L>, f: &[DecisionTree<bool>]) -> Result<DecisionTree<L>> {
            match t {
                DecisionTree::Leaf(l) => Ok(DecisionTree::Leaf(l.clone())),
                DecisionTree::Query { var, zero, one } => {
                    let inner = &f[input_index(*var, f.len())?];
                    let z = go(zero, f)?;
                    let o = go(one, f)?;
                    Ok(graft(inner, &z, &o))
                }
            }
        }
        fn graft<L: Clone>(
            t: &DecisionTree<bool>,
            if_false: &DecisionTree<L>,
            if_true: &DecisionTree<L>,
        ) -> DecisionTree<L> {
            match t {
                DecisionTree::Leaf(true) => if_true.clone(),
                DecisionTree::Leaf(false) => if_false.clone(),
                DecisionTree::Query { var, zero, one } => DecisionTree::query(
                    *var,
                    graft(zero, if_false, if_true),
                    graft(one, if_false, if_true),
                ),
            }
        }
        Ok(go(self, f)?.pruned())
    }

    /// The DNF of the paths reaching leaves labeled `label`.
    pub fn to_dnf(&self, label: &L) -> Dnf {
        Dnf::new(
            self.paths()
                .into_iter()
                .filter(|(_, l)| *l == label)
                .map(|(c, _)| c)
                .collect(),
        )
    }

    /// The DNF of the paths reaching leaves with any other label.
    pub fn to_dnf_complement(&self, label: &L) -> Dnf {
        Dnf::new(
            self.paths()
                .into_iter()
                .filter(|(_, l)| *l != label)
                .map(|(c, _)| c)
                .collect(),
        )
    }

    /// Indicator polynomial of `T(x) = label`: the sum of the matching path conjuncts.
    pub fn indicator(&self, label: &L) -> Polynomial {
        let mut p = Polynomial::zero();
        for t in self.to_dnf(label).terms {
            p += &t.to_poly();
        }
        p
    }
}

impl DecisionTree<bool> {
    /// The depth-1 tree returning the value of `v`.
    pub fn var(v: VarId) -> Self {
        DecisionTree::query(v, DecisionTree::Leaf(false), DecisionTree::Leaf(true))
    }

    pub fn accepting(&self) -> Dnf {
        self.to_dnf(&true)
    }

    pub fn rejecting(&self) -> Dnf {
        self.to_dnf(&false)
    }
}

/// DNF of the paths of `tree` labeled `label`.
pub fn tree_to_dnf<L: Clone + PartialEq>(tree: &DecisionTree<L>, label: &L) -> Dnf {
    tree.to_dnf(label)
}

fn input_index(v: VarId, m: usize) -> Result<usize> {
    match v.as_plain() {
        Some(k) if k <= m => Ok(k - 1),
        Some(k) => Err(Error::ArityMismatch {
            expected: m,
            found: k,
        }),
        None => Err(Error::invalid(format!(
            "composition expects plain input variables, found {v}"
        ))),
    }
}

/// Expands `t(f(x))` as a sum of pairwise-disjoint conjuncts over the target variables:
/// each literal `a_k` (resp. `~a_k`) becomes the accepting (resp. rejecting) paths of `f_k`.
pub fn compose_conjunct(t: &Conjunct, f: &[DecisionTree<bool>]) -> Result<Vec<Conjunct>> {
    if t.is_zero() {
        return Ok(Vec::new());
    }
    let mut acc = vec![Conjunct::top()];
    for (v, b) in t.literals() {
        let tree = &f[input_index(v, f.len())?];
        let options: Vec<Conjunct> = tree
            .paths()
            .into_iter()
            .filter(|(_, &l)| l == b)
            .map(|(c, _)| c)
            .collect();
        let mut next = Vec::with_capacity(acc.len() * options.len());
        for a in &acc {
            for o in &options {
                let c = a.and(o);
                if !c.is_zero() {
                    next.push(c);
                }
            }
        }
        acc = next;
    }
    Ok(acc)
}

/// `p(f_1(x), .., f_m(x))` where `p` is over `a_1..a_m` and each `f_k` is read as the sum
/// of its accepting-path monomials.
pub fn compose(p: &Polynomial, f: &[DecisionTree<bool>]) -> Result<Polynomial> {
    let mut out = Polynomial::zero();
    for (m, c) in p.terms() {
        let t = Conjunct::new(m.vars().iter().copied(), []);
        for piece in compose_conjunct(&t, f)? {
            out += &piece.to_poly().scale(c);
        }
    }
    Ok(out)
}

/// `D o f` as a DNF: every term expanded through [`compose_conjunct`].
pub fn compose_dnf(d: &Dnf, f: &[DecisionTree<bool>]) -> Result<Dnf> {
    let mut terms = Vec::new();
    for t in &d.terms {
        terms.extend(compose_conjunct(t, f)?);
    }
    Ok(Dnf::new(terms))
}

/// `J o f`, still a conical junta with the same weights.
pub fn compose_junta(j: &ConicalJunta, f: &[DecisionTree<bool>]) -> Result<ConicalJunta> {
    let mut out = ConicalJunta::empty();
    for e in &j.entries {
        for piece in compose_conjunct(&e.conjunct, f)? {
            out.push(piece, e.weight.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Monomial, PlainBits};
    use crate::ratio::int;

    fn a(k: usize) -> VarId {
        VarId::plain(k)
    }

    #[test]
    fn identity_composition() {
        let p = &Polynomial::var(a(1)) - &Polynomial::one();
        let f = vec![DecisionTree::var(a(3))];
        assert_eq!(
            compose(&Polynomial::var(a(1)), &f).unwrap(),
            Polynomial::var(a(3))
        );
        let ids: Vec<_> = (1..=2).map(|k| DecisionTree::var(a(k))).collect();
        assert_eq!(compose(&p, &ids).unwrap(), p);
    }

    #[test]
    fn composition_matches_interpolation() {
        // p = a1 a2, f1 = x1, f2 = "x1 ? x2 : x3" -> x1 x2
        let p = Polynomial::monomial(Monomial::new([a(1), a(2)]), int(1));
        let f = vec![
            DecisionTree::var(a(1)),
            DecisionTree::query(a(1), DecisionTree::var(a(3)), DecisionTree::var(a(2))),
        ];
        let got = compose(&p, &f).unwrap();
        assert_eq!(got, Polynomial::monomial(Monomial::new([a(1), a(2)]), int(1)));
    }

    #[test]
    fn arity_is_checked() {
        let p = Polynomial::var(a(2));
        let f = vec![DecisionTree::var(a(1))];
        assert!(matches!(compose(&p, &f), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn tree_dnfs_partition() {
        let t = DecisionTree::var(a(1));
        assert_eq!(t.accepting(), Dnf::new(vec![Conjunct::pos(a(1))]));
        assert_eq!(t.rejecting(), Dnf::new(vec![Conjunct::neg(a(1))]));
        let deep = DecisionTree::query(a(1), DecisionTree::var(a(2)), DecisionTree::Leaf(true));
        let sum = &deep.indicator(&true) + &deep.indicator(&false);
        assert_eq!(sum, Polynomial::one());
        for code in 0..4 {
            let x = PlainBits::from_code(code, 2);
            let hits = deep.accepting().terms.iter().filter(|t| t.eval(&x)).count();
            assert_eq!(hits, usize::from(*deep.eval(&x)));
        }
    }

    #[test]
    fn tree_composition_and_pruning() {
        // T = a1 AND a2 as a tree; f1 = x1, f2 = x1 -> composed tree queries x1 once
        let t = DecisionTree::query(a(1), DecisionTree::Leaf(false), DecisionTree::var(a(2)));
        let f = vec![DecisionTree::var(a(1)), DecisionTree::var(a(1))];
        let c = t.compose(&f).unwrap();
        assert_eq!(c, DecisionTree::var(a(1)));
        assert!(c.validate(&Universe::plain(1)).is_ok());
    }

    #[test]
    fn repeated_query_is_rejected() {
        let t = DecisionTree::query(a(1), DecisionTree::var(a(1)), DecisionTree::Leaf(true));
        assert!(t.validate(&Universe::plain(1)).is_err());
    }
}
