//! Explicit finite search problems and decision-tree reductions between them:
//! formulations, counter-example formulations, the reduced problem `R(f,g)`, the
//! weakening / counter-example factorization and the pull-back of SA refutations.
//!
//! A problem on `m` input bits has outputs `b` and witnesses `c`; `b` solves input `a`
//! when `R(a, b; c)` holds for every `c`. Inputs are the plain variables `a_1..a_m`.

use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    compose_dnf, compose_junta, ConicalJunta, Conjunct, DecisionTree, Dnf,
    PlainBits, Universe, VarId,
};
use crate::formulas::{Axiom, AxiomFamily};
use crate::sa::{check_sa_proof, check_weakening, SAMetrics, SAProof, WeakeningEntry};
use crate::{Error, Limits, Result};

/// `relation[b][c]` computes `R(a, b; c)` from the input bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchProblem {
    pub name: String,
    pub input_bits: usize,
    pub outputs: Vec<String>,
    pub witnesses: Vec<String>,
    pub relation: Vec<Vec<DecisionTree<bool>>>,
}

impl SearchProblem {
    pub fn validate(&self) -> Result<()> {
        if self.relation.len() != self.outputs.len() {
            return Err(Error::ArityMismatch {
                expected: self.outputs.len(),
                found: self.relation.len(),
            });
        }
        let u = Universe::plain(self.input_bits);
        for row in &self.relation {
            if row.len() != self.witnesses.len() {
                return Err(Error::ArityMismatch {
                    expected: self.witnesses.len(),
                    found: row.len(),
                });
            }
            for t in row {
                t.validate(&u)?;
            }
        }
        Ok(())
    }

    /// The false-formula problem of a plain-variable family: outputs are axioms, the
    /// witness `c` points at term `c`, and `R(a, b; c)` says term `c` of axiom `b` is
    /// false. Axioms with fewer terms are padded with the constant-true tree.
    pub fn from_family(fam: &AxiomFamily) -> Result<Self> {
        if fam.universe.order_n != 0 {
            return Err(Error::invalid(format!(
                "`{}` uses order variables; search problems take plain inputs",
                fam.name
            )));
        }
        let width = fam.axioms.iter().map(|a| a.dnf.terms.len()).max().unwrap_or(0);
        let relation = fam
            .axioms
            .iter()
            .map(|ax| {
                (0..width)
                    .map(|c| match ax.dnf.terms.get(c) {
                        Some(t) => term_false_tree(t),
                        None => DecisionTree::leaf(true),
                    })
                    .collect()
            })
            .collect();
        let p = SearchProblem {
            name: fam.name.clone(),
            input_bits: fam.universe.plain_m,
            outputs: fam.axioms.iter().map(|a| a.label.clone()).collect(),
            witnesses: (0..width).map(|c| format!("t{c}")).collect(),
            relation,
        };
        p.validate()?;
        Ok(p)
    }

    /// The false-formula family: axiom `b` is the OR over `c` of the rejecting paths
    /// of `R_{b,c}`.
    pub fn to_family(&self) -> Result<AxiomFamily> {
        let axioms = self
            .outputs
            .iter()
            .zip(&self.relation)
            .map(|(label, row)| Axiom {
                label: label.clone(),
                dnf: Dnf::new(row.iter().flat_map(|t| t.rejecting().terms).collect()),
            })
            .collect();
        AxiomFamily::new(self.name.clone(), Universe::plain(self.input_bits), axioms)
    }

    /// The first witness refuting `b` on `a`, or `None` when `b` solves `a`.
    pub fn refute(&self, a: &PlainBits, b: usize) -> Option<usize> {
        self.relation[b].iter().position(|t| !*t.eval(a))
    }

    pub fn solves(&self, a: &PlainBits, b: usize) -> bool {
        self.refute(a, b).is_none()
    }

    /// An input with no solution, if any.
    pub fn totality_counterexample(&self, limits: &Limits) -> Result<Option<String>> {
        limits.check("input bits", self.input_bits, limits.max_input_bits)?;
        Ok((0..1u64 << self.input_bits).into_par_iter().find_map_first(|code| {
            let a = PlainBits::from_code(code, self.input_bits);
            (!(0..self.outputs.len()).any(|b| self.solves(&a, b))).then(|| bit_string(&a))
        }))
    }
}

/// The tree answering "is `t` false": it queries `t`'s literals in order and reaches
/// `false` only along the path satisfying all of them.
fn term_false_tree(t: &Conjunct) -> DecisionTree<bool> {
    if t.is_zero() {
        return DecisionTree::leaf(true);
    }
    let lits: Vec<(VarId, bool)> = t.literals().collect();
    let mut tree = DecisionTree::leaf(false);
    for &(v, b) in lits.iter().rev() {
        tree = if b {
            DecisionTree::query(v, DecisionTree::leaf(true), tree)
        } else {
            DecisionTree::query(v, tree, DecisionTree::leaf(true))
        };
    }
    tree
}

/// An `R`-formulation of `Q`: `f[k]` computes target bit `a_{k+1}` from `x`, and
/// `g[b]` maps an `R`-output `b` to a `Q`-output index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Formulation {
    pub f: Vec<DecisionTree<bool>>,
    pub g: Vec<DecisionTree<usize>>,
}

impl Formulation {
    /// `f` the identity on `p`'s inputs, `g_b = b`.
    pub fn identity(p: &SearchProblem) -> Self {
        Formulation {
            f: identity_map(p.input_bits),
            g: (0..p.outputs.len()).map(DecisionTree::leaf).collect(),
        }
    }

    /// `s(n)`, the number of target bits.
    pub fn size(&self) -> usize {
        self.f.len()
    }

    /// `d(n)`, the largest depth among the `f` and `g` trees.
    pub fn depth(&self) -> usize {
        let f = self.f.iter().map(DecisionTree::depth).max().unwrap_or(0);
        let g = self.g.iter().map(DecisionTree::depth).max().unwrap_or(0);
        f.max(g)
    }

    pub fn validate(&self, q: &SearchProblem, r: &SearchProblem) -> Result<()> {
        if self.f.len() != r.input_bits {
            return Err(Error::ArityMismatch {
                expected: r.input_bits,
                found: self.f.len(),
            });
        }
        if self.g.len() != r.outputs.len() {
            return Err(Error::ArityMismatch {
                expected: r.outputs.len(),
                found: self.g.len(),
            });
        }
        let u = Universe::plain(q.input_bits);
        for t in &self.f {
            t.validate(&u)?;
        }
        for t in &self.g {
            t.validate(&u)?;
            if let Some(&y) = t.leaves().into_iter().find(|&&y| y >= q.outputs.len()) {
                return Err(Error::invalid(format!("g names output {y} of {}", q.outputs.len())));
            }
        }
        Ok(())
    }

    pub fn apply_f(&self, x: &PlainBits) -> PlainBits {
        PlainBits(self.f.iter().map(|t| *t.eval(x)).collect())
    }

    /// The `Q`-output labels some `g_b` can produce, ascending.
    pub fn g_labels(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.g.iter().flat_map(|t| t.leaves()).copied().collect();
        set.into_iter().collect()
    }
}

/// A formulation with `h[b][z]` mapping an `R`-output and a `Q`-witness to an
/// `R`-witness index. `h` reads the source input only.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CeFormulation {
    pub base: Formulation,
    pub h: Vec<Vec<DecisionTree<usize>>>,
}

impl CeFormulation {
    pub fn validate(&self, q: &SearchProblem, r: &SearchProblem) -> Result<()> {
        self.base.validate(q, r)?;
        if self.h.len() != r.outputs.len() {
            return Err(Error::ArityMismatch {
                expected: r.outputs.len(),
                found: self.h.len(),
            });
        }
        let u = Universe::plain(q.input_bits);
        for row in &self.h {
            if row.len() != q.witnesses.len() {
                return Err(Error::ArityMismatch {
                    expected: q.witnesses.len(),
                    found: row.len(),
                });
            }
            for t in row {
                t.validate(&u)?;
                if let Some(&c) = t.leaves().into_iter().find(|&&c| c >= r.witnesses.len()) {
                    return Err(Error::invalid(format!(
                        "h names witness {c} of {}",
                        r.witnesses.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A point where a reduction fails: source input `x` (bit `k` is `x_{k+1}`), target
/// output `b`, source witness `z`, and for counter-example formulations the target
/// witness `c = h_{b,z}(x)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionCounterexample {
    pub x: String,
    pub b: usize,
    pub z: usize,
    pub c: Option<usize>,
}

fn bit_string(a: &PlainBits) -> String {
    a.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn identity_map(n: usize) -> Vec<DecisionTree<bool>> {
    (1..=n).map(|k| DecisionTree::var(VarId::plain(k))).collect()
}

/// Checks "`b` solves `f(x)` for `R` implies `g_b(x)` solves `x` for `Q`" on every
/// `x` and `b`. Returns the first failure in input order.
pub fn check_formulation(
    q: &SearchProblem,
    r: &SearchProblem,
    phi: &Formulation,
    limits: &Limits,
) -> Result<Option<ReductionCounterexample>> {
    phi.validate(q, r)?;
    limits.check("input bits", q.input_bits, limits.max_input_bits)?;
    Ok((0..1u64 << q.input_bits).into_par_iter().find_map_first(|code| {
        let x = PlainBits::from_code(code, q.input_bits);
        let a = phi.apply_f(&x);
        (0..r.outputs.len()).find_map(|b| {
            if !r.solves(&a, b) {
                return None;
            }
            let y = *phi.g[b].eval(&x);
            q.refute(&x, y).map(|z| ReductionCounterexample {
                x: bit_string(&x),
                b,
                z,
                c: None,
            })
        })
    }))
}

/// Checks `R(f(x), b; h_{b,z}(x)) => Q(x, g_b(x); z)` on every triple. Only the single
/// witness `h_{b,z}(x)` is evaluated.
pub fn check_ce_formulation(
    q: &SearchProblem,
    r: &SearchProblem,
    psi: &CeFormulation,
    limits: &Limits,
) -> Result<Option<ReductionCounterexample>> {
    psi.validate(q, r)?;
    limits.check("input bits", q.input_bits, limits.max_input_bits)?;
    let phi = &psi.base;
    Ok((0..1u64 << q.input_bits).into_par_iter().find_map_first(|code| {
        let x = PlainBits::from_code(code, q.input_bits);
        let a = phi.apply_f(&x);
        for b in 0..r.outputs.len() {
            let y = *phi.g[b].eval(&x);
            for z in 0..q.witnesses.len() {
                let c = *psi.h[b][z].eval(&x);
                if *r.relation[b][c].eval(&a) && !*q.relation[y][z].eval(&x) {
                    return Some(ReductionCounterexample {
                        x: bit_string(&x),
                        b,
                        z,
                        c: Some(c),
                    });
                }
            }
        }
        None
    }))
}

/// `R(f,g)` as an explicit problem, together with its false-formula family written
/// as `~G_{b,y} v OR_c ~R_{b,c} o f`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedProblem {
    pub problem: SearchProblem,
    pub family: AxiomFamily,
    /// Output `k` of the reduced problem is the pair `(y, b) = pairs[k]`.
    pub pairs: Vec<(usize, usize)>,
    /// `s(n)`.
    pub size: usize,
    /// `d(n)`.
    pub depth: usize,
}

impl ReducedProblem {
    pub fn index_of(&self, y: usize, b: usize) -> Option<usize> {
        self.pairs.iter().position(|&p| p == (y, b))
    }
}

/// The reduced axiom for `(b, y)` with `R`'s axiom `b` replaced by `weak` (a DNF over
/// the target inputs): `~G_{b,y} v weak o f`.
pub fn reduced_axiom(phi: &Formulation, b: usize, y: usize, weak: &Dnf) -> Result<Dnf> {
    let mut terms = phi.g[b].to_dnf_complement(&y).terms;
    terms.extend(compose_dnf(weak, &phi.f)?.terms);
    Ok(Dnf::new(terms))
}

/// Builds `R(f,g)`. `y` ranges over the `Q`-outputs some `g_b` can produce, so the
/// family has `|O^R|` times that many axioms, ordered by `b` then `y`.
pub fn reduced_problem(q: &SearchProblem, r: &SearchProblem, phi: &Formulation) -> Result<ReducedProblem> {
    phi.validate(q, r)?;
    let r_family = r.to_family()?;
    let labels = phi.g_labels();
    let mut pairs = Vec::new();
    let mut outputs = Vec::new();
    let mut relation = Vec::new();
    let mut axioms = Vec::new();
    for b in 0..r.outputs.len() {
        for &y in &labels {
            pairs.push((y, b));
            let label = format!("{}@{}", q.outputs[y], r.outputs[b]);
            outputs.push(label.clone());
            let row = (0..r.witnesses.len())
                .map(|c| {
                    let inner = r.relation[b][c].compose(&phi.f)?;
                    Ok(graft_label(&phi.g[b], y, &inner).pruned())
                })
                .collect::<Result<Vec<_>>>()?;
            relation.push(row);
            axioms.push(Axiom {
                label,
                dnf: reduced_axiom(phi, b, y, &r_family.axioms[b].dnf)?,
            });
        }
    }
    let name = format!("{}({})", r.name, q.name);
    let problem = SearchProblem {
        name: name.clone(),
        input_bits: q.input_bits,
        outputs,
        witnesses: r.witnesses.clone(),
        relation,
    };
    problem.validate()?;
    let family = AxiomFamily::new(name, Universe::plain(q.input_bits), axioms)?;
    Ok(ReducedProblem {
        problem,
        family,
        pairs,
        size: phi.size(),
        depth: phi.depth(),
    })
}

/// `g` with leaves equal to `y` replaced by `inner` and every other leaf by `false`.
fn graft_label(g: &DecisionTree<usize>, y: usize, inner: &DecisionTree<bool>) -> DecisionTree<bool> {
    match g {
        DecisionTree::Leaf(l) if *l == y => inner.clone(),
        DecisionTree::Leaf(_) => DecisionTree::leaf(false),
        DecisionTree::Query { var, zero, one } => {
            DecisionTree::query(*var, graft_label(zero, y, inner), graft_label(one, y, inner))
        }
    }
}

/// `Q -> P -> R` with `P = R(f,g)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub reduced: ReducedProblem,
    /// `Q -> P`: `f` the identity and each `g_{(y,b)}` the constant `y`.
    pub weakening: Formulation,
    /// `P -> R`: `f' = f`, `g'_b(x) = (g_b(x), b)`, `h'_{b,c} = c`.
    pub ce: CeFormulation,
}

impl Factorization {
    /// The composite `Q -> R` formulation: `f' o id` and `g_{g'_b}`.
    pub fn compose(&self) -> Formulation {
        let pairs = &self.reduced.pairs;
        Formulation {
            f: self.ce.base.f.clone(),
            g: self.ce.base.g.iter().map(|t| t.map(&|&k| pairs[k].0)).collect(),
        }
    }
}

/// Splits a valid formulation into a weakening into `R(f,g)` and a counter-example
/// formulation of `R(f,g)` into `R`, and validates both halves: the weakening through
/// `Sigma_2`-weakening of the false-formula families, the second by
/// [`check_ce_formulation`].
pub fn factorize(
    q: &SearchProblem,
    r: &SearchProblem,
    phi: &Formulation,
    limits: &Limits,
) -> Result<Factorization> {
    let reduced = reduced_problem(q, r, phi)?;
    let q_family = q.to_family()?;
    let pool: Vec<(&str, &Dnf)> = reduced
        .pairs
        .iter()
        .zip(&reduced.family.axioms)
        .map(|(&(y, _), ax)| (q_family.axioms[y].label.as_str(), &ax.dnf))
        .collect();
    check_weakening(&q_family, pool, limits)?;

    let weakening = Formulation {
        f: identity_map(q.input_bits),
        g: reduced.pairs.iter().map(|&(y, _)| DecisionTree::leaf(y)).collect(),
    };
    if let Some(w) = check_formulation(q, &reduced.problem, &weakening, limits)? {
        return Err(Error::precondition(format!("weakening step fails at {w:?}")));
    }

    let g = (0..r.outputs.len())
        .map(|b| {
            phi.g[b].map(&|&y| {
                reduced
                    .index_of(y, b)
                    .expect("every label of g_b is paired with b")
            })
        })
        .collect();
    let ce = CeFormulation {
        base: Formulation { f: phi.f.clone(), g },
        h: (0..r.outputs.len())
            .map(|_| (0..r.witnesses.len()).map(DecisionTree::leaf).collect())
            .collect(),
    };
    if let Some(w) = check_ce_formulation(&reduced.problem, r, &ce, limits)? {
        return Err(Error::precondition(format!("counter-example step fails at {w:?}")));
    }
    Ok(Factorization {
        reduced,
        weakening,
        ce,
    })
}

/// The pulled-back certificate with the parameters of its degree bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformedProof {
    pub proof: SAProof,
    pub metrics: SAMetrics,
    /// `s(n)`.
    pub size: usize,
    /// `d(n)`.
    pub depth: usize,
    /// `d'`, the degree of the input refutation.
    pub source_degree: usize,
    /// `d(n) (d' + 2)`.
    pub degree_bound: usize,
}

/// Pulls a refutation of `R`'s false-formula family back to `R(f,g)`: every entry
/// `(b, D', J_b)` becomes, for each `y`, `(~G_{b,y} v D' o f, (J_b o f) G_{b,y})`, and
/// the slack becomes `J o f`. The result is re-verified and its degree checked
/// against `d(n) (d' + 2)`.
pub fn transform_sa_proof(
    q: &SearchProblem,
    r: &SearchProblem,
    phi: &Formulation,
    refutation: &SAProof,
    limits: &Limits,
) -> Result<TransformedProof> {
    let r_family = r.to_family()?;
    let source = check_sa_proof(&r_family, refutation, limits)?;
    let reduced = reduced_problem(q, r, phi)?;
    let mut weakening = Vec::new();
    for e in &refutation.weakening {
        let b = r
            .outputs
            .iter()
            .position(|o| *o == e.source)
            .ok_or_else(|| Error::invalid(format!("unknown source axiom `{}`", e.source)))?;
        let composed = compose_junta(&e.junta, &phi.f)?;
        for (k, &(y, bb)) in reduced.pairs.iter().enumerate() {
            if bb != b {
                continue;
            }
            let paths: Vec<Conjunct> = phi.g[b].to_dnf(&y).terms;
            let mut junta = ConicalJunta::empty();
            for je in &composed.entries {
                for p in &paths {
                    let t = je.conjunct.and(p);
                    if !t.is_zero() {
                        junta.push(t, je.weight.clone());
                    }
                }
            }
            if junta.is_empty() {
                continue;
            }
            weakening.push(WeakeningEntry {
                source: reduced.family.axioms[k].label.clone(),
                dnf: reduced_axiom(phi, b, y, &e.dnf)?,
                junta,
            });
        }
    }
    let proof = SAProof {
        weakening,
        slack: compose_junta(&refutation.slack, &phi.f)?,
    };
    let metrics = check_sa_proof(&reduced.family, &proof, limits)?;
    let depth = phi.depth();
    let degree_bound = depth * (source.degree + 2);
    if metrics.degree > degree_bound {
        return Err(Error::invalid(format!(
            "transformed degree {} exceeds d(d'+2) = {degree_bound}",
            metrics.degree
        )));
    }
    Ok(TransformedProof {
        proof,
        metrics,
        size: phi.size(),
        depth,
        source_degree: source.degree,
        degree_bound,
    })
}

/// `sum_y G_{b,y}` as a polynomial; it is the constant 1 for every tree.
pub fn partition_sum(g: &DecisionTree<usize>) -> crate::algebra::Polynomial {
    let mut p = crate::algebra::Polynomial::zero();
    for (c, _) in g.paths() {
        p += &c.to_poly();
    }
    p
}

/// A uniformly random decision tree over `vars` of depth at most `depth`, never
/// querying a variable twice on a path.
pub fn random_tree<L, R: Rng>(
    rng: &mut R,
    vars: &[VarId],
    depth: usize,
    leaf: &mut impl FnMut(&mut R) -> L,
) -> DecisionTree<L> {
    if depth == 0 || vars.is_empty() || rng.gen_bool(0.25) {
        return DecisionTree::leaf(leaf(rng));
    }
    let k = rng.gen_range(0..vars.len());
    let v = vars[k];
    let rest: Vec<VarId> = vars.iter().copied().filter(|&w| w != v).collect();
    let zero = random_tree(rng, &rest, depth - 1, leaf);
    let one = random_tree(rng, &rest, depth - 1, leaf);
    DecisionTree::query(v, zero, one)
}

/// The full tree over `x_1..x_n` computing `label`, pruned.
pub fn tree_from_fn<L: Clone + PartialEq>(n: usize, label: impl Fn(&PlainBits) -> L) -> DecisionTree<L> {
    fn go<L: Clone + PartialEq>(
        k: usize,
        n: usize,
        bits: &mut Vec<bool>,
        label: &impl Fn(&PlainBits) -> L,
    ) -> DecisionTree<L> {
        if k == n {
            return DecisionTree::leaf(label(&PlainBits(bits.clone())));
        }
        bits.push(false);
        let zero = go(k + 1, n, bits, label);
        bits.pop();
        bits.push(true);
        let one = go(k + 1, n, bits, label);
        bits.pop();
        DecisionTree::query(VarId::plain(k + 1), zero, one)
    }
    go(0, n, &mut Vec::with_capacity(n), &label).pruned()
}

/// A random valid formulation: random `f` trees of depth at most `f_depth`; each
/// `g_b` answers a random correct `Q`-output wherever `b` solves `f(x)`, and a random
/// output elsewhere. `Q` must be total.
pub fn random_formulation<R: Rng>(
    rng: &mut R,
    q: &SearchProblem,
    r: &SearchProblem,
    f_depth: usize,
    limits: &Limits,
) -> Result<Formulation> {
    limits.check("input bits", q.input_bits, limits.max_input_bits)?;
    let xs: Vec<VarId> = (1..=q.input_bits).map(VarId::plain).collect();
    let f: Vec<DecisionTree<bool>> = (0..r.input_bits)
        .map(|_| random_tree(rng, &xs, f_depth, &mut |g: &mut R| g.gen_bool(0.5)).pruned())
        .collect();
    let npoints = 1usize << q.input_bits;
    let mut g = Vec::with_capacity(r.outputs.len());
    for b in 0..r.outputs.len() {
        let mut table = Vec::with_capacity(npoints);
        for code in 0..npoints as u64 {
            let x = PlainBits::from_code(code, q.input_bits);
            let a = PlainBits(f.iter().map(|t| *t.eval(&x)).collect());
            let y = if r.solves(&a, b) {
                let good: Vec<usize> = (0..q.outputs.len()).filter(|&y| q.solves(&x, y)).collect();
                if good.is_empty() {
                    return Err(Error::precondition(format!(
                        "`{}` has no solution at {}",
                        q.name,
                        bit_string(&x)
                    )));
                }
                good[rng.gen_range(0..good.len())]
            } else {
                rng.gen_range(0..q.outputs.len())
            };
            table.push(y);
        }
        g.push(tree_from_fn(q.input_bits, |x| {
            let code = x.0.iter().enumerate().fold(0usize, |acc, (k, &v)| acc | (usize::from(v) << k));
            table[code]
        }));
    }
    Ok(Formulation { f, g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::{least_number, least_number_refutation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn a(k: usize) -> VarId {
        VarId::plain(k)
    }

    /// `{x}, {~x}` as a false-formula problem on one bit.
    fn toggle() -> SearchProblem {
        let fam = AxiomFamily::new(
            "toggle",
            Universe::plain(1),
            vec![
                Axiom {
                    label: "pos".into(),
                    dnf: Dnf::new(vec![Conjunct::pos(a(1))]),
                },
                Axiom {
                    label: "neg".into(),
                    dnf: Dnf::new(vec![Conjunct::neg(a(1))]),
                },
            ],
        )
        .unwrap();
        SearchProblem::from_family(&fam).unwrap()
    }

    fn toggle_refutation() -> SAProof {
        let fam = toggle().to_family().unwrap();
        let weakening = fam
            .axioms
            .iter()
            .map(|ax| WeakeningEntry {
                source: ax.label.clone(),
                dnf: ax.dnf.clone(),
                junta: ConicalJunta::unit(),
            })
            .collect();
        SAProof {
            weakening,
            slack: ConicalJunta::empty(),
        }
    }

    #[test]
    fn false_formula_round_trip() {
        let fam = least_number(3).unwrap();
        let p = SearchProblem::from_family(&fam).unwrap();
        assert_eq!(p.to_family().unwrap().axioms, fam.axioms);
        assert_eq!(p.totality_counterexample(&Limits::default()).unwrap(), None);
        // x = 0b110: a_1 = 0, a_2 = 1, so least2 is the false axiom.
        let x = PlainBits::from_code(0b110, 3);
        let solved: Vec<usize> = (0..p.outputs.len()).filter(|&b| p.solves(&x, b)).collect();
        assert_eq!(solved, vec![2]);
    }

    #[test]
    fn identity_and_permuted_formulations() {
        let l = Limits::default();
        let p = SearchProblem::from_family(&least_number(3).unwrap()).unwrap();
        assert_eq!(check_formulation(&p, &p, &Formulation::identity(&p), &l).unwrap(), None);
        let mut bad = Formulation::identity(&p);
        bad.f.swap(0, 2);
        let w = check_formulation(&p, &p, &bad, &l).unwrap().expect("swapped inputs break it");
        // x = 100: f(x) = 001 has least bit 3, which is wrong for x.
        assert_eq!(w.x, "100");
        assert_eq!(w.b, 3);
    }

    #[test]
    fn ce_formulation_checks() {
        let l = Limits::default();
        let t = toggle();
        let id = Formulation::identity(&t);
        let good = CeFormulation {
            base: id.clone(),
            h: vec![vec![DecisionTree::leaf(0)], vec![DecisionTree::leaf(0)]],
        };
        assert_eq!(check_ce_formulation(&t, &t, &good, &l).unwrap(), None);
        let p = SearchProblem::from_family(&least_number(2).unwrap()).unwrap();
        let id = Formulation::identity(&p);
        let h = (0..p.outputs.len())
            .map(|_| (0..p.witnesses.len()).map(DecisionTree::leaf).collect())
            .collect();
        let psi = CeFormulation { base: id.clone(), h };
        assert_eq!(check_ce_formulation(&p, &p, &psi, &l).unwrap(), None);
        // Answering witness 1 always: for `least1` that slot is the padding tree.
        let mut wrong = psi.clone();
        wrong.h[1][0] = DecisionTree::leaf(1);
        let w = check_ce_formulation(&p, &p, &wrong, &l).unwrap().unwrap();
        assert_eq!((w.b, w.z, w.c), (1, 0, Some(1)));
    }

    #[test]
    fn reduced_problem_of_toggle() {
        let t = toggle();
        // Q = least_number(2), f(x) = x_1 XOR x_2 at depth 2, g constant.
        let q = SearchProblem::from_family(&least_number(2).unwrap()).unwrap();
        let xor = DecisionTree::query(a(1), DecisionTree::var(a(2)), DecisionTree::query(
            a(2),
            DecisionTree::leaf(true),
            DecisionTree::leaf(false),
        ));
        let phi = Formulation {
            f: vec![xor],
            g: vec![DecisionTree::leaf(1), DecisionTree::leaf(2)],
        };
        let red = reduced_problem(&q, &t, &phi).unwrap();
        assert_eq!(red.family.len(), 2 * phi.g_labels().len());
        assert_eq!(red.pairs, vec![(1, 0), (2, 0), (1, 1), (2, 1)]);
        assert!(red.family.find_satisfying(22).unwrap().is_none());
        // The explicit problem and the family agree pointwise.
        let as_family = red.problem.to_family().unwrap();
        for code in 0..4 {
            let x = PlainBits::from_code(code, 2);
            assert_eq!(as_family.falsified(&x), red.family.falsified(&x));
        }
    }

    #[test]
    fn factorization_and_transform_on_least_number() {
        let l = Limits::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = SearchProblem::from_family(&least_number(3).unwrap()).unwrap();
        let r = SearchProblem::from_family(&least_number(3).unwrap()).unwrap();
        let refutation = least_number_refutation(3).unwrap();
        for _ in 0..10 {
            let phi = random_formulation(&mut rng, &q, &r, 2, &l).unwrap();
            assert_eq!(check_formulation(&q, &r, &phi, &l).unwrap(), None);
            let fac = factorize(&q, &r, &phi, &l).unwrap();
            let composite = fac.compose();
            for code in 0..8 {
                let x = PlainBits::from_code(code, 3);
                assert_eq!(composite.apply_f(&x), phi.apply_f(&x));
                for b in 0..r.outputs.len() {
                    assert_eq!(composite.g[b].eval(&x), phi.g[b].eval(&x));
                }
            }
            let out = transform_sa_proof(&q, &r, &phi, &refutation, &l).unwrap();
            assert!(out.metrics.degree <= out.degree_bound);
            assert_eq!(out.degree_bound, phi.depth() * 3);
        }
    }

    #[test]
    fn toggle_transform_stays_within_bound() {
        let l = Limits::default();
        let t = toggle();
        let q = SearchProblem::from_family(&least_number(2).unwrap()).unwrap();
        let phi = Formulation {
            f: vec![DecisionTree::var(a(2))],
            g: vec![
                DecisionTree::query(a(1), DecisionTree::leaf(2), DecisionTree::leaf(1)),
                DecisionTree::leaf(1),
            ],
        };
        let out = transform_sa_proof(&q, &t, &phi, &toggle_refutation(), &l).unwrap();
        assert_eq!(out.source_degree, 1);
        assert!(out.metrics.degree <= 3);
        assert_eq!(out.degree_bound, 3);
    }

    #[test]
    fn invalid_formulation_is_refused() {
        let l = Limits::default();
        let p = SearchProblem::from_family(&least_number(3).unwrap()).unwrap();
        let mut bad = Formulation::identity(&p);
        bad.f.swap(0, 2);
        assert!(matches!(factorize(&p, &p, &bad, &l), Err(Error::WeakeningFailed { .. })));
    }

    #[test]
    fn partition_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<VarId> = (1..=4).map(VarId::plain).collect();
        for _ in 0..50 {
            let g = random_tree(&mut rng, &xs, 3, &mut |r: &mut ChaCha8Rng| r.gen_range(0..3usize));
            assert!(partition_sum(&g).is_constant(&crate::ratio::int(1)));
        }
    }

    #[test]
    fn term_trees() {
        let t = Conjunct::new([a(1)], [a(3)]);
        let tree = term_false_tree(&t);
        assert_eq!(tree.rejecting(), Dnf::new(vec![t]));
        assert_eq!(term_false_tree(&Conjunct::top()).rejecting(), Dnf::new(vec![Conjunct::top()]));
    }
}
