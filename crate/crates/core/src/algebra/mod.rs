//! Exact multilinear arithmetic and the syntactic objects built on it.
//!
//! Everything here is immutable once built and evaluates pointwise on boolean
//! assignments; [`Polynomial`] equality is structural because monomials are kept
//! sorted and zero coefficients are never stored.

mod poly;
mod syntax;
mod tree;
mod var;

pub use poly::{Monomial, Polynomial};
pub use syntax::{ConicalJunta, Conjunct, Dnf, JuntaEntry};
pub use tree::{compose, compose_conjunct, compose_dnf, compose_junta, tree_to_dnf, DecisionTree};
pub use var::{Assignment, PartialAssignment, PlainBits, Universe, VarId};

/// `t(x)` as a polynomial.
pub fn conjunct_to_poly(t: &Conjunct) -> Polynomial {
    t.to_poly()
}

/// `sum_{t in D} t(x) - 1`.
pub fn dnf_to_poly(d: &Dnf) -> Polynomial {
    d.to_poly()
}

/// Multilinear product.
pub fn poly_mul(p: &Polynomial, q: &Polynomial) -> Polynomial {
    p.mul_poly(q)
}
