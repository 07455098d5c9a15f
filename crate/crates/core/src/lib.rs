//! Exact proof-complexity machinery for the linear ordering principle.
//!
//! The crate is organised bottom-up:
//!
//! - [`algebra`]: multilinear polynomials over exact rationals, conjuncts, DNFs,
//!   conical juntas and decision trees.
//! - [`order`]: total orders on `[n]`, chain terms and brute-force enumeration.
//! - [`formulas`]: the LOP and LeastNumber axiom families and the explicit
//!   LeastNumber refutation.
//! - [`normalize`]: rewriting order-variable DNFs into normalized chain-term form.
//! - [`pe`]: the uniform-order pseudo-expectation and its combinatorial accounting.
//! - [`lp`] and [`sa`]: an exact rational simplex and the Sherali-Adams certificate
//!   checker / degree oracle built on it.
//! - [`reductions`]: explicit finite search problems and decision-tree reductions.
//! - [`covering`]: exact minimum covers of sets of permutations.
//! - [`oracle`]: independent brute-force reference routes used for cross-checking.
//! - [`acceptance`]: the experiment suite that backs the `report` command and the
//!   acceptance tests.

pub mod acceptance;
pub mod algebra;
pub mod covering;
pub mod formulas;
pub mod lp;
pub mod normalize;
pub mod oracle;
pub mod order;
pub mod pe;
pub mod ratio;
pub mod reductions;
pub mod sa;

mod error;

pub use error::{Error, Result};

/// Caps on every exhaustive pass in the crate. Operations that enumerate fail fast with
/// [`Error::LimitExceeded`] instead of running away.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Limits {
    /// Largest `n` for which all `n!` total orders are enumerated.
    pub max_order_n: usize,
    /// Largest support whose orderings are enumerated when counting a monomial.
    pub max_support: usize,
    /// Largest number of free variables in a boolean implication check.
    pub max_free_vars: usize,
    /// Largest number of input bits swept by reduction checks.
    pub max_input_bits: usize,
    /// Largest number of columns the LP oracle will build.
    pub max_lp_columns: usize,
    /// Largest number of conjuncts `check_conditions` will enumerate.
    pub max_conjuncts: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_order_n: 10,
            max_support: 10,
            max_free_vars: 22,
            max_input_bits: 20,
            max_lp_columns: 60_000,
            max_conjuncts: 2_000_000,
        }
    }
}

impl Limits {
    /// Environment variable overriding [`Limits::max_order_n`].
    pub const ENUM_CAP_ENV: &'static str = "LOPLAB_ENUM_CAP";

    /// Defaults, with the enumeration cap taken from `LOPLAB_ENUM_CAP` when set.
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Some(cap) = std::env::var(Self::ENUM_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
        {
            limits.max_order_n = cap;
        }
        limits
    }

    pub(crate) fn check(&self, what: &'static str, size: usize, cap: usize) -> Result<()> {
        if size > cap {
            Err(Error::LimitExceeded { what, size, cap })
        } else {
            Ok(())
        }
    }

    pub(crate) fn check_orders(&self, n: usize) -> Result<()> {
        self.check("total-order enumeration n", n, self.max_order_n)
    }
}
