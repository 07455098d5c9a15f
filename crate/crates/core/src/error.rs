use thiserror::Error;

use crate::algebra::{PartialAssignment, Polynomial, VarId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("variable {var} is outside the declared universe ({universe})")]
    OutOfUniverse { var: VarId, universe: String },

    #[error("{what} = {size} exceeds the configured cap {cap}")]
    LimitExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("weakening `{label}` is not implied by its source axiom; falsifying assignment {witness}")]
    WeakeningFailed {
        label: String,
        witness: PartialAssignment,
    },

    #[error("certificate does not sum to -1; residual + 1 = {residual}")]
    IdentityFailed { residual: Box<Polynomial> },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
