//! Exact solvers for integer programs whose constraint matrix is a generalized
//! matching block (column 1-norms at most 2) bordered by `p` extra columns and
//! `h` extra rows.
//!
//! The block form is
//!
//! ```text
//! min  aᵀy + cᵀx
//! s.t. C y + W x = d
//!      T y + M x = b
//!      e ≤ y ≤ g,  l ≤ x ≤ u,  y, x integral
//! ```
//!
//! Solutions are stored as one vector `(y, x)` of length `p + n`.

pub mod circuits;
pub mod convexity;
pub mod generators;
pub mod graver;
pub mod instance;
pub mod lp;
pub mod matching;
pub mod mixed;
pub mod numeric;
pub mod oracle;
pub mod pfaffian;
pub mod poly;
pub mod proximity;
pub mod psi;
pub mod reduction;
pub mod tall;

pub use instance::{Ext, IlpInstance, Matrix};
pub use numeric::{Field, Rational};
pub use poly::TruncatedPoly;

/// Result of an exact optimization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Optimal { value: i64, solution: Vec<i64> },
    Infeasible,
    Unbounded,
}

impl Outcome {
    pub fn value(&self) -> Option<i64> {
        match self {
            Outcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            Outcome::Optimal { .. } => "optimal",
            Outcome::Infeasible => "infeasible",
            Outcome::Unbounded => "unbounded",
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("size cap exceeded: {0}")]
    Cap(String),
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("certificate check failed: {0}")]
    Certificate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
