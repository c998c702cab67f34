//! Index-notation expressions with Einstein summation: repeated indices in a
//! term are summed, indices occurring once are free.

pub mod ast;
pub mod corpus;
pub mod eval;
pub mod parser;

pub use ast::{Expr, Factor, Term};
pub use eval::{evaluate, evaluate_with, Binding, ContractionOrder, Environment, Kind, Value};
pub use parser::parse;

use crate::verify::VerificationReport;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("index {index} occurs {count} times in term `{term}`")]
    RepeatedIndex { index: String, count: usize, term: String },

    #[error("free indices differ across a sum (near position {pos}): {left:?} vs {right:?}")]
    FreeIndexMismatch { pos: usize, left: Vec<String>, right: Vec<String> },

    #[error("unbound name {0}")]
    Unbound(String),

    #[error("{name} takes {expected} indices, got {got}")]
    Arity { name: String, expected: usize, got: usize },

    #[error("psi applied more than once in a term")]
    PsiTwice,

    #[error("{0} is a reserved name")]
    Reserved(String),

    #[error("index range mismatch: {0}")]
    Extent(String),

    #[error("type error: {0}")]
    Type(String),
}

/// Evaluates both sides; passes iff the largest entry of the difference is
/// below `tol · (1 + max(|lhs|, |rhs|))`.
pub fn check_identity(
    name: &str,
    lhs: &Expr,
    rhs: &Expr,
    env: &Environment,
    tol: f64,
) -> Result<VerificationReport, ExprError> {
    let (fl, fr) = (lhs.free_indices(), rhs.free_indices());
    if fl != fr {
        return Err(ExprError::FreeIndexMismatch { pos: 0, left: fl, right: fr });
    }
    let a = evaluate(lhs, env)?;
    let b = evaluate(rhs, env)?;
    let diff = a.difference(&b)?.max_norm();
    let scale = 1.0 + a.max_norm().max(b.max_norm());
    Ok(VerificationReport::new(format!("identity:{name}"), tol)
        .input("lhs", lhs.to_string())
        .input("rhs", rhs.to_string())
        .residual("scaled_difference", diff / scale)
        .value("max_difference", diff)
        .value("lhs_norm", a.max_norm())
        .value("rhs_norm", b.max_norm())
        .finish())
}
