//! The explicit-value abstract domain.

mod assignment;
mod constraint;
mod precision;

use thiserror::Error;

pub use assignment::{AbstractAssignment, ConcreteStore, Value};
pub use constraint::{sp_ops, ConstraintSequence};
pub use precision::{Precision, ProgramPrecision};

use crate::lang::Var;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("cannot rename `{0}`: it has no binding")]
    RenameSourceUnbound(Var),
    #[error("cannot rename to `{0}`: it is already bound")]
    RenameTargetBound(Var),
}
