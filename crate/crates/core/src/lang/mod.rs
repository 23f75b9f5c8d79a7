//! Input language: parsing, validation and lowering to control-flow automata.

mod ast;
mod cfa;
mod error;
mod ops;
mod parser;

pub use ast::*;
pub use cfa::{
    build_cfa, load, Cfa, Edge, EdgeId, FunctionInstance, InstanceId, LocId, Location, VarInfo,
    VarScope, VerificationProblem,
};
pub use error::LangError;
pub use ops::{BinOp, CmpOp, Expr, Operation, Pred, Var};
pub use parser::{parse, ERROR_INTRINSIC, NONDET_INTRINSIC};
