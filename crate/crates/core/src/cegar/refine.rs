use std::collections::BTreeSet;

use super::interpolation::{interpolate, InterpolationError};
use crate::cpa::Path;
use crate::domain::{AbstractAssignment, ConstraintSequence, Precision, ProgramPrecision};
use crate::lang::{Cfa, LangError, Operation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    /// Final assignment of the full-precision replay.
    Feasible(AbstractAssignment),
    /// 1-based index of the first operation whose post is contradicting.
    Infeasible(usize),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

/// Full-precision replay of `ops` from the empty assignment.
pub fn is_feasible(ops: &[Operation]) -> Feasibility {
    let mut v = AbstractAssignment::top();
    for (i, op) in ops.iter().enumerate() {
        v = v.sp(op);
        if v.is_contradicting() {
            return Feasibility::Infeasible(i + 1);
        }
    }
    Feasibility::Feasible(v)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RefineError {
    #[error("error path is feasible")]
    FeasiblePath,
    #[error(transparent)]
    Interpolation(#[from] InterpolationError),
}

/// Precision from inductive interpolants along an infeasible path.
///
/// For i = 1 … n−1 the interpolant Γᵢ of `(Γᵢ₋₁ ++ opᵢ, ⟨opᵢ₊₁ … opₙ⟩)` is
/// computed and the variables it binds are tracked at lᵢ. All other
/// locations, including the target, get nothing.
pub fn refine(path: &Path) -> Result<ProgramPrecision, RefineError> {
    let ops: Vec<Operation> = path.steps.iter().map(|s| s.op.clone()).collect();
    if is_feasible(&ops).is_feasible() {
        return Err(RefineError::FeasiblePath);
    }
    let mut precision = ProgramPrecision::empty();
    let mut gamma = ConstraintSequence::empty();
    for i in 1..ops.len() {
        let mut minus = gamma.clone();
        minus.push(ops[i - 1].clone());
        let plus = ConstraintSequence::new(ops[i..].to_vec());
        let itp = interpolate(&minus, &plus)?;
        let vars: BTreeSet<_> = itp.variables().cloned().collect();
        if !vars.is_empty() {
            let loc = path.location(i);
            let widened = precision.at(loc).union(&Precision { tracked: vars });
            precision.insert(loc, widened);
        }
        gamma = itp.constraints();
    }
    Ok(precision)
}

/// Adds every variable tracked anywhere to all locations of its scope.
pub fn scope_precision(pi: &ProgramPrecision, cfa: &Cfa) -> Result<ProgramPrecision, LangError> {
    pi.scoped(cfa)
}

/// True if replaying `path` with abstraction to `precision` after every step
/// hits a contradiction before the target is entered.
pub fn eliminates_path(path: &Path, precision: &ProgramPrecision) -> bool {
    let mut v = AbstractAssignment::top().restrict(&precision.at(path.start).tracked);
    for step in &path.steps {
        v = v.sp(&step.op);
        if v.is_contradicting() {
            return true;
        }
        v = v.restrict(&precision.at(step.location).tracked);
    }
    false
}
