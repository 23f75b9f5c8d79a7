//! Constraint sequences: the operations along a path, without locations.

use std::collections::BTreeSet;
use std::fmt;

use super::AbstractAssignment;
use crate::lang::{Operation, Var};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstraintSequence {
    pub ops: Vec<Operation>,
}

impl ConstraintSequence {
    pub fn new(ops: Vec<Operation>) -> Self {
        ConstraintSequence { ops }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Conjunction of sequences is concatenation.
    pub fn concat(&self, other: &ConstraintSequence) -> ConstraintSequence {
        let mut ops = self.ops.clone();
        ops.extend(other.ops.iter().cloned());
        ConstraintSequence { ops }
    }

    pub fn push(&mut self, op: Operation) {
        self.ops.push(op);
    }

    /// Left-to-right strongest post starting from `init`.
    pub fn sp(&self, init: &AbstractAssignment) -> AbstractAssignment {
        sp_ops(&self.ops, init)
    }

    /// Strongest post from the empty assignment.
    pub fn post(&self) -> AbstractAssignment {
        self.sp(&AbstractAssignment::top())
    }

    pub fn is_contradicting(&self) -> bool {
        self.post().is_contradicting()
    }

    /// Variables occurring anywhere in the sequence.
    pub fn variables(&self) -> BTreeSet<Var> {
        self.ops.iter().flat_map(|op| op.variables()).collect()
    }
}

/// Strongest post of a slice of operations; stops early once contradicting.
pub fn sp_ops(ops: &[Operation], init: &AbstractAssignment) -> AbstractAssignment {
    let mut v = init.clone();
    for op in ops {
        if v.is_contradicting() {
            break;
        }
        v = v.sp(op);
    }
    v
}

impl fmt::Display for ConstraintSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("⟨")?;
        for (i, op) in self.ops.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{op}")?;
        }
        f.write_str("⟩")
    }
}
