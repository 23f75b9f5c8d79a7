use std::fmt;

use super::NodeId;
use crate::domain::ConstraintSequence;
use crate::lang::{EdgeId, LocId, Operation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathStep {
    pub edge: EdgeId,
    pub op: Operation,
    /// Location reached by this step.
    pub location: LocId,
    pub line: u32,
}

/// A program path ⟨(op₁, l₁), …, (opₙ, lₙ)⟩ starting at `start`.
///
/// `nodes` holds the ARG nodes along the path, root first, so it has one more
/// entry than `steps`. Paths built by hand may leave it empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub start: LocId,
    pub steps: Vec<PathStep>,
    pub nodes: Vec<NodeId>,
}

impl Path {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn constraints(&self) -> ConstraintSequence {
        ConstraintSequence::new(self.steps.iter().map(|s| s.op.clone()).collect())
    }

    /// Location before step `i` (0-based), i.e. l_i in path notation.
    pub fn location(&self, i: usize) -> LocId {
        if i == 0 {
            self.start
        } else {
            self.steps[i - 1].location
        }
    }

    pub fn target(&self) -> LocId {
        self.location(self.steps.len())
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.start)?;
        for s in &self.steps {
            write!(f, " -[{}]-> {}", s.op, s.location)?;
        }
        Ok(())
    }
}
