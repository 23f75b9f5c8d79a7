//! Reachability analysis over the location × explicit-value domain.

mod arg;
mod operators;
mod path;
mod reach;

use std::time::Instant;

pub use arg::{Arg, ArgNode, NodeId};
pub use operators::{
    merge_sep, prec_adjust, stop_sep, transfer, AbstractState, Cpa, ExplicitCpa, MergeOperator,
};
pub use path::{Path, PathStep};
pub use reach::reach;

/// Order in which waiting nodes are expanded. Ties break by node id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Traversal {
    /// Newest node first.
    #[default]
    Dfs,
    /// Oldest node first.
    Bfs,
}

#[derive(Debug, Clone)]
pub struct ReachConfig {
    pub traversal: Traversal,
    /// Cap on ARG nodes created over the whole session.
    pub state_budget: usize,
    /// Largest tracked integer, in bits. Loops that keep multiplying a
    /// tracked value would otherwise exhaust memory long before the node
    /// budget.
    pub value_bits: u64,
    pub deadline: Option<Instant>,
}

impl Default for ReachConfig {
    fn default() -> Self {
        ReachConfig {
            traversal: Traversal::Dfs,
            state_budget: 1_000_000,
            value_bits: 4096,
            deadline: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReachOutcome {
    TargetFound(NodeId),
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CpaError {
    #[error("state budget of {0} ARG nodes exceeded")]
    StateBudgetExceeded(usize),
    #[error("a tracked value exceeds {0} bits")]
    ValueTooLarge(u64),
    #[error("time limit exceeded")]
    Timeout,
    #[error("broken parent chain at node {}", .0.0)]
    BrokenParentChain(NodeId),
    #[error("path carries no ARG nodes")]
    PathWithoutNodes,
    #[error("refined precision adds nothing along the path")]
    NoPrecisionGain,
}
