//! Counterexample-guided abstraction refinement with explicit-value
//! interpolation.

mod interpolation;
mod refine;
mod witness;

use std::fmt;
use std::time::{Duration, Instant};

pub use interpolation::{
    interpolate, interpolate_assignments, restrict_to_common, Interpolant, InterpolationError,
};
pub use refine::{eliminates_path, is_feasible, refine, scope_precision, Feasibility, RefineError};
pub use witness::{Witness, WitnessStep};

use crate::cpa::{
    reach, Arg, CpaError, ExplicitCpa, MergeOperator, Path, ReachConfig, ReachOutcome, Traversal,
};
use crate::domain::ProgramPrecision;
use crate::lang::VerificationProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AnalysisMode {
    /// Track every variable everywhere; no refinement.
    ExplicitFull,
    #[default]
    ExplicitCegar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RefineStrategy {
    /// Cut the ARG below the first node that gains precision.
    #[default]
    Prune,
    /// Rebuild the ARG from the initial state.
    Restart,
}

#[derive(Debug, Clone)]
pub struct CegarConfig {
    pub mode: AnalysisMode,
    pub refine: RefineStrategy,
    pub scoped_precision: bool,
    pub traversal: Traversal,
    pub merge: MergeOperator,
    /// Cap on ARG nodes created over the whole run, restarts included.
    pub state_budget: usize,
    pub max_refinements: usize,
    pub time_limit: Option<Duration>,
}

impl Default for CegarConfig {
    fn default() -> Self {
        CegarConfig {
            mode: AnalysisMode::ExplicitCegar,
            refine: RefineStrategy::Prune,
            scoped_precision: true,
            traversal: Traversal::Dfs,
            merge: MergeOperator::Sep,
            state_budget: 1_000_000,
            max_refinements: 100,
            time_limit: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownReason {
    StateBudgetExceeded,
    Timeout,
    /// An infeasible path yielded no new precision.
    RefinementFailed,
    MaxRefinementsExceeded,
}

impl fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnknownReason::StateBudgetExceeded => "StateBudgetExceeded",
            UnknownReason::Timeout => "Timeout",
            UnknownReason::RefinementFailed => "RefinementFailed",
            UnknownReason::MaxRefinementsExceeded => "MaxRefinementsExceeded",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Safe,
    Unsafe(Box<Witness>),
    Unknown(UnknownReason),
}

impl Verdict {
    pub fn is_safe(&self) -> bool {
        matches!(self, Verdict::Safe)
    }

    pub fn is_unsafe(&self) -> bool {
        matches!(self, Verdict::Unsafe(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Safe => f.write_str("SAFE"),
            Verdict::Unsafe(_) => f.write_str("UNSAFE"),
            Verdict::Unknown(r) => write!(f, "UNKNOWN({r})"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    pub refinements: usize,
    /// ARG nodes created over the run, restarts included.
    pub arg_nodes_created: usize,
    /// Largest ARG at any point.
    pub arg_nodes_peak: usize,
    /// Refinements whose precision did not exclude the refuted path.
    pub path_elimination_violations: usize,
    /// Largest number of variables tracked at one location.
    pub max_precision_size: usize,
    /// Number of (location, variable) pairs in the final precision.
    pub precision_pairs: usize,
}

#[derive(Debug, Clone)]
pub struct RefinementRecord {
    pub path: Path,
    /// Precision computed from this path alone, before scoping.
    pub refined: ProgramPrecision,
    pub eliminated: bool,
}

#[derive(Debug, Clone)]
pub struct CegarOutcome {
    pub verdict: Verdict,
    pub stats: Stats,
    pub precision: ProgramPrecision,
    pub arg: Arg,
    pub refinements: Vec<RefinementRecord>,
}

/// Runs the configured analysis to a verdict.
pub fn verify(problem: &VerificationProblem, config: &CegarConfig) -> CegarOutcome {
    let start = Instant::now();
    let deadline = config.time_limit.map(|d| start + d);
    let cpa = ExplicitCpa {
        merge: config.merge,
    };
    let mut precision = match config.mode {
        AnalysisMode::ExplicitFull => ProgramPrecision::full(&problem.cfa),
        AnalysisMode::ExplicitCegar => ProgramPrecision::empty(),
    };
    let mut stats = Stats::default();
    let mut records = Vec::new();
    let mut arg = Arg::new(problem, &precision);
    // nodes created by ARGs discarded on restart
    let mut retired = 0usize;

    let verdict = loop {
        let reach_cfg = ReachConfig {
            traversal: config.traversal,
            state_budget: config.state_budget.saturating_sub(retired),
            deadline,
            ..ReachConfig::default()
        };
        let outcome = reach(problem, &mut arg, &precision, &cpa, &reach_cfg);
        stats.arg_nodes_peak = stats.arg_nodes_peak.max(arg.peak());
        let target = match outcome {
            Ok(ReachOutcome::Exhausted) => break Verdict::Safe,
            Ok(ReachOutcome::TargetFound(t)) => t,
            Err(CpaError::StateBudgetExceeded(_) | CpaError::ValueTooLarge(_)) => {
                break Verdict::Unknown(UnknownReason::StateBudgetExceeded)
            }
            Err(CpaError::Timeout) => break Verdict::Unknown(UnknownReason::Timeout),
            Err(_) => break Verdict::Unknown(UnknownReason::RefinementFailed),
        };
        let Ok(path) = arg.extract_error_path(problem, target) else {
            break Verdict::Unknown(UnknownReason::RefinementFailed);
        };
        let ops: Vec<_> = path.steps.iter().map(|s| s.op.clone()).collect();
        if is_feasible(&ops).is_feasible() {
            break Verdict::Unsafe(Box::new(Witness::from_path(&path, &problem.cfa)));
        }
        if config.mode == AnalysisMode::ExplicitFull {
            // cannot happen: full-precision states are the replay states
            break Verdict::Unknown(UnknownReason::RefinementFailed);
        }
        if stats.refinements >= config.max_refinements {
            break Verdict::Unknown(UnknownReason::MaxRefinementsExceeded);
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            break Verdict::Unknown(UnknownReason::Timeout);
        }
        let Ok(refined) = refine(&path) else {
            break Verdict::Unknown(UnknownReason::RefinementFailed);
        };
        stats.refinements += 1;
        let eliminated = eliminates_path(&path, &refined);
        if !eliminated {
            stats.path_elimination_violations += 1;
        }
        let increment = if config.scoped_precision {
            match scope_precision(&refined, &problem.cfa) {
                Ok(p) => p,
                Err(_) => break Verdict::Unknown(UnknownReason::RefinementFailed),
            }
        } else {
            refined.clone()
        };
        let previous = precision.clone();
        precision = precision.union(&increment);
        records.push(RefinementRecord {
            path: path.clone(),
            refined,
            eliminated,
        });
        match config.refine {
            RefineStrategy::Restart => {
                if precision.is_subset(&previous) {
                    break Verdict::Unknown(UnknownReason::RefinementFailed);
                }
                retired += arg.created();
                arg = Arg::new(problem, &precision);
            }
            RefineStrategy::Prune => {
                if arg.prune(problem, &precision, &path).is_err() {
                    break Verdict::Unknown(UnknownReason::RefinementFailed);
                }
            }
        }
    };

    stats.arg_nodes_created = retired + arg.created();
    stats.arg_nodes_peak = stats.arg_nodes_peak.max(arg.peak());
    stats.max_precision_size = precision.max_size();
    stats.precision_pairs = precision.pair_count();
    CegarOutcome {
        verdict,
        stats,
        precision,
        arg,
        refinements: records,
    }
}
