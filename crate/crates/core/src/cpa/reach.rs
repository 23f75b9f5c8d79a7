use std::time::Instant;

use super::{AbstractState, Arg, Cpa, CpaError, NodeId, ReachConfig, ReachOutcome};
use crate::domain::ProgramPrecision;
use crate::lang::VerificationProblem;

/// Expands waiting nodes until a target state is created or nothing is left.
///
/// Successor precision is looked up in `precision` at the successor's
/// location. Covered successors are kept in the graph, marked with their
/// covering node.
pub fn reach<C: Cpa>(
    problem: &VerificationProblem,
    arg: &mut Arg,
    precision: &ProgramPrecision,
    cpa: &C,
    config: &ReachConfig,
) -> Result<ReachOutcome, CpaError> {
    let root = arg.root();
    if arg.node(root).is_target {
        return Ok(ReachOutcome::TargetFound(root));
    }
    let mut iterations = 0u64;
    while let Some(id) = arg.pop(config.traversal) {
        iterations += 1;
        if iterations.is_multiple_of(128) {
            if let Some(deadline) = config.deadline {
                if Instant::now() >= deadline {
                    arg.requeue(id);
                    return Err(CpaError::Timeout);
                }
            }
        }
        let state = arg.node(id).state.clone();
        for edge in problem.cfa.outgoing(state.location) {
            for succ in cpa.transfer(&state, edge) {
                let pi = precision.at(succ.location).clone();
                let data = cpa.prec(succ.data, &pi);
                let succ = AbstractState::new(succ.location, data);
                if arg.created() >= config.state_budget {
                    arg.requeue(id);
                    return Err(CpaError::StateBudgetExceeded(config.state_budget));
                }
                if succ
                    .data
                    .bindings()
                    .any(|(_, c)| c.bits() > config.value_bits)
                {
                    arg.requeue(id);
                    return Err(CpaError::ValueTooLarge(config.value_bits));
                }
                if problem.is_error(succ.location) {
                    let t = arg.push_node(succ, pi, Some((id, edge.id)), true);
                    return Ok(ReachOutcome::TargetFound(t));
                }

                if cpa.merges() {
                    let existing: Vec<NodeId> = arg.reached_at(succ.location).collect();
                    for other in existing {
                        let old = arg.node(other).state.data.clone();
                        let merged = cpa.merge(&succ.data, &old, &pi);
                        if merged != old {
                            let children = arg.node(other).children.clone();
                            for c in children {
                                arg.remove_subtree(c);
                            }
                            arg.replace_data(other, merged);
                            arg.requeue(other);
                        }
                    }
                }

                let candidates = arg.covering_candidates(succ.location, &succ.data);
                let covering = {
                    let states: Vec<_> = candidates
                        .iter()
                        .map(|n| &arg.node(*n).state.data)
                        .collect();
                    cpa.stop(&succ.data, &states, &pi).map(|i| candidates[i])
                };
                let new = arg.push_node(succ, pi, Some((id, edge.id)), false);
                match covering {
                    Some(by) => arg.mark_covered(new, by),
                    None => arg.enqueue(new),
                }
            }
        }
    }
    Ok(ReachOutcome::Exhausted)
}
