use crate::domain::{AbstractAssignment, Precision};
use crate::lang::{Edge, LocId};

/// A program location paired with an abstract data state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AbstractState {
    pub location: LocId,
    pub data: AbstractAssignment,
}

impl AbstractState {
    pub fn new(location: LocId, data: AbstractAssignment) -> Self {
        AbstractState { location, data }
    }
}

/// Operators of a configurable program analysis with dynamic precision
/// adjustment. The abstract domain is fixed to location × explicit values.
pub trait Cpa {
    /// Abstract successors of `state` along `edge`.
    fn transfer(&self, state: &AbstractState, edge: &Edge) -> Vec<AbstractState>;

    /// Combines a new state into an existing one at the same location.
    fn merge(
        &self,
        new: &AbstractAssignment,
        existing: &AbstractAssignment,
        precision: &Precision,
    ) -> AbstractAssignment;

    /// False if `merge` always returns the existing state unchanged; the
    /// reachability loop then skips merging.
    fn merges(&self) -> bool {
        true
    }

    /// Index of a state in `reached` that covers `state`, if any. `reached`
    /// holds the states at the same location that the reached-set index
    /// reports as possibly covering.
    fn stop(
        &self,
        state: &AbstractAssignment,
        reached: &[&AbstractAssignment],
        precision: &Precision,
    ) -> Option<usize>;

    /// Abstracts `state` to `precision`.
    fn prec(&self, state: AbstractAssignment, precision: &Precision) -> AbstractAssignment;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MergeOperator {
    /// Never combine states.
    #[default]
    Sep,
    /// Join states that meet at a location.
    Join,
}

/// The composite of the location analysis and the explicit-value analysis.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExplicitCpa {
    pub merge: MergeOperator,
}

impl Cpa for ExplicitCpa {
    fn merges(&self) -> bool {
        self.merge != MergeOperator::Sep
    }

    fn transfer(&self, state: &AbstractState, edge: &Edge) -> Vec<AbstractState> {
        transfer(state, edge)
    }

    fn merge(
        &self,
        new: &AbstractAssignment,
        existing: &AbstractAssignment,
        precision: &Precision,
    ) -> AbstractAssignment {
        match self.merge {
            MergeOperator::Sep => merge_sep(new, existing, precision),
            MergeOperator::Join => new.join(existing),
        }
    }

    fn stop(
        &self,
        state: &AbstractAssignment,
        reached: &[&AbstractAssignment],
        _precision: &Precision,
    ) -> Option<usize> {
        reached.iter().position(|w| state.leq(w))
    }

    fn prec(&self, state: AbstractAssignment, precision: &Precision) -> AbstractAssignment {
        prec_adjust(&state, precision)
    }
}

/// Successor along `edge`; none if the result is contradicting.
pub fn transfer(state: &AbstractState, edge: &Edge) -> Vec<AbstractState> {
    debug_assert_eq!(edge.source, state.location);
    if state.data.is_contradicting() {
        return Vec::new();
    }
    let data = state.data.sp(&edge.op);
    if data.is_contradicting() {
        Vec::new()
    } else {
        vec![AbstractState::new(edge.target, data)]
    }
}

pub fn merge_sep(
    _new: &AbstractAssignment,
    existing: &AbstractAssignment,
    _precision: &Precision,
) -> AbstractAssignment {
    existing.clone()
}

pub fn stop_sep<'a, I>(state: &AbstractAssignment, reached: I, _precision: &Precision) -> bool
where
    I: IntoIterator<Item = &'a AbstractAssignment>,
{
    state.is_contradicting() || reached.into_iter().any(|w| state.leq(w))
}

pub fn prec_adjust(state: &AbstractAssignment, precision: &Precision) -> AbstractAssignment {
    state.restrict(&precision.tracked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{CmpOp, EdgeId, Expr, Operation, Pred, Var};

    fn a(pairs: &[(&str, i64)]) -> AbstractAssignment {
        AbstractAssignment::from_ints(pairs.iter().copied())
    }

    fn edge(op: Operation) -> Edge {
        Edge {
            id: EdgeId(0),
            source: LocId(1),
            target: LocId(2),
            op,
            line: 1,
        }
    }

    #[test]
    fn transfer_drops_contradicting_successors() {
        let guard = edge(Operation::assume(Pred::new(
            Expr::var("flag"),
            CmpOp::Gt,
            Expr::int(0),
        )));
        let s = AbstractState::new(LocId(1), a(&[("flag", 0)]));
        assert!(transfer(&s, &guard).is_empty());

        let assign = edge(Operation::assign("x", Expr::int(7)));
        let s = AbstractState::new(LocId(1), a(&[]));
        assert_eq!(
            transfer(&s, &assign),
            vec![AbstractState::new(LocId(2), a(&[("x", 7)]))]
        );

        let s = AbstractState::new(LocId(1), AbstractAssignment::bottom());
        assert!(transfer(&s, &assign).is_empty());
    }

    #[test]
    fn merge_sep_keeps_existing() {
        let pi = Precision::default();
        assert_eq!(
            merge_sep(&a(&[("x", 1)]), &a(&[("x", 2)]), &pi),
            a(&[("x", 2)])
        );
        let v = a(&[("y", 3)]);
        assert_eq!(merge_sep(&v, &v, &pi), v);
        assert_eq!(merge_sep(&AbstractAssignment::bottom(), &v, &pi), v);
    }

    #[test]
    fn stop_sep_checks_individual_coverage() {
        let pi = Precision::default();
        assert!(stop_sep(&a(&[("x", 1), ("y", 2)]), [&a(&[("x", 1)])], &pi));
        assert!(!stop_sep(&a(&[("x", 1)]), [&a(&[("x", 2)])], &pi));
        assert!(stop_sep(&AbstractAssignment::bottom(), [], &pi));
    }

    #[test]
    fn precision_adjustment_restricts() {
        let v = a(&[("ticks", 3), ("flag", 0)]);
        let flag = Precision::new([Var::new("flag")]);
        assert_eq!(prec_adjust(&v, &flag), a(&[("flag", 0)]));
        assert_eq!(prec_adjust(&v, &Precision::default()), a(&[]));
        let wide = Precision::new(["ticks", "flag", "z"].map(Var::new));
        assert_eq!(prec_adjust(&v, &wide), v);
    }
}
