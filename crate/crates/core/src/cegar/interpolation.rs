//! Interpolation for explicit-value assignments and constraint sequences.

use std::fmt;

use num_bigint::BigInt;

use crate::domain::{AbstractAssignment, ConstraintSequence};
use crate::lang::{CmpOp, Expr, Operation, Pred, Var};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InterpolationError {
    #[error("prefix and suffix are not contradicting together")]
    NotContradicting,
    #[error("interpolation of a contradicting assignment")]
    ContradictingInput,
}

/// An assignment `V` with `v⁻ ⟹ V`, `V ∧ v⁺` contradicting and
/// `def(V) ⊆ def(v⁻) ∩ def(v⁺)`.
///
/// Starts from `v⁻` restricted to `def(v⁺)`, then drops bindings in
/// variable-name order as long as the conjunction with `v⁺` stays
/// contradicting.
pub fn interpolate_assignments(
    vminus: &AbstractAssignment,
    vplus: &AbstractAssignment,
) -> Result<AbstractAssignment, InterpolationError> {
    if vminus.is_contradicting() || vplus.is_contradicting() {
        return Err(InterpolationError::ContradictingInput);
    }
    if !vminus.conj(vplus).is_contradicting() {
        return Err(InterpolationError::NotContradicting);
    }
    let mut itp = restrict_to_common(vminus, vplus);
    let vars: Vec<Var> = itp.defined().cloned().collect();
    for x in vars {
        let smaller = itp.without(&x);
        if smaller.conj(vplus).is_contradicting() {
            itp = smaller;
        }
    }
    Ok(itp)
}

/// `v⁻` restricted to the variables `v⁺` defines.
pub fn restrict_to_common(
    vminus: &AbstractAssignment,
    vplus: &AbstractAssignment,
) -> AbstractAssignment {
    vminus.restrict_by(|x| vplus.value_of(x).is_some())
}

/// A sequence of equality assumes `[x == c]` with pairwise distinct
/// variables, or the single assume `[0 == 1]` when the prefix alone is
/// already contradicting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interpolant {
    assignment: AbstractAssignment,
}

impl Interpolant {
    pub fn from_assignment(assignment: AbstractAssignment) -> Self {
        Interpolant { assignment }
    }

    pub fn is_false(&self) -> bool {
        self.assignment.is_contradicting()
    }

    /// `sp(Γ, {})`.
    pub fn assignment(&self) -> &AbstractAssignment {
        &self.assignment
    }

    pub fn variables(&self) -> impl Iterator<Item = &Var> {
        self.assignment.defined()
    }

    pub fn constraints(&self) -> ConstraintSequence {
        if self.is_false() {
            let p = Pred::new(Expr::int(0), CmpOp::Eq, Expr::int(1));
            return ConstraintSequence::new(vec![Operation::assume(p)]);
        }
        let ops = self
            .assignment
            .bindings()
            .map(|(x, c)| {
                Operation::assume(Pred::new(
                    Expr::Var(x.clone()),
                    CmpOp::Eq,
                    Expr::Const(BigInt::clone(c)),
                ))
            })
            .collect();
        ConstraintSequence::new(ops)
    }
}

impl fmt::Display for Interpolant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.constraints().fmt(f)
    }
}

/// Interpolant for the contradicting pair `(γ⁻, γ⁺)`.
///
/// Computes `v = sp(γ⁻, {})` and removes each variable, in name order, whose
/// binding is not needed for `γ⁺` to stay contradicting.
pub fn interpolate(
    gamma_minus: &ConstraintSequence,
    gamma_plus: &ConstraintSequence,
) -> Result<Interpolant, InterpolationError> {
    if !gamma_minus.concat(gamma_plus).is_contradicting() {
        return Err(InterpolationError::NotContradicting);
    }
    let mut v = gamma_minus.post();
    if v.is_contradicting() {
        return Ok(Interpolant::from_assignment(v));
    }
    let vars: Vec<Var> = v.defined().cloned().collect();
    for x in vars {
        let candidate = v.without(&x);
        if gamma_plus.sp(&candidate).is_contradicting() {
            v = candidate;
        }
    }
    Ok(Interpolant::from_assignment(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(pairs: &[(&str, i64)]) -> AbstractAssignment {
        AbstractAssignment::from_ints(pairs.iter().copied())
    }

    fn assign(x: &str, c: i64) -> Operation {
        Operation::assign(x, Expr::int(c))
    }

    fn assume(x: &str, op: CmpOp, c: i64) -> Operation {
        Operation::assume(Pred::new(Expr::var(x), op, Expr::int(c)))
    }

    fn seq(ops: Vec<Operation>) -> ConstraintSequence {
        ConstraintSequence::new(ops)
    }

    #[test]
    fn assignment_interpolants() {
        let got = interpolate_assignments(&a(&[("x", 1), ("y", 2)]), &a(&[("y", 3)])).unwrap();
        assert_eq!(got, a(&[("y", 2)]));
        let got = interpolate_assignments(&a(&[("x", 1)]), &a(&[("x", 2)])).unwrap();
        assert_eq!(got, a(&[("x", 1)]));
    }

    #[test]
    fn assignment_interpolant_rejects_bad_input() {
        assert_eq!(
            interpolate_assignments(&AbstractAssignment::bottom(), &a(&[])),
            Err(InterpolationError::ContradictingInput)
        );
        assert_eq!(
            interpolate_assignments(&a(&[("x", 1)]), &a(&[("x", 1)])),
            Err(InterpolationError::NotContradicting)
        );
    }

    #[test]
    fn drops_irrelevant_variable() {
        let gm = seq(vec![assign("x", 1), assign("y", 0)]);
        let gp = seq(vec![assume("y", CmpOp::Eq, 1)]);
        let itp = interpolate(&gm, &gp).unwrap();
        assert_eq!(itp.to_string(), "⟨[y == 0]⟩");
    }

    #[test]
    fn flag_is_the_reason() {
        let gm = seq(vec![assign("flag", 0), assign("ticks", 0)]);
        let gp = seq(vec![assume("flag", CmpOp::Gt, 0)]);
        assert_eq!(interpolate(&gm, &gp).unwrap().to_string(), "⟨[flag == 0]⟩");
    }

    #[test]
    fn single_variable_kept() {
        let gm = seq(vec![assume("x", CmpOp::Eq, 1)]);
        let gp = seq(vec![assume("x", CmpOp::Eq, 2)]);
        let itp = interpolate(&gm, &gp).unwrap();
        assert_eq!(itp.to_string(), "⟨[x == 1]⟩");
        assert_eq!(itp.assignment(), &a(&[("x", 1)]));
    }

    #[test]
    fn contradicting_prefix_gives_false() {
        let gm = seq(vec![assign("x", 1), assume("x", CmpOp::Eq, 2)]);
        let gp = seq(vec![assume("x", CmpOp::Eq, 3)]);
        let itp = interpolate(&gm, &gp).unwrap();
        assert!(itp.is_false());
        assert_eq!(itp.variables().count(), 0);
        assert!(itp.constraints().is_contradicting());
    }

    #[test]
    fn rejects_feasible_pair() {
        let gm = seq(vec![assign("x", 1)]);
        let gp = seq(vec![assume("x", CmpOp::Eq, 1)]);
        assert_eq!(
            interpolate(&gm, &gp),
            Err(InterpolationError::NotContradicting)
        );
    }
}
