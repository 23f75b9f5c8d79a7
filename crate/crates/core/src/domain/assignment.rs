//! Abstract variable assignments and their algebra.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use super::DomainError;
use crate::lang::{BinOp, CmpOp, Expr, Operation, Pred, Var};

/// A flat-lattice value: an exact integer or unknown.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Int(BigInt),
    Top,
}

impl Value {
    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Value::Int(v) => Some(v),
            Value::Top => None,
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(BigInt::from(v))
    }
}

/// A total map from variables to integers.
pub type ConcreteStore = BTreeMap<Var, BigInt>;

/// An abstract data state: a partial map from variables to integers.
///
/// Unbound variables are unknown. Unknown bindings are never stored, and a
/// contradiction anywhere collapses the whole state to the single
/// contradicting value, which represents no concrete store.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct AbstractAssignment {
    bindings: BTreeMap<Var, BigInt>,
    contradicting: bool,
}

impl AbstractAssignment {
    /// The assignment that constrains nothing.
    pub fn top() -> Self {
        Self::default()
    }

    /// The contradicting assignment.
    pub fn bottom() -> Self {
        AbstractAssignment {
            bindings: BTreeMap::new(),
            contradicting: true,
        }
    }

    /// Builds a canonical assignment; `Top` bindings are dropped.
    pub fn from_values<I>(values: I) -> Self
    where
        I: IntoIterator<Item = (Var, Value)>,
    {
        AbstractAssignment {
            bindings: values
                .into_iter()
                .filter_map(|(x, v)| match v {
                    Value::Int(c) => Some((x, c)),
                    Value::Top => None,
                })
                .collect(),
            contradicting: false,
        }
    }

    pub fn from_ints<'a, I>(values: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, i64)>,
    {
        AbstractAssignment {
            bindings: values
                .into_iter()
                .map(|(x, v)| (Var::new(x), BigInt::from(v)))
                .collect(),
            contradicting: false,
        }
    }

    pub fn is_contradicting(&self) -> bool {
        self.contradicting
    }

    pub fn get(&self, x: &Var) -> Value {
        match self.bindings.get(x) {
            Some(c) => Value::Int(c.clone()),
            None => Value::Top,
        }
    }

    pub fn value_of(&self, x: &Var) -> Option<&BigInt> {
        self.bindings.get(x)
    }

    pub fn bindings(&self) -> impl Iterator<Item = (&Var, &BigInt)> {
        self.bindings.iter()
    }

    /// Variables with a concrete binding, in lexicographic order.
    pub fn defined(&self) -> impl Iterator<Item = &Var> {
        self.bindings.keys()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// `self ⊑ other`: every store described by `self` is described by `other`.
    pub fn leq(&self, other: &AbstractAssignment) -> bool {
        if self.contradicting {
            return true;
        }
        if other.contradicting {
            return false;
        }
        other
            .bindings
            .iter()
            .all(|(x, c)| self.bindings.get(x) == Some(c))
    }

    /// Least upper bound in the flat lattice.
    pub fn join(&self, other: &AbstractAssignment) -> AbstractAssignment {
        if self.contradicting {
            return other.clone();
        }
        if other.contradicting {
            return self.clone();
        }
        AbstractAssignment {
            bindings: self
                .bindings
                .iter()
                .filter(|(x, c)| other.bindings.get(*x) == Some(*c))
                .map(|(x, c)| (x.clone(), c.clone()))
                .collect(),
            contradicting: false,
        }
    }

    /// Conjunction: the union of both binding sets, contradicting on disagreement.
    pub fn conj(&self, other: &AbstractAssignment) -> AbstractAssignment {
        if self.contradicting || other.contradicting {
            return Self::bottom();
        }
        let mut bindings = self.bindings.clone();
        for (x, c) in &other.bindings {
            match bindings.get(x) {
                Some(d) if d != c => return Self::bottom(),
                Some(_) => {}
                None => {
                    bindings.insert(x.clone(), c.clone());
                }
            }
        }
        AbstractAssignment {
            bindings,
            contradicting: false,
        }
    }

    /// `self ⟹ other`: `other` binds a subset of `self`'s variables to the same values.
    pub fn implies(&self, other: &AbstractAssignment) -> bool {
        if self.contradicting {
            return true;
        }
        if other.contradicting {
            return false;
        }
        other
            .bindings
            .iter()
            .all(|(x, c)| self.bindings.get(x) == Some(c))
    }

    /// Restriction to the variables accepted by `keep`. A contradicting
    /// assignment stays contradicting.
    pub fn restrict_by(&self, keep: impl Fn(&Var) -> bool) -> AbstractAssignment {
        if self.contradicting {
            return Self::bottom();
        }
        AbstractAssignment {
            bindings: self
                .bindings
                .iter()
                .filter(|(x, _)| keep(x))
                .map(|(x, c)| (x.clone(), c.clone()))
                .collect(),
            contradicting: false,
        }
    }

    pub fn restrict(&self, vars: &BTreeSet<Var>) -> AbstractAssignment {
        self.restrict_by(|x| vars.contains(x))
    }

    /// Drops the binding for `x`, if any.
    pub fn without(&self, x: &Var) -> AbstractAssignment {
        let mut out = self.clone();
        out.bindings.remove(x);
        out
    }

    /// Moves the binding of `from` to `to`.
    pub fn rename(&self, from: &Var, to: &Var) -> Result<AbstractAssignment, DomainError> {
        let Some(value) = self.bindings.get(from) else {
            return Err(DomainError::RenameSourceUnbound(from.clone()));
        };
        if self.bindings.contains_key(to) {
            return Err(DomainError::RenameTargetBound(to.clone()));
        }
        let mut out = self.clone();
        let value = value.clone();
        out.bindings.remove(from);
        out.bindings.insert(to.clone(), value);
        Ok(out)
    }

    /// Evaluates `e`; `None` when the assignment is contradicting.
    ///
    /// The result is `Top` if the expression reads an unbound variable,
    /// contains `nondet()`, or divides by zero.
    pub fn eval(&self, e: &Expr) -> Option<Value> {
        if self.contradicting {
            return None;
        }
        Some(match self.eval_int(e) {
            Some(c) => Value::Int(c),
            None => Value::Top,
        })
    }

    fn eval_int(&self, e: &Expr) -> Option<BigInt> {
        match e {
            Expr::Const(c) => Some(c.clone()),
            Expr::Var(x) => self.bindings.get(x).cloned(),
            Expr::Nondet => None,
            Expr::Neg(inner) => self.eval_int(inner).map(|v| -v),
            Expr::Binary(op, l, r) => {
                let (l, r) = (self.eval_int(l)?, self.eval_int(r)?);
                match op {
                    BinOp::Add => Some(l + r),
                    BinOp::Sub => Some(l - r),
                    BinOp::Mul => Some(l * r),
                    // BigInt division truncates toward zero, as in C
                    BinOp::Div if !r.is_zero() => Some(l / r),
                    BinOp::Rem if !r.is_zero() => Some(l % r),
                    BinOp::Div | BinOp::Rem => None,
                }
            }
        }
    }

    /// Strongest post of `target := value`.
    pub fn sp_assign(&self, target: &Var, value: &Expr) -> AbstractAssignment {
        if self.contradicting {
            return Self::bottom();
        }
        let result = self.eval_int(value);
        let mut out = self.clone();
        match result {
            Some(c) => {
                out.bindings.insert(target.clone(), c);
            }
            None => {
                out.bindings.remove(target);
            }
        }
        out
    }

    /// Strongest post of the assume `[p]`.
    ///
    /// Satisfiability is decided syntactically: a fully evaluable comparison
    /// is decided exactly, `x == e` with `x` unbound and `e` evaluable binds
    /// `x`, and anything else leaves the assignment unchanged.
    pub fn sp_assume(&self, p: &Pred) -> AbstractAssignment {
        if self.contradicting {
            return Self::bottom();
        }
        let lhs = self.eval_int(&p.lhs);
        let rhs = self.eval_int(&p.rhs);
        match (lhs, rhs) {
            (Some(l), Some(r)) => {
                if p.op.holds(&l, &r) {
                    self.clone()
                } else {
                    Self::bottom()
                }
            }
            (None, Some(c)) if p.op == CmpOp::Eq => self.bind_unbound(&p.lhs, c),
            (Some(c), None) if p.op == CmpOp::Eq => self.bind_unbound(&p.rhs, c),
            _ => self.clone(),
        }
    }

    fn bind_unbound(&self, side: &Expr, value: BigInt) -> AbstractAssignment {
        match side {
            Expr::Var(x) if !self.bindings.contains_key(x) => {
                let mut out = self.clone();
                out.bindings.insert(x.clone(), value);
                out
            }
            _ => self.clone(),
        }
    }

    /// Strongest post of a single operation.
    pub fn sp(&self, op: &Operation) -> AbstractAssignment {
        match op {
            Operation::Assume(p) => self.sp_assume(p),
            Operation::Assign { target, value } => self.sp_assign(target, value),
        }
    }

    /// True if `store` is in the concretization of this assignment.
    pub fn models(&self, store: &ConcreteStore) -> bool {
        !self.contradicting && self.bindings.iter().all(|(x, c)| store.get(x) == Some(c))
    }
}

impl fmt::Display for AbstractAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.contradicting {
            return f.write_str("⊥");
        }
        f.write_str("{")?;
        for (i, (x, c)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}={c}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for AbstractAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(pairs: &[(&str, i64)]) -> AbstractAssignment {
        AbstractAssignment::from_ints(pairs.iter().copied())
    }

    fn bot() -> AbstractAssignment {
        AbstractAssignment::bottom()
    }

    fn x_plus_1() -> Expr {
        Expr::binary(BinOp::Add, Expr::var("x"), Expr::int(1))
    }

    #[test]
    fn order() {
        assert!(a(&[("x", 2), ("y", 5)]).leq(&a(&[("x", 2)])));
        assert!(!a(&[("x", 2)]).leq(&a(&[("x", 3)])));
        assert!(bot().leq(&a(&[])));
        assert!(!a(&[]).leq(&bot()));
    }

    #[test]
    fn join() {
        assert_eq!(
            a(&[("x", 1), ("y", 2)]).join(&a(&[("x", 1), ("y", 3)])),
            a(&[("x", 1)])
        );
        let v = a(&[("x", 4), ("z", -1)]);
        assert_eq!(v.join(&v), v);
        assert_eq!(bot().join(&a(&[("x", 7)])), a(&[("x", 7)]));
    }

    #[test]
    fn conjunction() {
        assert_eq!(
            a(&[("x", 1)]).conj(&a(&[("y", 2)])),
            a(&[("x", 1), ("y", 2)])
        );
        assert!(a(&[("x", 1)]).conj(&a(&[("x", 2)])).is_contradicting());
        let v = a(&[("x", 3), ("q", 0)]);
        assert_eq!(v.conj(&a(&[])), v);
    }

    #[test]
    fn implication() {
        assert!(a(&[("x", 2), ("y", 5)]).implies(&a(&[("x", 2)])));
        assert!(!a(&[("x", 2)]).implies(&a(&[("x", 2), ("y", 1)])));
        assert!(bot().implies(&a(&[("z", 9)])));
        assert!(bot().implies(&bot()));
    }

    #[test]
    fn contradiction_flag() {
        assert!(bot().is_contradicting());
        assert!(!a(&[]).is_contradicting());
        assert!(!a(&[("x", 0)]).is_contradicting());
    }

    #[test]
    fn restriction() {
        let v = a(&[("x", 2), ("y", 5)]);
        let only_x: BTreeSet<Var> = [Var::new("x")].into();
        assert_eq!(v.restrict(&only_x), a(&[("x", 2)]));
        assert_eq!(v.restrict(&BTreeSet::new()), a(&[]));
        let wide: BTreeSet<Var> = ["x", "y", "z"].into_iter().map(Var::new).collect();
        assert_eq!(v.restrict(&wide), v);
    }

    #[test]
    fn renaming() {
        let (x, y) = (Var::new("x"), Var::new("y"));
        assert_eq!(a(&[("x", 3)]).rename(&x, &y).unwrap(), a(&[("y", 3)]));
        assert_eq!(
            a(&[("x", 3), ("z", 1)]).rename(&x, &y).unwrap(),
            a(&[("y", 3), ("z", 1)])
        );
        assert_eq!(
            a(&[("x", 3), ("y", 1)]).rename(&x, &y),
            Err(DomainError::RenameTargetBound(y.clone()))
        );
        assert_eq!(
            a(&[]).rename(&x, &y),
            Err(DomainError::RenameSourceUnbound(x))
        );
    }

    #[test]
    fn evaluation() {
        assert_eq!(a(&[("x", 2)]).eval(&x_plus_1()), Some(Value::from(3)));
        assert_eq!(a(&[]).eval(&x_plus_1()), Some(Value::Top));
        assert_eq!(bot().eval(&Expr::int(5)), None);
        assert_eq!(a(&[]).eval(&Expr::Nondet), Some(Value::Top));
        let div = |l: i64, r: i64, op| a(&[]).eval(&Expr::binary(op, Expr::int(l), Expr::int(r)));
        assert_eq!(div(-7, 2, BinOp::Div), Some(Value::from(-3)));
        assert_eq!(div(-7, 2, BinOp::Rem), Some(Value::from(-1)));
        assert_eq!(div(7, 0, BinOp::Div), Some(Value::Top));
        assert_eq!(div(7, 0, BinOp::Rem), Some(Value::Top));
    }

    #[test]
    fn assignment_post() {
        let x = Var::new("x");
        let y = Var::new("y");
        assert_eq!(a(&[]).sp_assign(&x, &Expr::int(5)), a(&[("x", 5)]));
        assert_eq!(
            a(&[("x", 2)]).sp_assign(&y, &x_plus_1()),
            a(&[("x", 2), ("y", 3)])
        );
        assert_eq!(a(&[]).sp_assign(&y, &x_plus_1()), a(&[]));
        assert_eq!(a(&[("y", 1)]).sp_assign(&y, &x_plus_1()), a(&[]));
        assert!(bot().sp_assign(&x, &Expr::int(1)).is_contradicting());
    }

    #[test]
    fn assume_post() {
        let gt = Pred::new(Expr::var("flag"), CmpOp::Gt, Expr::int(0));
        assert!(a(&[("flag", 0)]).sp_assume(&gt).is_contradicting());
        let eq = Pred::new(Expr::var("x"), CmpOp::Eq, Expr::int(5));
        assert_eq!(a(&[]).sp_assume(&eq), a(&[("x", 5)]));
        let mirrored = Pred::new(Expr::int(5), CmpOp::Eq, Expr::var("x"));
        assert_eq!(a(&[]).sp_assume(&mirrored), a(&[("x", 5)]));
        let lt = Pred::new(Expr::var("x"), CmpOp::Lt, Expr::int(10));
        assert_eq!(a(&[("x", 3)]).sp_assume(&lt), a(&[("x", 3)]));
        assert_eq!(a(&[]).sp_assume(&lt), a(&[]));
        let ne = Pred::new(Expr::var("x"), CmpOp::Ne, Expr::int(0));
        assert_eq!(a(&[]).sp_assume(&ne), a(&[]));
        let vars = Pred::new(Expr::var("x"), CmpOp::Eq, Expr::var("y"));
        assert_eq!(a(&[("y", 4)]).sp_assume(&vars), a(&[("x", 4), ("y", 4)]));
        let compound = Pred::new(x_plus_1(), CmpOp::Eq, Expr::int(3));
        assert_eq!(a(&[]).sp_assume(&compound), a(&[]));
    }

    #[test]
    fn concretization() {
        let store: ConcreteStore = [
            (Var::new("x"), BigInt::from(2)),
            (Var::new("y"), BigInt::from(9)),
        ]
        .into_iter()
        .collect();
        assert!(a(&[("x", 2)]).models(&store));
        assert!(!a(&[("x", 3)]).models(&store));
        assert!(!bot().models(&store));
    }

    #[test]
    fn rendering() {
        assert_eq!(a(&[("y", 5), ("x", 2)]).to_string(), "{x=2, y=5}");
        assert_eq!(bot().to_string(), "⊥");
        assert_eq!(a(&[]).to_string(), "{}");
    }
}
