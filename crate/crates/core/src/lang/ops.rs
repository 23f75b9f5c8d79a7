//! Expressions, predicates and CFA operations.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;

/// A program variable name.
///
/// Cheap to clone; ordering is lexicographic on the name, which is the
/// order used wherever the checker needs a deterministic variable order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Self {
        Var(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var::new(s)
    }
}

impl From<String> for Var {
    fn from(s: String) -> Self {
        Var(Arc::from(s))
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 2,
        }
    }
}

/// Integer expression tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(BigInt),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Nondeterministic input, `nondet()`.
    Nondet,
}

impl Expr {
    pub fn int(value: i64) -> Self {
        Expr::Const(BigInt::from(value))
    }

    pub fn var(name: &str) -> Self {
        Expr::Var(Var::new(name))
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Calls `f` on every variable occurrence, left to right.
    pub fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a Var)) {
        match self {
            Expr::Const(_) | Expr::Nondet => {}
            Expr::Var(v) => f(v),
            Expr::Neg(e) => e.for_each_var(f),
            Expr::Binary(_, l, r) => {
                l.for_each_var(f);
                r.for_each_var(f);
            }
        }
    }

    pub fn contains_nondet(&self) -> bool {
        match self {
            Expr::Nondet => true,
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Neg(e) => e.contains_nondet(),
            Expr::Binary(_, l, r) => l.contains_nondet() || r.contains_nondet(),
        }
    }

    /// Number of `nondet()` leaves.
    pub fn nondet_count(&self) -> usize {
        match self {
            Expr::Nondet => 1,
            Expr::Const(_) | Expr::Var(_) => 0,
            Expr::Neg(e) => e.nondet_count(),
            Expr::Binary(_, l, r) => l.nondet_count() + r.nondet_count(),
        }
    }

    /// Rebuilds the expression with every variable passed through `f`.
    pub fn map_vars(&self, f: &impl Fn(&Var) -> Var) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(c.clone()),
            Expr::Nondet => Expr::Nondet,
            Expr::Var(v) => Expr::Var(f(v)),
            Expr::Neg(e) => Expr::Neg(Box::new(e.map_vars(f))),
            Expr::Binary(op, l, r) => {
                Expr::Binary(*op, Box::new(l.map_vars(f)), Box::new(r.map_vars(f)))
            }
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, outer: u8) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Nondet => f.write_str("nondet()"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.fmt_prec(f, 3)
            }
            Expr::Binary(op, l, r) => {
                let p = op.precedence();
                if p < outer {
                    f.write_str("(")?;
                }
                l.fmt_prec(f, p)?;
                write!(f, " {} ", op.symbol())?;
                r.fmt_prec(f, p + 1)?;
                if p < outer {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    /// The complementary comparison: `!(a op b)` is `a op.negate() b`.
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    pub fn holds(self, lhs: &BigInt, rhs: &BigInt) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

/// An atomic comparison between two expressions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pred {
    pub lhs: Expr,
    pub op: CmpOp,
    pub rhs: Expr,
}

impl Pred {
    pub fn new(lhs: Expr, op: CmpOp, rhs: Expr) -> Self {
        Pred { lhs, op, rhs }
    }

    pub fn negate(&self) -> Pred {
        Pred {
            lhs: self.lhs.clone(),
            op: self.op.negate(),
            rhs: self.rhs.clone(),
        }
    }

    pub fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a Var)) {
        self.lhs.for_each_var(f);
        self.rhs.for_each_var(f);
    }

    pub fn map_vars(&self, f: &impl Fn(&Var) -> Var) -> Pred {
        Pred {
            lhs: self.lhs.map_vars(f),
            op: self.op,
            rhs: self.rhs.map_vars(f),
        }
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}

/// A CFA edge label: an assume or an assignment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Operation {
    Assume(Pred),
    Assign { target: Var, value: Expr },
}

impl Operation {
    pub fn assume(pred: Pred) -> Self {
        Operation::Assume(pred)
    }

    pub fn assign(target: &str, value: Expr) -> Self {
        Operation::Assign {
            target: Var::new(target),
            value,
        }
    }

    /// Every variable mentioned by the operation, including an assignment target.
    pub fn variables(&self) -> Vec<Var> {
        let mut out = Vec::new();
        match self {
            Operation::Assume(p) => p.for_each_var(&mut |v| out.push(v.clone())),
            Operation::Assign { target, value } => {
                out.push(target.clone());
                value.for_each_var(&mut |v| out.push(v.clone()));
            }
        }
        out
    }

    pub fn nondet_count(&self) -> usize {
        match self {
            Operation::Assume(p) => p.lhs.nondet_count() + p.rhs.nondet_count(),
            Operation::Assign { value, .. } => value.nondet_count(),
        }
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operation::Assume(p) => write!(f, "[{p}]"),
            Operation::Assign { target, value } => write!(f, "{target} := {value}"),
        }
    }
}
