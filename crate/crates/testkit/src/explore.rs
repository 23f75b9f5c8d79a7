//! Concrete state-space exploration of a CFA.
//!
//! Breadth-first over (location, store) pairs; every `nondet()` leaf ranges
//! over a finite set of values. Used to check that lowering preserves the
//! behaviour of the interpreter in [`crate::interp`].

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::ops::RangeInclusive;

use evcheck_core::lang::{BinOp, Expr, LocId, Operation, Var, VerificationProblem};
use num_bigint::BigInt;
use num_traits::Zero;

use crate::interp::Store;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfaExploration {
    pub error_reachable: bool,
    /// Stores at non-error locations without successors, restricted to
    /// globals and `main` variables.
    pub final_stores: BTreeSet<Store>,
    pub truncated: bool,
    pub states: usize,
}

type CStore = BTreeMap<Var, BigInt>;

pub fn explore_cfa(
    problem: &VerificationProblem,
    range: RangeInclusive<i64>,
    state_limit: usize,
) -> CfaExploration {
    let values: Vec<BigInt> = range.map(BigInt::from).collect();
    let mut out = CfaExploration {
        error_reachable: false,
        final_stores: BTreeSet::new(),
        truncated: false,
        states: 0,
    };
    let mut seen: HashSet<(LocId, CStore)> = HashSet::new();
    let mut queue = VecDeque::new();
    let init = (problem.initial, CStore::new());
    seen.insert(init.clone());
    queue.push_back(init);
    while let Some((loc, store)) = queue.pop_front() {
        out.states += 1;
        if problem.is_error(loc) {
            out.error_reachable = true;
            continue;
        }
        let mut any = false;
        for edge in problem.cfa.outgoing(loc) {
            any = true;
            for next in successors(&edge.op, &store, &values) {
                let key = (edge.target, next);
                if seen.len() >= state_limit {
                    out.truncated = true;
                    return out;
                }
                if seen.insert(key.clone()) {
                    queue.push_back(key);
                }
            }
        }
        if !any {
            out.final_stores.insert(
                store
                    .iter()
                    .filter(|(x, _)| !x.as_str().contains('#'))
                    .map(|(x, v)| (x.as_str().to_string(), v.clone()))
                    .collect(),
            );
        }
    }
    out
}

fn successors(op: &Operation, store: &CStore, values: &[BigInt]) -> Vec<CStore> {
    match op {
        Operation::Assign { target, value } => {
            let mut out = Vec::new();
            for inputs in combinations(values, value.nondet_count()) {
                if let Some(v) = eval(value, store, &mut inputs.into_iter()) {
                    let mut s = store.clone();
                    s.insert(target.clone(), v);
                    out.push(s);
                }
            }
            out
        }
        Operation::Assume(p) => {
            let n = p.lhs.nondet_count() + p.rhs.nondet_count();
            let feasible = combinations(values, n).into_iter().any(|inputs| {
                let mut it = inputs.into_iter();
                match (eval(&p.lhs, store, &mut it), eval(&p.rhs, store, &mut it)) {
                    (Some(l), Some(r)) => p.op.holds(&l, &r),
                    _ => false,
                }
            });
            if feasible {
                vec![store.clone()]
            } else {
                Vec::new()
            }
        }
    }
}

fn combinations(values: &[BigInt], n: usize) -> Vec<Vec<BigInt>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v.clone());
                    p
                })
            })
            .collect();
    }
    out
}

fn eval(e: &Expr, store: &CStore, inputs: &mut impl Iterator<Item = BigInt>) -> Option<BigInt> {
    Some(match e {
        Expr::Const(c) => c.clone(),
        Expr::Var(x) => store.get(x)?.clone(),
        Expr::Nondet => inputs.next()?,
        Expr::Neg(inner) => -eval(inner, store, inputs)?,
        Expr::Binary(op, l, r) => {
            let l = eval(l, store, inputs)?;
            let r = eval(r, store, inputs)?;
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div | BinOp::Rem if r.is_zero() => return None,
                BinOp::Div => l / r,
                BinOp::Rem => l % r,
            }
        }
    })
}
