use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::cpa::Path;
use crate::domain::{AbstractAssignment, ConcreteStore};
use crate::lang::{BinOp, Cfa, Expr, Operation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessStep {
    pub line: u32,
    pub op: Operation,
    /// Full-precision assignment after the step.
    pub post: AbstractAssignment,
}

/// Counterexample for an UNSAFE verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub steps: Vec<WitnessStep>,
    /// One value per `nondet()` occurrence along the path, in order.
    pub inputs: Vec<BigInt>,
    /// Whether a concrete run with `inputs` follows the whole path.
    pub confirmed: bool,
    /// Source line of the reached `error()` call.
    pub error_line: u32,
}

impl Witness {
    pub fn from_path(path: &Path, cfa: &Cfa) -> Witness {
        let mut v = AbstractAssignment::top();
        let mut steps = Vec::with_capacity(path.len());
        for s in &path.steps {
            v = v.sp(&s.op);
            steps.push(WitnessStep {
                line: s.line,
                op: s.op.clone(),
                post: v.clone(),
            });
        }
        let hints = forced_values(&steps);
        let (inputs, confirmed) = concrete_replay(&steps, &hints);
        Witness {
            steps,
            inputs,
            confirmed,
            error_line: cfa.location(path.target()).line,
        }
    }
}

/// For `x := nondet()` at step i, the value a later equality forces on x
/// before x is assigned again.
fn forced_values(steps: &[WitnessStep]) -> Vec<Option<BigInt>> {
    let mut hints = vec![None; steps.len()];
    for (i, s) in steps.iter().enumerate() {
        let Operation::Assign {
            target,
            value: Expr::Nondet,
        } = &s.op
        else {
            continue;
        };
        for later in &steps[i + 1..] {
            if let Some(c) = later.post.value_of(target) {
                hints[i] = Some(c.clone());
                break;
            }
            if matches!(&later.op, Operation::Assign { target: t, .. } if t == target) {
                break;
            }
        }
    }
    hints
}

/// Values tried for an unforced `nondet()`, in order.
fn candidates(hint: Option<&BigInt>) -> Vec<BigInt> {
    match hint {
        Some(c) => vec![c.clone()],
        None => std::iter::once(0)
            .chain((1..=CANDIDATE_RADIUS).flat_map(|k| [k, -k]))
            .map(BigInt::from)
            .collect(),
    }
}

const CANDIDATE_RADIUS: i64 = 8;
const REPLAY_BUDGET: usize = 20_000;

/// Runs the path concretely. Forced nondets take their forced value; the
/// others take the first small value (0 first) for which the rest of the
/// path can still be followed, found by backtracking.
fn concrete_replay(steps: &[WitnessStep], hints: &[Option<BigInt>]) -> (Vec<BigInt>, bool) {
    let mut budget = REPLAY_BUDGET;
    let mut inputs = Vec::new();
    if search(
        steps,
        hints,
        0,
        &ConcreteStore::new(),
        &mut inputs,
        &mut budget,
    ) {
        return (inputs, true);
    }
    let n: usize = steps.iter().map(|s| s.op.nondet_count()).sum();
    let fallback = steps
        .iter()
        .zip(hints)
        .flat_map(|(s, h)| {
            let v = h.clone().unwrap_or_else(BigInt::zero);
            std::iter::repeat_n(v, s.op.nondet_count())
        })
        .collect::<Vec<_>>();
    debug_assert_eq!(fallback.len(), n);
    (fallback, false)
}

fn search(
    steps: &[WitnessStep],
    hints: &[Option<BigInt>],
    i: usize,
    store: &ConcreteStore,
    inputs: &mut Vec<BigInt>,
    budget: &mut usize,
) -> bool {
    let Some(step) = steps.get(i) else {
        return true;
    };
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    let k = step.op.nondet_count();
    let options = candidates(hints[i].as_ref());
    let tuples: Vec<Vec<BigInt>> = if k == 0 {
        vec![Vec::new()]
    } else {
        // one shared value for all leaves of the step
        options.iter().map(|v| vec![v.clone(); k]).collect()
    };
    for tuple in tuples {
        let mut feed = tuple.iter().cloned();
        let mut next = || feed.next().unwrap_or_else(BigInt::zero);
        let next_store = match &step.op {
            Operation::Assign { target, value } => match eval(value, store, &mut next) {
                Some(c) => {
                    let mut s = store.clone();
                    s.insert(target.clone(), c);
                    s
                }
                None => continue,
            },
            Operation::Assume(p) => {
                let l = eval(&p.lhs, store, &mut next);
                let r = eval(&p.rhs, store, &mut next);
                match (l, r) {
                    (Some(l), Some(r)) if p.op.holds(&l, &r) => store.clone(),
                    _ => continue,
                }
            }
        };
        let mark = inputs.len();
        inputs.extend(tuple);
        if search(steps, hints, i + 1, &next_store, inputs, budget) {
            return true;
        }
        inputs.truncate(mark);
    }
    false
}

/// Concrete evaluation; `None` on division by zero or an unset variable.
pub(crate) fn eval(
    e: &Expr,
    store: &ConcreteStore,
    nondet: &mut dyn FnMut() -> BigInt,
) -> Option<BigInt> {
    Some(match e {
        Expr::Const(c) => c.clone(),
        Expr::Var(x) => store.get(x)?.clone(),
        Expr::Nondet => nondet(),
        Expr::Neg(inner) => -eval(inner, store, nondet)?,
        Expr::Binary(op, l, r) => {
            let l = eval(l, store, nondet)?;
            let r = eval(r, store, nondet)?;
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div if !r.is_zero() => l / r,
                BinOp::Rem if !r.is_zero() => l % r,
                BinOp::Div | BinOp::Rem => return None,
            }
        }
    })
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            writeln!(f, "line {:>4}: {:<30} {}", s.line, s.op.to_string(), s.post)?;
        }
        writeln!(f, "line {:>4}: error()", self.error_line)?;
        let inputs: Vec<String> = self.inputs.iter().map(|c| c.to_string()).collect();
        writeln!(f, "inputs: [{}]", inputs.join(", "))?;
        write!(
            f,
            "concrete replay: {}",
            if self.confirmed {
                "confirmed"
            } else {
                "not confirmed"
            }
        )
    }
}
