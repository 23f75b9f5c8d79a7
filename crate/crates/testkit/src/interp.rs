//! Brute-force concrete interpreter over the syntax tree.
//!
//! Every `nondet()` is enumerated over a finite range. Division by zero
//! blocks the run. The interpreter works on the source program directly, so
//! it is independent of CFA construction and of the abstract domain.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

use evcheck_core::lang::{BinOp, Call, Cond, Expr, Function, Program, Rhs, Stmt, StmtKind};
use num_bigint::BigInt;
use num_traits::Zero;

pub type Store = BTreeMap<String, BigInt>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exploration {
    pub error_reachable: bool,
    /// Globals and `main` variables at every normal termination.
    pub final_stores: BTreeSet<Store>,
    /// Some run exceeded the step limit; results are incomplete.
    pub truncated: bool,
    pub runs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleVerdict {
    Safe,
    Unsafe,
    Inconclusive,
}

/// Verdict by enumerating all runs with nondet values in `range`.
pub fn oracle_verdict(
    program: &Program,
    range: RangeInclusive<i64>,
    step_limit: usize,
) -> OracleVerdict {
    let e = explore(program, range, step_limit, usize::MAX);
    if e.error_reachable {
        OracleVerdict::Unsafe
    } else if e.truncated {
        OracleVerdict::Inconclusive
    } else {
        OracleVerdict::Safe
    }
}

/// Enumerates runs depth-first over choice vectors, up to `max_runs`.
pub fn explore(
    program: &Program,
    range: RangeInclusive<i64>,
    step_limit: usize,
    max_runs: usize,
) -> Exploration {
    explore_bounded(program, range, step_limit, max_runs, usize::MAX)
}

/// Like [`explore`], but runs needing more than `max_choices` nondet values
/// are cut off and counted as truncated.
pub fn explore_bounded(
    program: &Program,
    range: RangeInclusive<i64>,
    step_limit: usize,
    max_runs: usize,
    max_choices: usize,
) -> Exploration {
    let values: Vec<i64> = range.collect();
    let mut out = Exploration {
        error_reachable: false,
        final_stores: BTreeSet::new(),
        truncated: false,
        runs: 0,
    };
    let mut pending: Vec<Vec<i64>> = vec![Vec::new()];
    while let Some(choices) = pending.pop() {
        if out.runs >= max_runs {
            out.truncated = true;
            break;
        }
        out.runs += 1;
        let mut run = Run {
            program,
            choices: &choices,
            used: 0,
            steps: 0,
            step_limit,
            globals: Store::new(),
        };
        match run.main() {
            Ok(store) => {
                out.final_stores.insert(store);
            }
            Err(Stop::Error) => out.error_reachable = true,
            Err(Stop::Blocked) => {}
            Err(Stop::StepLimit) => out.truncated = true,
            Err(Stop::NeedChoice) if choices.len() >= max_choices => out.truncated = true,
            Err(Stop::NeedChoice) => {
                for v in values.iter().rev() {
                    let mut next = choices.clone();
                    next.push(*v);
                    pending.push(next);
                }
            }
        }
    }
    out
}

enum Stop {
    Error,
    Blocked,
    StepLimit,
    NeedChoice,
}

enum Flow {
    Normal,
    Break,
    Continue,
    Return(Option<BigInt>),
}

struct Run<'a> {
    program: &'a Program,
    choices: &'a [i64],
    used: usize,
    steps: usize,
    step_limit: usize,
    globals: Store,
}

impl Run<'_> {
    fn main(&mut self) -> Result<Store, Stop> {
        for g in &self.program.globals {
            let v = match &g.init {
                Some(e) => self.eval(e, &Store::new())?,
                None => BigInt::zero(),
            };
            self.globals.insert(g.name.clone(), v);
        }
        let main = self.program.function("main").expect("main");
        let mut frame = Store::new();
        for p in &main.params {
            let v = self.choose()?;
            frame.insert(p.clone(), v);
        }
        self.block(&main.body, &mut frame)?;
        let mut store = self.globals.clone();
        store.extend(frame);
        Ok(store)
    }

    fn choose(&mut self) -> Result<BigInt, Stop> {
        match self.choices.get(self.used) {
            Some(v) => {
                self.used += 1;
                Ok(BigInt::from(*v))
            }
            None => Err(Stop::NeedChoice),
        }
    }

    fn tick(&mut self) -> Result<(), Stop> {
        self.steps += 1;
        if self.steps > self.step_limit {
            Err(Stop::StepLimit)
        } else {
            Ok(())
        }
    }

    fn block(&mut self, stmts: &[Stmt], frame: &mut Store) -> Result<Flow, Stop> {
        for s in stmts {
            match self.stmt(s, frame)? {
                Flow::Normal => {}
                other => return Ok(other),
            }
        }
        Ok(Flow::Normal)
    }

    fn stmt(&mut self, s: &Stmt, frame: &mut Store) -> Result<Flow, Stop> {
        self.tick()?;
        match &s.kind {
            StmtKind::Decl { name, init } => {
                let v = match init {
                    None => self.choose()?,
                    Some(rhs) => self.rhs(rhs, frame)?,
                };
                frame.insert(name.clone(), v);
            }
            StmtKind::Assign { target, value } => {
                let v = self.rhs(value, frame)?;
                self.write(target, v, frame);
            }
            StmtKind::Call(call) => {
                self.call(call, frame, false)?;
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                if self.cond(cond, frame)? {
                    return self.block(then_branch, frame);
                } else if let Some(e) = else_branch {
                    return self.block(e, frame);
                }
            }
            StmtKind::While { cond, body } => loop {
                self.tick()?;
                if !self.cond(cond, frame)? {
                    break;
                }
                match self.block(body, frame)? {
                    Flow::Break => break,
                    Flow::Normal | Flow::Continue => {}
                    r @ Flow::Return(_) => return Ok(r),
                }
            },
            StmtKind::Break => return Ok(Flow::Break),
            StmtKind::Continue => return Ok(Flow::Continue),
            StmtKind::Return(e) => {
                let v = match e {
                    Some(e) => Some(self.eval(e, frame)?),
                    None => None,
                };
                return Ok(Flow::Return(v));
            }
            StmtKind::Error => return Err(Stop::Error),
            StmtKind::Block(b) => return self.block(b, frame),
        }
        Ok(Flow::Normal)
    }

    fn write(&mut self, target: &str, v: BigInt, frame: &mut Store) {
        if let Some(slot) = frame.get_mut(target) {
            *slot = v;
        } else {
            self.globals.insert(target.to_string(), v);
        }
    }

    fn rhs(&mut self, rhs: &Rhs, frame: &mut Store) -> Result<BigInt, Stop> {
        match rhs {
            Rhs::Expr(e) => self.eval(e, frame),
            Rhs::Call(c) => self.call(c, frame, true),
        }
    }

    fn call(&mut self, call: &Call, frame: &mut Store, want: bool) -> Result<BigInt, Stop> {
        let f: &Function = self
            .program
            .function(&call.function)
            .expect("known function");
        let mut args = Vec::new();
        for a in &call.args {
            args.push(self.eval(a, frame)?);
        }
        let mut callee: Store = f.params.iter().cloned().zip(args).collect();
        match self.block(&f.body, &mut callee)? {
            Flow::Return(Some(v)) => Ok(v),
            _ if want => self.choose(),
            _ => Ok(BigInt::zero()),
        }
    }

    fn cond(&mut self, c: &Cond, frame: &Store) -> Result<bool, Stop> {
        Ok(match c {
            Cond::Cmp(p) => {
                let l = self.eval(&p.lhs, frame)?;
                let r = self.eval(&p.rhs, frame)?;
                p.op.holds(&l, &r)
            }
            Cond::Not(inner) => !self.cond(inner, frame)?,
            Cond::And(a, b) => self.cond(a, frame)? && self.cond(b, frame)?,
            Cond::Or(a, b) => self.cond(a, frame)? || self.cond(b, frame)?,
        })
    }

    fn eval(&mut self, e: &Expr, frame: &Store) -> Result<BigInt, Stop> {
        Ok(match e {
            Expr::Const(c) => c.clone(),
            Expr::Var(x) => frame
                .get(x.as_str())
                .or_else(|| self.globals.get(x.as_str()))
                .cloned()
                .ok_or(Stop::Blocked)?,
            Expr::Nondet => self.choose()?,
            Expr::Neg(inner) => -self.eval(inner, frame)?,
            Expr::Binary(op, l, r) => {
                let l = self.eval(l, frame)?;
                let r = self.eval(r, frame)?;
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div | BinOp::Rem if r.is_zero() => return Err(Stop::Blocked),
                    BinOp::Div => l / r,
                    BinOp::Rem => l % r,
                }
            }
        })
    }
}
