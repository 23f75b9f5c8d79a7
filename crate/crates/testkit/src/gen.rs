//! Random generators for domain objects and for small bounded programs.

use std::fmt::Write as _;

use evcheck_core::domain::{AbstractAssignment, ConstraintSequence, Value};
use evcheck_core::lang::{BinOp, CmpOp, Expr, Operation, Pred, Var};
use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;

pub const VAR_NAMES: [&str; 5] = ["a", "b", "c", "d", "e"];

pub const CMP_OPS: [CmpOp; 6] = [
    CmpOp::Eq,
    CmpOp::Ne,
    CmpOp::Lt,
    CmpOp::Le,
    CmpOp::Gt,
    CmpOp::Ge,
];

pub fn vars(n: usize) -> Vec<Var> {
    VAR_NAMES[..n].iter().map(|s| Var::new(s)).collect()
}

/// Each variable bound with probability `p` to a value in `lo..=hi`.
pub fn assignment<R: Rng>(
    rng: &mut R,
    vars: &[Var],
    lo: i64,
    hi: i64,
    p: f64,
) -> AbstractAssignment {
    let mut bound = Vec::new();
    for x in vars {
        if rng.gen_bool(p) {
            bound.push((x.clone(), Value::Int(BigInt::from(rng.gen_range(lo..=hi)))));
        }
    }
    AbstractAssignment::from_values(bound)
}

/// Variable, small constant, or `nondet()` (rarely).
fn atom<R: Rng>(rng: &mut R, vars: &[Var], lo: i64, hi: i64) -> Expr {
    match rng.gen_range(0..10) {
        0..=4 => Expr::Var(vars.choose(rng).unwrap().clone()),
        5..=8 => Expr::int(rng.gen_range(lo..=hi)),
        _ => Expr::Nondet,
    }
}

pub fn expr<R: Rng>(rng: &mut R, vars: &[Var], lo: i64, hi: i64) -> Expr {
    match rng.gen_range(0..6) {
        0..=2 => atom(rng, vars, lo, hi),
        3 => Expr::Neg(Box::new(atom(rng, vars, lo, hi))),
        _ => {
            let op = *[BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Rem]
                .choose(rng)
                .unwrap();
            Expr::binary(op, atom(rng, vars, lo, hi), atom(rng, vars, lo, hi))
        }
    }
}

/// Assignment or assume over `vars` with constants in `lo..=hi`.
pub fn operation<R: Rng>(rng: &mut R, vars: &[Var], lo: i64, hi: i64) -> Operation {
    if rng.gen_bool(0.5) {
        let target = vars.choose(rng).unwrap().clone();
        Operation::Assign {
            target,
            value: expr(rng, vars, lo, hi),
        }
    } else {
        let op = *CMP_OPS.choose(rng).unwrap();
        // bias towards the equality forms that bind values
        let op = if rng.gen_bool(0.4) { CmpOp::Eq } else { op };
        let lhs = if rng.gen_bool(0.8) {
            Expr::Var(vars.choose(rng).unwrap().clone())
        } else {
            expr(rng, vars, lo, hi)
        };
        Operation::Assume(Pred::new(lhs, op, expr(rng, vars, lo, hi)))
    }
}

pub fn sequence<R: Rng>(
    rng: &mut R,
    vars: &[Var],
    max_len: usize,
    lo: i64,
    hi: i64,
) -> ConstraintSequence {
    let len = rng.gen_range(0..=max_len);
    ConstraintSequence::new((0..len).map(|_| operation(rng, vars, lo, hi)).collect())
}

/// `(γ⁻, γ⁺)` with `γ⁻ ++ γ⁺` contradicting, by rejection sampling.
pub fn contradicting_sequences<R: Rng>(
    rng: &mut R,
    max_vars: usize,
    max_len: usize,
    lo: i64,
    hi: i64,
) -> (ConstraintSequence, ConstraintSequence) {
    loop {
        let n = rng.gen_range(1..=max_vars);
        let vs = vars(n);
        let minus = sequence(rng, &vs, max_len, lo, hi);
        let plus = sequence(rng, &vs, max_len, lo, hi);
        if minus.concat(&plus).is_contradicting() {
            return (minus, plus);
        }
    }
}

/// Non-contradicting `(v⁻, v⁺)` whose conjunction is contradicting.
pub fn contradicting_assignments<R: Rng>(
    rng: &mut R,
    max_vars: usize,
    lo: i64,
    hi: i64,
) -> (AbstractAssignment, AbstractAssignment) {
    loop {
        let n = rng.gen_range(1..=max_vars);
        let vs = vars(n);
        let m = assignment(rng, &vs, lo, hi, 0.7);
        let p = assignment(rng, &vs, lo, hi, 0.7);
        if m.conj(&p).is_contradicting() {
            return (m, p);
        }
    }
}

/// Shape limits for [`program`].
#[derive(Debug, Clone)]
pub struct ProgramShape {
    pub max_top_stmts: usize,
    pub max_loop_bound: i64,
    /// Upper bound on `nondet()` calls along any single run.
    pub max_choices_per_run: usize,
}

impl Default for ProgramShape {
    fn default() -> Self {
        ProgramShape {
            max_top_stmts: 7,
            max_loop_bound: 6,
            max_choices_per_run: 5,
        }
    }
}

/// A random program with at most four variables in `main`'s view.
///
/// Every `nondet()` result is immediately resolved into constants over the
/// range [0, 3] by a chain of equality tests, and loops run a constant
/// number of iterations, so the explicit domain can represent every
/// reachable store exactly.
pub fn program<R: Rng>(rng: &mut R, shape: &ProgramShape) -> String {
    let mut g = ProgGen {
        rng,
        shape,
        data: Vec::new(),
        choices: 0,
        has_helper: false,
        helper_void: false,
        in_loop: false,
        loop_mult: 1,
        out: String::new(),
    };
    g.generate();
    g.out
}

struct ProgGen<'r, R> {
    rng: &'r mut R,
    shape: &'r ProgramShape,
    data: Vec<&'static str>,
    choices: usize,
    has_helper: bool,
    helper_void: bool,
    in_loop: bool,
    loop_mult: usize,
    out: String,
}

impl<R: Rng> ProgGen<'_, R> {
    fn generate(&mut self) {
        let use_global = self.rng.gen_bool(0.4);
        self.data = if use_global {
            vec!["a", "g"]
        } else {
            vec!["a", "b"]
        };
        if use_global {
            let k = self.konst();
            let _ = writeln!(self.out, "int g = {k};");
        }
        self.has_helper = self.rng.gen_bool(0.5);
        if self.has_helper {
            self.helper_void = use_global && self.rng.gen_bool(0.3);
            self.helper();
        }
        self.out.push_str("int main() {\n");
        let k = self.konst();
        let _ = writeln!(self.out, "  int a = {k};");
        if !use_global {
            let k = self.konst();
            let _ = writeln!(self.out, "  int b = {k};");
        }
        self.out.push_str("  int c = 0;\n  int i = 0;\n");
        let n = self.rng.gen_range(2..=self.shape.max_top_stmts);
        let mut loops = 0;
        for _ in 0..n {
            let pick = self.rng.gen_range(0..10);
            if pick == 0 && loops == 0 {
                loops += 1;
                self.looped(1);
            } else {
                self.stmt(1, 2);
            }
        }
        let cond = self.error_cond();
        let _ = writeln!(self.out, "  if ({cond}) {{\n    error();\n  }}");
        self.out.push_str("  return 0;\n}\n");
    }

    fn helper(&mut self) {
        let k = self.konst();
        if self.helper_void {
            let _ = writeln!(
                self.out,
                "void bump(int p) {{\n  if (p == {k}) {{\n    g = g + 1;\n  }}\n}}"
            );
            return;
        }
        let k2 = self.konst();
        let body_err = self.rng.gen_bool(0.3);
        self.out.push_str("int f(int p) {\n");
        if body_err {
            let e = self.rng.gen_range(-6..=6);
            let _ = writeln!(self.out, "  if (p == {e}) {{\n    error();\n  }}");
        }
        let _ = writeln!(
            self.out,
            "  if (p > {k}) {{\n    return p - {k2};\n  }}\n  return p + 1;\n}}"
        );
    }

    fn indent(&mut self, depth: usize) {
        for _ in 0..depth {
            self.out.push_str("  ");
        }
    }

    fn konst(&mut self) -> i64 {
        self.rng.gen_range(-3..=3)
    }

    fn var(&mut self) -> &'static str {
        self.data.choose(self.rng).copied().unwrap()
    }

    fn operand(&mut self) -> String {
        let pool: Vec<&str> = if self.in_loop {
            let mut p = self.data.clone();
            p.push("i");
            p
        } else {
            self.data.clone()
        };
        if self.rng.gen_bool(0.6) {
            pool.choose(self.rng).unwrap().to_string()
        } else {
            self.konst().to_string()
        }
    }

    fn arith(&mut self) -> String {
        let l = self.operand();
        match self.rng.gen_range(0..8) {
            0 | 1 => l,
            2 => format!("{l} + {}", self.operand()),
            3 => format!("{l} - {}", self.operand()),
            4 => format!("{l} * {}", self.operand()),
            5 => format!("{l} / {}", self.rng.gen_range(2..=3)),
            6 => format!("{l} % {}", self.rng.gen_range(2..=3)),
            _ => format!("-{l}"),
        }
    }

    fn cmp(&mut self) -> String {
        let op = ["==", "!=", "<", "<=", ">", ">="].choose(self.rng).unwrap();
        let l = self.var();
        let r = self.operand();
        format!("{l} {op} {r}")
    }

    fn cond(&mut self) -> String {
        match self.rng.gen_range(0..8) {
            0..=3 => self.cmp(),
            4 => format!("{} && {}", self.cmp(), self.cmp()),
            5 => format!("{} || {}", self.cmp(), self.cmp()),
            6 => format!("!({})", self.cmp()),
            _ => format!("({} || {}) && {}", self.cmp(), self.cmp(), self.cmp()),
        }
    }

    /// Narrow conditions so that errors are hit only on some runs.
    fn error_cond(&mut self) -> String {
        let x = self.var();
        let k = self.konst();
        if self.rng.gen_bool(0.5) {
            format!("{x} == {k}")
        } else {
            format!("{x} == {k} && {}", self.cmp())
        }
    }

    fn choice(&mut self, depth: usize) {
        self.choices += self.loop_mult;
        let x = self.var();
        let ind = "  ".repeat(depth);
        let _ = writeln!(self.out, "{ind}c = nondet();");
        let arms = if self.rng.gen_bool(0.5) { 2 } else { 4 };
        for k in 0..arms {
            let value = if self.rng.gen_bool(0.3) {
                self.arith()
            } else {
                self.konst().to_string()
            };
            if k == 0 {
                let _ = write!(
                    self.out,
                    "{ind}if (c == 0) {{\n{ind}  {x} = {value};\n{ind}}}"
                );
            } else if k + 1 < arms {
                let _ = write!(
                    self.out,
                    " else if (c == {k}) {{\n{ind}  {x} = {value};\n{ind}}}"
                );
            } else {
                let _ = writeln!(self.out, " else {{\n{ind}  {x} = {value};\n{ind}}}");
            }
        }
    }

    fn can_choose(&self) -> bool {
        self.choices + self.loop_mult <= self.shape.max_choices_per_run
    }

    fn stmt(&mut self, depth: usize, budget: usize) {
        let pick = self.rng.gen_range(0..10);
        match pick {
            0..=2 => {
                let x = self.var();
                let e = self.arith();
                self.indent(depth);
                let _ = writeln!(self.out, "{x} = {e};");
            }
            3 | 4 if self.can_choose() => self.choice(depth),
            5 | 6 if budget > 0 => {
                let c = self.cond();
                self.indent(depth);
                let _ = writeln!(self.out, "if ({c}) {{");
                let n = self.rng.gen_range(1..=2);
                for _ in 0..n {
                    self.stmt(depth + 1, budget - 1);
                }
                self.indent(depth);
                if self.rng.gen_bool(0.5) {
                    self.out.push_str("} else {\n");
                    self.stmt(depth + 1, budget - 1);
                    self.indent(depth);
                }
                self.out.push_str("}\n");
            }
            7 if self.has_helper => {
                let arg = self.arith();
                self.indent(depth);
                if self.helper_void {
                    let _ = writeln!(self.out, "bump({arg});");
                } else {
                    let x = self.var();
                    let _ = writeln!(self.out, "{x} = f({arg});");
                }
            }
            8 if self.in_loop => {
                let c = self.cond();
                self.indent(depth);
                let _ = writeln!(self.out, "if ({c}) {{");
                self.indent(depth + 1);
                self.out.push_str("break;\n");
                self.indent(depth);
                self.out.push_str("}\n");
            }
            9 => {
                let c = self.error_cond();
                self.indent(depth);
                let _ = writeln!(self.out, "if ({c}) {{");
                self.indent(depth + 1);
                self.out.push_str("error();\n");
                self.indent(depth);
                self.out.push_str("}\n");
            }
            _ => {
                let x = self.var();
                let k = self.konst();
                self.indent(depth);
                let _ = writeln!(self.out, "{x} = {x} + {k};");
            }
        }
    }

    fn looped(&mut self, depth: usize) {
        let bound = self.rng.gen_range(1..=self.shape.max_loop_bound);
        self.indent(depth);
        let _ = writeln!(self.out, "i = 0;");
        self.indent(depth);
        let _ = writeln!(self.out, "while (i < {bound}) {{");
        self.in_loop = true;
        self.loop_mult = bound as usize;
        let n = self.rng.gen_range(1..=3);
        for _ in 0..n {
            self.stmt(depth + 1, 1);
        }
        self.indent(depth + 1);
        self.out.push_str("i = i + 1;\n");
        self.indent(depth);
        self.out.push_str("}\n");
        self.in_loop = false;
        self.loop_mult = 1;
    }
}
