//! Executable statements of the domain and interpolation laws. Each check
//! returns a description of the first violation.

use std::collections::BTreeSet;

use evcheck_core::cegar::{interpolate, interpolate_assignments, restrict_to_common};
use evcheck_core::domain::{AbstractAssignment, ConcreteStore, ConstraintSequence};
use evcheck_core::lang::{BinOp, Expr, Operation, Var};
use num_bigint::BigInt;
use num_traits::Zero;

/// All stores over `vars` with values in `lo..=hi`.
pub fn stores(vars: &[Var], lo: i64, hi: i64) -> Vec<ConcreteStore> {
    let mut out = vec![ConcreteStore::new()];
    for x in vars {
        out = out
            .into_iter()
            .flat_map(|s| {
                (lo..=hi).map(move |c| {
                    let mut s = s.clone();
                    s.insert(x.clone(), BigInt::from(c));
                    s
                })
            })
            .collect();
    }
    out
}

fn concretization(v: &AbstractAssignment, all: &[ConcreteStore]) -> Vec<bool> {
    all.iter().map(|s| v.models(s)).collect()
}

/// Order, join, conjunction, implication and restriction laws for three
/// assignments, checked against their concretizations over `universe`.
pub fn check_lattice(
    u: &AbstractAssignment,
    v: &AbstractAssignment,
    w: &AbstractAssignment,
    universe: &[ConcreteStore],
) -> Result<(), String> {
    let gu = concretization(u, universe);
    let gv = concretization(v, universe);
    let subset = |a: &[bool], b: &[bool]| a.iter().zip(b).all(|(x, y)| !*x || *y);

    if !u.leq(u) {
        return Err(format!("not reflexive: {u}"));
    }
    if u.leq(v) && v.leq(u) && u != v {
        return Err(format!("not antisymmetric: {u} {v}"));
    }
    if u.leq(v) && v.leq(w) && !u.leq(w) {
        return Err(format!("not transitive: {u} {v} {w}"));
    }
    if u.leq(v) && !subset(&gu, &gv) {
        return Err(format!("order not reflected by concretization: {u} ⊑ {v}"));
    }
    let j = u.join(v);
    if !u.leq(&j) || !v.leq(&j) {
        return Err(format!("join not an upper bound: {u} ⊔ {v} = {j}"));
    }
    if u.leq(w) && v.leq(w) && !j.leq(w) {
        return Err(format!("join not least: {u} ⊔ {v} = {j}, bound {w}"));
    }
    if u.join(v) != v.join(u) {
        return Err(format!("join not commutative: {u} {v}"));
    }
    if u.join(u) != *u {
        return Err(format!("join not idempotent: {u}"));
    }
    let c = u.conj(v);
    let gc = concretization(&c, universe);
    let meet: Vec<bool> = gu.iter().zip(&gv).map(|(a, b)| *a && *b).collect();
    if gc != meet {
        return Err(format!("conjunction is not intersection: {u} ∧ {v} = {c}"));
    }
    // bindings lie within the universe, so empty means contradicting
    if c.is_contradicting() != gc.iter().all(|x| !x) {
        return Err(format!("contradiction flag disagrees: {u} ∧ {v}"));
    }
    if u.implies(v) && !subset(&gu, &gv) {
        return Err(format!("implication unsound: {u} ⟹ {v}"));
    }
    if !u.is_contradicting() {
        let keep: BTreeSet<Var> = w.defined().cloned().collect();
        let r = u.restrict(&keep);
        if !u.leq(&r) {
            return Err(format!("restriction not weaker: {u}|{w}"));
        }
        if r.defined().any(|x| !keep.contains(x)) {
            return Err(format!("restriction keeps extra variables: {u}|{w} = {r}"));
        }
    }
    Ok(())
}

/// Every concrete successor of every store in `⟦v⟧` (within `universe`) is
/// in `⟦sp(v, op)⟧`. Nondet leaves range over `lo..=hi`.
pub fn check_sp_soundness(
    v: &AbstractAssignment,
    op: &Operation,
    universe: &[ConcreteStore],
    lo: i64,
    hi: i64,
) -> Result<(), String> {
    let post = v.sp(op);
    let leaves = op.nondet_count();
    let inputs = input_vectors(leaves, lo, hi);
    for s in universe.iter().filter(|s| v.models(s)) {
        for input in &inputs {
            let mut feed = input.iter().cloned();
            match op {
                Operation::Assign { target, value } => {
                    if let Some(c) = eval(value, s, &mut feed) {
                        let mut t = s.clone();
                        t.insert(target.clone(), c);
                        if !post.models(&t) {
                            return Err(format!("sp({v}, {op}) = {post} misses {t:?}"));
                        }
                    }
                }
                Operation::Assume(p) => {
                    let l = eval(&p.lhs, s, &mut feed);
                    let r = eval(&p.rhs, s, &mut feed);
                    if let (Some(l), Some(r)) = (l, r) {
                        if p.op.holds(&l, &r) && !post.models(s) {
                            return Err(format!("sp({v}, {op}) = {post} misses {s:?}"));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn input_vectors(n: usize, lo: i64, hi: i64) -> Vec<Vec<BigInt>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (lo..=hi).map(move |c| {
                    let mut p = p.clone();
                    p.push(BigInt::from(c));
                    p
                })
            })
            .collect();
    }
    out
}

fn eval(e: &Expr, s: &ConcreteStore, input: &mut impl Iterator<Item = BigInt>) -> Option<BigInt> {
    Some(match e {
        Expr::Const(c) => c.clone(),
        Expr::Var(x) => s.get(x)?.clone(),
        Expr::Nondet => input.next()?,
        Expr::Neg(inner) => -eval(inner, s, input)?,
        Expr::Binary(op, l, r) => {
            let l = eval(l, s, input)?;
            let r = eval(r, s, input)?;
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

/// The three requirements for a constraint-sequence interpolant, plus
/// minimality of the kept variables under single removal and under every
/// strictly smaller subset.
pub fn check_interpolant(
    minus: &ConstraintSequence,
    plus: &ConstraintSequence,
) -> Result<(), String> {
    let itp = interpolate(minus, plus).map_err(|e| format!("{e}: {minus} / {plus}"))?;
    let gamma = itp.constraints();
    if !minus.post().implies(&gamma.post()) {
        return Err(format!("prefix does not imply {gamma}: {minus}"));
    }
    if !gamma.concat(plus).is_contradicting() {
        return Err(format!("{gamma} does not refute {plus}"));
    }
    let (vm, vp) = (minus.variables(), plus.variables());
    if let Some(x) = gamma
        .variables()
        .iter()
        .find(|x| !vm.contains(x) || !vp.contains(x))
    {
        return Err(format!(
            "{x} in {gamma} is not shared by {minus} and {plus}"
        ));
    }
    if itp.is_false() {
        return Ok(());
    }
    let v = minus.post();
    let kept: Vec<Var> = itp.variables().cloned().collect();
    for mask in 0u32..(1 << kept.len()) - 1 {
        let subset: BTreeSet<Var> = kept
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, x)| x.clone())
            .collect();
        if plus.sp(&v.restrict(&subset)).is_contradicting() {
            return Err(format!(
                "smaller subset {subset:?} of {kept:?} refutes {plus} ({minus})"
            ));
        }
    }
    Ok(())
}

/// Requirements for `restrict(v⁻, def(v⁺))` and for the minimized
/// assignment interpolant, whose domain must lie inside the restricted one.
pub fn check_assignment_interpolant(
    vminus: &AbstractAssignment,
    vplus: &AbstractAssignment,
) -> Result<(), String> {
    let requirements = |name: &str, itp: &AbstractAssignment| -> Result<(), String> {
        if !vminus.implies(itp) {
            return Err(format!("{name}: {vminus} does not imply {itp}"));
        }
        if !itp.conj(vplus).is_contradicting() {
            return Err(format!("{name}: {itp} ∧ {vplus} not contradicting"));
        }
        if itp
            .defined()
            .any(|x| vminus.value_of(x).is_none() || vplus.value_of(x).is_none())
        {
            return Err(format!("{name}: {itp} mentions unshared variables"));
        }
        Ok(())
    };
    let restricted = restrict_to_common(vminus, vplus);
    requirements("restriction", &restricted)?;
    let minimized = interpolate_assignments(vminus, vplus).map_err(|e| e.to_string())?;
    requirements("minimized", &minimized)?;
    if minimized
        .defined()
        .any(|x| restricted.value_of(x).is_none())
    {
        return Err(format!("{minimized} not within {restricted}"));
    }
    Ok(())
}
