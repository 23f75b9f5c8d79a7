//! Control-flow automata and their construction from the syntax tree.
//!
//! Lowering rules: assignments become assign edges, every branch becomes a
//! pair of complementary assume edges, `&&`/`||`/`!` are compiled into
//! branching over atomic comparisons, and calls are inlined with the callee's
//! locals renamed per call site (`f#k::x`). A call to `error()` turns the
//! current location into an error location.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use super::ast::*;
use super::error::LangError;
use super::ops::{Expr, Operation, Var};
use super::parser::parse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocId(pub u32);

impl fmt::Display for LocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u32);

/// One inlined activation of a function. Instance 0 is `main`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InstanceId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub id: LocId,
    pub line: u32,
    pub function: String,
    pub instance: InstanceId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub source: LocId,
    pub target: LocId,
    pub op: Operation,
    pub line: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarScope {
    Global,
    Local(InstanceId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarInfo {
    pub name: Var,
    /// Name as written in the source, before per-call-site renaming.
    pub source_name: String,
    pub scope: VarScope,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionInstance {
    pub id: InstanceId,
    pub function: String,
    pub parent: Option<InstanceId>,
    pub call_line: u32,
}

#[derive(Debug, Clone)]
pub struct Cfa {
    locations: Vec<Location>,
    edges: Vec<Edge>,
    outgoing: Vec<Vec<EdgeId>>,
    variables: BTreeMap<Var, VarInfo>,
    instances: Vec<FunctionInstance>,
}

impl Cfa {
    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn location(&self, id: LocId) -> &Location {
        &self.locations[id.0 as usize]
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id.0 as usize]
    }

    pub fn outgoing(&self, loc: LocId) -> impl Iterator<Item = &Edge> + '_ {
        self.outgoing[loc.0 as usize].iter().map(|e| self.edge(*e))
    }

    pub fn variables(&self) -> &BTreeMap<Var, VarInfo> {
        &self.variables
    }

    pub fn instances(&self) -> &[FunctionInstance] {
        &self.instances
    }

    /// True if `inner` is `outer` or was inlined (transitively) inside it.
    pub fn instance_within(&self, inner: InstanceId, outer: InstanceId) -> bool {
        let mut cur = Some(inner);
        while let Some(i) = cur {
            if i == outer {
                return true;
            }
            cur = self.instances[i.0 as usize].parent;
        }
        false
    }

    /// Locations at which `var` is in scope.
    ///
    /// Globals are in scope everywhere. A local is in scope in the locations
    /// of its declaring function instance, including the bodies inlined into
    /// that instance, since the local stays alive across those calls.
    pub fn scope_of(&self, var: &Var) -> Result<BTreeSet<LocId>, LangError> {
        let info = self
            .variables
            .get(var)
            .ok_or_else(|| LangError::UnknownVariable(var.to_string()))?;
        Ok(self
            .locations
            .iter()
            .filter(|l| match info.scope {
                VarScope::Global => true,
                VarScope::Local(inst) => self.instance_within(l.instance, inst),
            })
            .map(|l| l.id)
            .collect())
    }
}

/// A CFA together with its entry and error locations.
#[derive(Debug, Clone)]
pub struct VerificationProblem {
    pub cfa: Cfa,
    pub initial: LocId,
    pub errors: BTreeSet<LocId>,
}

impl VerificationProblem {
    pub fn is_error(&self, loc: LocId) -> bool {
        self.errors.contains(&loc)
    }
}

/// Parses `source` and lowers it to a verification problem.
pub fn load(source: &str) -> Result<VerificationProblem, LangError> {
    Ok(build_cfa(&parse(source)?))
}

struct RawLoc {
    line: u32,
    instance: InstanceId,
}

struct RawEdge {
    source: usize,
    target: usize,
    op: Operation,
    line: u32,
}

struct Frame {
    instance: InstanceId,
    renames: HashMap<String, Var>,
    return_target: usize,
    return_dest: Option<Var>,
    loops: Vec<(usize, usize)>,
}

struct Builder<'p> {
    program: &'p Program,
    locs: Vec<RawLoc>,
    edges: Vec<RawEdge>,
    uf: Vec<usize>,
    errors: Vec<usize>,
    variables: BTreeMap<Var, VarInfo>,
    instances: Vec<FunctionInstance>,
}

/// Lowers a validated program to its CFA.
pub fn build_cfa(program: &Program) -> VerificationProblem {
    let mut b = Builder {
        program,
        locs: Vec::new(),
        edges: Vec::new(),
        uf: Vec::new(),
        errors: Vec::new(),
        variables: BTreeMap::new(),
        instances: Vec::new(),
    };
    let main = program
        .function("main")
        .expect("validated program has a main function");
    let root = InstanceId(0);
    b.instances.push(FunctionInstance {
        id: root,
        function: main.name.clone(),
        parent: None,
        call_line: main.pos.line,
    });
    let entry = b.new_loc(main.pos.line, root);
    let exit = b.new_loc(main.pos.line, root);
    let mut cur = entry;

    for g in &program.globals {
        let var = Var::new(&g.name);
        b.variables.insert(
            var.clone(),
            VarInfo {
                name: var.clone(),
                source_name: g.name.clone(),
                scope: VarScope::Global,
            },
        );
        let value = g.init.clone().unwrap_or_else(|| Expr::int(0));
        cur = b.step(
            cur,
            Operation::Assign { target: var, value },
            g.pos.line,
            root,
        );
    }

    let mut frame = Frame {
        instance: root,
        renames: HashMap::new(),
        return_target: exit,
        return_dest: None,
        loops: Vec::new(),
    };
    for p in &main.params {
        let var = b.declare(&mut frame, p);
        cur = b.step(
            cur,
            Operation::Assign {
                target: var,
                value: Expr::Nondet,
            },
            main.pos.line,
            root,
        );
    }
    if let Some(end) = b.block(&main.body, Some(cur), &mut frame) {
        b.merge(end, exit);
    }
    b.finish(entry)
}

impl Builder<'_> {
    fn new_loc(&mut self, line: u32, instance: InstanceId) -> usize {
        self.locs.push(RawLoc { line, instance });
        self.uf.push(self.uf.len());
        self.locs.len() - 1
    }

    fn find(&mut self, mut l: usize) -> usize {
        while self.uf[l] != l {
            self.uf[l] = self.uf[self.uf[l]];
            l = self.uf[l];
        }
        l
    }

    /// Identifies two locations; the representative is the older one.
    fn merge(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            let (keep, drop) = if a < b { (a, b) } else { (b, a) };
            self.uf[drop] = keep;
        }
    }

    fn edge(&mut self, source: usize, target: usize, op: Operation, line: u32) {
        self.edges.push(RawEdge {
            source,
            target,
            op,
            line,
        });
    }

    /// Appends an edge from `cur` to a fresh location and returns the latter.
    fn step(&mut self, cur: usize, op: Operation, line: u32, instance: InstanceId) -> usize {
        let next = self.new_loc(line, instance);
        self.edge(cur, next, op, line);
        next
    }

    fn declare(&mut self, frame: &mut Frame, name: &str) -> Var {
        let inst = &self.instances[frame.instance.0 as usize];
        let var = if frame.instance.0 == 0 {
            Var::new(name)
        } else {
            Var::from(format!("{}#{}::{}", inst.function, frame.instance.0, name))
        };
        self.variables.insert(
            var.clone(),
            VarInfo {
                name: var.clone(),
                source_name: name.to_string(),
                scope: VarScope::Local(frame.instance),
            },
        );
        frame.renames.insert(name.to_string(), var.clone());
        var
    }

    fn resolve(frame: &Frame, name: &str) -> Var {
        frame
            .renames
            .get(name)
            .cloned()
            .unwrap_or_else(|| Var::new(name))
    }

    fn rename(frame: &Frame, e: &Expr) -> Expr {
        e.map_vars(&|v| Self::resolve(frame, v.as_str()))
    }

    fn block(
        &mut self,
        stmts: &[Stmt],
        mut cur: Option<usize>,
        frame: &mut Frame,
    ) -> Option<usize> {
        for s in stmts {
            let Some(at) = cur else {
                // statements after error/break/continue/return are dead
                break;
            };
            cur = self.stmt(s, at, frame);
        }
        cur
    }

    fn assign_rhs(
        &mut self,
        target: Var,
        rhs: &Rhs,
        cur: usize,
        frame: &mut Frame,
        line: u32,
    ) -> Option<usize> {
        match rhs {
            Rhs::Expr(e) => {
                let value = Self::rename(frame, e);
                Some(self.step(
                    cur,
                    Operation::Assign { target, value },
                    line,
                    frame.instance,
                ))
            }
            Rhs::Call(call) => self.inline_call(call, Some(target), cur, frame, line),
        }
    }

    fn stmt(&mut self, s: &Stmt, cur: usize, frame: &mut Frame) -> Option<usize> {
        let line = s.pos.line;
        let inst = frame.instance;
        match &s.kind {
            StmtKind::Decl { name, init } => {
                // the initializer sees the enclosing binding, not the new one
                let prior = frame.renames.get(name).cloned();
                let var = self.declare(frame, name);
                match init {
                    None => Some(self.step(
                        cur,
                        Operation::Assign {
                            target: var,
                            value: Expr::Nondet,
                        },
                        line,
                        inst,
                    )),
                    Some(rhs) => {
                        match prior {
                            Some(p) => frame.renames.insert(name.clone(), p),
                            None => frame.renames.remove(name),
                        };
                        let out = self.assign_rhs(var.clone(), rhs, cur, frame, line);
                        frame.renames.insert(name.clone(), var);
                        out
                    }
                }
            }
            StmtKind::Assign { target, value } => {
                let target = Self::resolve(frame, target);
                self.assign_rhs(target, value, cur, frame, line)
            }
            StmtKind::Call(call) => self.inline_call(call, None, cur, frame, line),
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let then_start = self.new_loc(line, inst);
                let else_start = self.new_loc(line, inst);
                self.cond(cond, cur, then_start, else_start, frame, line);
                let then_end = self.block(then_branch, Some(then_start), frame);
                let else_end = match else_branch {
                    Some(stmts) => self.block(stmts, Some(else_start), frame),
                    None => Some(else_start),
                };
                match (then_end, else_end) {
                    (Some(a), Some(b)) => {
                        self.merge(a, b);
                        Some(a)
                    }
                    (a, b) => a.or(b),
                }
            }
            StmtKind::While { cond, body } => {
                let head = cur;
                let body_start = self.new_loc(line, inst);
                let exit = self.new_loc(line, inst);
                self.cond(cond, head, body_start, exit, frame, line);
                frame.loops.push((head, exit));
                if let Some(end) = self.block(body, Some(body_start), frame) {
                    self.merge(end, head);
                }
                frame.loops.pop();
                Some(exit)
            }
            StmtKind::Break => {
                let (_, exit) = *frame.loops.last().expect("validated: break inside loop");
                self.merge(cur, exit);
                None
            }
            StmtKind::Continue => {
                let (head, _) = *frame.loops.last().expect("validated: continue inside loop");
                self.merge(cur, head);
                None
            }
            StmtKind::Return(value) => {
                match (value, frame.return_dest.clone()) {
                    (Some(e), Some(dest)) => {
                        let value = Self::rename(frame, e);
                        self.edge(
                            cur,
                            frame.return_target,
                            Operation::Assign {
                                target: dest,
                                value,
                            },
                            line,
                        );
                    }
                    _ => self.merge(cur, frame.return_target),
                }
                None
            }
            StmtKind::Error => {
                self.errors.push(cur);
                self.locs[cur].line = line;
                None
            }
            StmtKind::Block(stmts) => self.block(stmts, Some(cur), frame),
        }
    }

    fn cond(
        &mut self,
        cond: &Cond,
        from: usize,
        on_true: usize,
        on_false: usize,
        frame: &Frame,
        line: u32,
    ) {
        match cond {
            Cond::Cmp(p) => {
                let p = p.map_vars(&|v| Self::resolve(frame, v.as_str()));
                let negated = p.negate();
                self.edge(from, on_true, Operation::Assume(p), line);
                self.edge(from, on_false, Operation::Assume(negated), line);
            }
            Cond::Not(c) => self.cond(c, from, on_false, on_true, frame, line),
            Cond::And(a, b) => {
                let mid = self.new_loc(line, frame.instance);
                self.cond(a, from, mid, on_false, frame, line);
                self.cond(b, mid, on_true, on_false, frame, line);
            }
            Cond::Or(a, b) => {
                let mid = self.new_loc(line, frame.instance);
                self.cond(a, from, on_true, mid, frame, line);
                self.cond(b, mid, on_true, on_false, frame, line);
            }
        }
    }

    fn inline_call(
        &mut self,
        call: &Call,
        dest: Option<Var>,
        mut cur: usize,
        caller: &mut Frame,
        line: u32,
    ) -> Option<usize> {
        let program = self.program;
        let callee = program
            .function(&call.function)
            .expect("validated: callee exists");
        let instance = InstanceId(self.instances.len() as u32);
        self.instances.push(FunctionInstance {
            id: instance,
            function: callee.name.clone(),
            parent: Some(caller.instance),
            call_line: line,
        });
        let ret = self.new_loc(line, caller.instance);
        let mut frame = Frame {
            instance,
            renames: HashMap::new(),
            return_target: ret,
            return_dest: dest.clone(),
            loops: Vec::new(),
        };
        for (param, arg) in callee.params.iter().zip(&call.args) {
            let value = Self::rename(caller, arg);
            let target = self.declare(&mut frame, param);
            cur = self.step(cur, Operation::Assign { target, value }, line, instance);
        }
        if let Some(end) = self.block(&callee.body, Some(cur), &mut frame) {
            match dest {
                // falling off the end of an int function leaves the result indeterminate
                Some(dest) if callee.returns_int => self.edge(
                    end,
                    ret,
                    Operation::Assign {
                        target: dest,
                        value: Expr::Nondet,
                    },
                    callee.pos.line,
                ),
                _ => self.merge(end, ret),
            }
        }
        Some(ret)
    }

    fn finish(mut self, entry: usize) -> VerificationProblem {
        let n = self.locs.len();
        let reps: Vec<usize> = (0..n).map(|l| self.find(l)).collect();
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in &self.edges {
            succ[reps[e.source]].push(reps[e.target]);
        }
        let start = reps[entry];
        let mut reachable = vec![false; n];
        reachable[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(l) = queue.pop_front() {
            for &t in &succ[l] {
                if !reachable[t] {
                    reachable[t] = true;
                    queue.push_back(t);
                }
            }
        }

        let mut new_id = vec![None; n];
        let mut locations = Vec::new();
        for (l, raw) in self.locs.iter().enumerate() {
            if reps[l] == l && reachable[l] {
                let id = LocId(locations.len() as u32);
                new_id[l] = Some(id);
                locations.push(Location {
                    id,
                    line: raw.line,
                    function: self.instances[raw.instance.0 as usize].function.clone(),
                    instance: raw.instance,
                });
            }
        }
        let mut edges = Vec::new();
        let mut outgoing = vec![Vec::new(); locations.len()];
        for e in self.edges {
            let (Some(source), Some(target)) = (new_id[reps[e.source]], new_id[reps[e.target]])
            else {
                continue;
            };
            let id = EdgeId(edges.len() as u32);
            outgoing[source.0 as usize].push(id);
            edges.push(Edge {
                id,
                source,
                target,
                op: e.op,
                line: e.line,
            });
        }
        let errors: BTreeSet<LocId> = self
            .errors
            .iter()
            .filter_map(|&l| new_id[reps[l]])
            .collect();
        debug_assert!(errors.iter().all(|l| outgoing[l.0 as usize].is_empty()));
        VerificationProblem {
            cfa: Cfa {
                locations,
                edges,
                outgoing,
                variables: self.variables,
                instances: self.instances,
            },
            initial: new_id[start].expect("entry is reachable"),
            errors,
        }
    }
}
