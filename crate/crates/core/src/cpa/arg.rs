//! The abstract reachability graph.
//!
//! Nodes form a tree through their parent edges. A node is in exactly one of
//! these conditions: expanded, waiting (in the waitlist), covered by another
//! node at the same location, or a target. Covered nodes stay in the graph so
//! they can be re-queued if their covering node is pruned.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use super::path::{Path, PathStep};
use super::{AbstractState, CpaError, Traversal};
use crate::domain::{AbstractAssignment, Precision, ProgramPrecision, Value};

const SUBSET_LOOKUP_LIMIT: usize = 12;
use crate::lang::{EdgeId, LocId, VerificationProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone)]
pub struct ArgNode {
    pub id: NodeId,
    pub state: AbstractState,
    pub precision: Arc<Precision>,
    pub parent: Option<(NodeId, EdgeId)>,
    pub children: Vec<NodeId>,
    pub covered_by: Option<NodeId>,
    pub is_target: bool,
}

#[derive(Debug, Clone)]
pub struct Arg {
    nodes: Vec<Option<ArgNode>>,
    root: NodeId,
    live: usize,
    created: usize,
    peak: usize,
    waitlist: BTreeSet<NodeId>,
    reached_at: HashMap<LocId, BTreeSet<NodeId>>,
    // same nodes, keyed by their data state for coverage lookups
    by_state: HashMap<LocId, HashMap<AbstractAssignment, BTreeSet<NodeId>>>,
    covers: HashMap<NodeId, BTreeSet<NodeId>>,
}

impl Arg {
    /// A graph holding only the initial state, which is waiting.
    pub fn new(problem: &VerificationProblem, precision: &ProgramPrecision) -> Self {
        let mut arg = Arg {
            nodes: Vec::new(),
            root: NodeId(0),
            live: 0,
            created: 0,
            peak: 0,
            waitlist: BTreeSet::new(),
            reached_at: HashMap::new(),
            by_state: HashMap::new(),
            covers: HashMap::new(),
        };
        arg.reset_root(problem, precision);
        arg
    }

    fn reset_root(&mut self, problem: &VerificationProblem, precision: &ProgramPrecision) {
        let pi = precision.at(problem.initial).clone();
        let state = AbstractState::new(
            problem.initial,
            AbstractAssignment::top().restrict(&pi.tracked),
        );
        let is_target = problem.is_error(problem.initial);
        let root = self.push_node(state, pi, None, is_target);
        self.root = root;
        if !is_target {
            self.enqueue(root);
        }
    }

    pub(crate) fn push_node(
        &mut self,
        state: AbstractState,
        precision: Arc<Precision>,
        parent: Option<(NodeId, EdgeId)>,
        is_target: bool,
    ) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        if let Some((p, _)) = parent {
            self.node_mut(p).children.push(id);
        }
        self.nodes.push(Some(ArgNode {
            id,
            state,
            precision,
            parent,
            children: Vec::new(),
            covered_by: None,
            is_target,
        }));
        self.live += 1;
        self.created += 1;
        self.peak = self.peak.max(self.live);
        id
    }

    /// Adds a node to the reached set and the waitlist.
    pub(crate) fn enqueue(&mut self, id: NodeId) {
        let state = self.node(id).state.clone();
        self.reached_at
            .entry(state.location)
            .or_default()
            .insert(id);
        self.by_state
            .entry(state.location)
            .or_default()
            .entry(state.data)
            .or_default()
            .insert(id);
        self.waitlist.insert(id);
    }

    fn unindex(&mut self, id: NodeId, state: &AbstractState) {
        if let Some(set) = self.reached_at.get_mut(&state.location) {
            set.remove(&id);
        }
        if let Some(map) = self.by_state.get_mut(&state.location) {
            if let Some(set) = map.get_mut(&state.data) {
                set.remove(&id);
                if set.is_empty() {
                    map.remove(&state.data);
                }
            }
        }
    }

    /// Replaces the data state of a reached node, keeping the indexes current.
    pub(crate) fn replace_data(&mut self, id: NodeId, data: AbstractAssignment) {
        let old = self.node(id).state.clone();
        let indexed = self
            .reached_at
            .get(&old.location)
            .is_some_and(|s| s.contains(&id));
        if indexed {
            self.unindex(id, &old);
        }
        self.node_mut(id).state.data = data;
        if indexed {
            let state = self.node(id).state.clone();
            self.reached_at
                .entry(state.location)
                .or_default()
                .insert(id);
            self.by_state
                .entry(state.location)
                .or_default()
                .entry(state.data)
                .or_default()
                .insert(id);
        }
    }

    /// Reached nodes at `loc` whose state is at least as general as `data`,
    /// smallest id first.
    pub fn covering_candidates(&self, loc: LocId, data: &AbstractAssignment) -> Vec<NodeId> {
        let Some(map) = self.by_state.get(&loc) else {
            return Vec::new();
        };
        let mut found = BTreeSet::new();
        if data.is_contradicting()
            || data.len() > SUBSET_LOOKUP_LIMIT
            || map.len() < (1 << data.len())
        {
            for (w, ids) in map {
                if data.leq(w) {
                    found.extend(ids.iter().copied());
                }
            }
        } else {
            // a more general state binds a subset of our bindings
            let bindings: Vec<_> = data.bindings().collect();
            for mask in 0u32..(1 << bindings.len()) {
                let subset = AbstractAssignment::from_values(
                    bindings
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, (x, c))| ((*x).clone(), Value::Int((*c).clone()))),
                );
                if let Some(ids) = map.get(&subset) {
                    found.extend(ids.iter().copied());
                }
            }
        }
        found.into_iter().collect()
    }

    pub(crate) fn requeue(&mut self, id: NodeId) {
        self.waitlist.insert(id);
    }

    pub(crate) fn mark_covered(&mut self, id: NodeId, by: NodeId) {
        self.node_mut(id).covered_by = Some(by);
        self.covers.entry(by).or_default().insert(id);
    }

    pub(crate) fn pop(&mut self, traversal: Traversal) -> Option<NodeId> {
        match traversal {
            Traversal::Dfs => self.waitlist.pop_last(),
            Traversal::Bfs => self.waitlist.pop_first(),
        }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &ArgNode {
        self.nodes[id.0 as usize]
            .as_ref()
            .expect("node id refers to a removed node")
    }

    pub fn get(&self, id: NodeId) -> Option<&ArgNode> {
        self.nodes.get(id.0 as usize).and_then(|n| n.as_ref())
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut ArgNode {
        self.nodes[id.0 as usize]
            .as_mut()
            .expect("node id refers to a removed node")
    }

    pub fn nodes(&self) -> impl Iterator<Item = &ArgNode> {
        self.nodes.iter().flatten()
    }

    /// Nodes currently in the graph.
    pub fn len(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    /// Nodes ever created, including pruned ones.
    pub fn created(&self) -> usize {
        self.created
    }

    /// Largest number of nodes present at any one time.
    pub fn peak(&self) -> usize {
        self.peak
    }

    pub fn waitlist(&self) -> &BTreeSet<NodeId> {
        &self.waitlist
    }

    /// Uncovered, non-target nodes at `loc`.
    pub fn reached_at(&self, loc: LocId) -> impl Iterator<Item = NodeId> + '_ {
        self.reached_at.get(&loc).into_iter().flatten().copied()
    }

    /// Walks parent edges from `target` to the root.
    pub fn extract_error_path(
        &self,
        problem: &VerificationProblem,
        target: NodeId,
    ) -> Result<Path, CpaError> {
        let mut steps = Vec::new();
        let mut nodes = vec![target];
        let mut cur = target;
        let mut guard = 0usize;
        while let Some((parent, edge_id)) = self
            .get(cur)
            .ok_or(CpaError::BrokenParentChain(cur))?
            .parent
        {
            let edge = problem.cfa.edge(edge_id);
            if self.get(parent).map(|p| p.state.location) != Some(edge.source) {
                return Err(CpaError::BrokenParentChain(cur));
            }
            steps.push(PathStep {
                edge: edge_id,
                op: edge.op.clone(),
                location: edge.target,
                line: edge.line,
            });
            nodes.push(parent);
            cur = parent;
            guard += 1;
            if guard > self.nodes.len() {
                return Err(CpaError::BrokenParentChain(cur));
            }
        }
        if cur != self.root {
            return Err(CpaError::BrokenParentChain(cur));
        }
        steps.reverse();
        nodes.reverse();
        Ok(Path {
            start: self.node(self.root).state.location,
            steps,
            nodes,
        })
    }

    /// Lazy refinement: removes the subtree below the shallowest path node
    /// whose location gained precision and re-queues that node's parent.
    ///
    /// `precision` is the refined program precision. Returns the root of the
    /// removed subtree. Fails if no node on the path gains precision.
    pub fn prune(
        &mut self,
        problem: &VerificationProblem,
        precision: &ProgramPrecision,
        path: &Path,
    ) -> Result<NodeId, CpaError> {
        if path.nodes.len() != path.steps.len() + 1 {
            return Err(CpaError::PathWithoutNodes);
        }
        let cut = path
            .nodes
            .iter()
            .position(|&n| {
                let node = self.node(n);
                !precision.at(node.state.location).is_subset(&node.precision)
            })
            .ok_or(CpaError::NoPrecisionGain)?;
        let cut_node = path.nodes[cut];
        if cut == 0 {
            let old_root = self.root;
            self.remove_subtree(old_root);
            self.reset_root(problem, precision);
            return Ok(old_root);
        }
        let parent = path.nodes[cut - 1];
        self.remove_subtree(cut_node);
        let loc = self.node(parent).state.location;
        let widened = self.node(parent).precision.union(precision.at(loc));
        self.node_mut(parent).precision = Arc::new(widened);
        self.requeue(parent);
        Ok(cut_node)
    }

    /// Removes `top` and all its descendants; nodes they covered are re-queued.
    pub(crate) fn remove_subtree(&mut self, top: NodeId) {
        if let Some((parent, _)) = self.node(top).parent {
            self.node_mut(parent).children.retain(|c| *c != top);
        }
        let mut stack = vec![top];
        let mut removed = BTreeSet::new();
        let mut orphaned = BTreeSet::new();
        while let Some(id) = stack.pop() {
            let node = self.nodes[id.0 as usize].take().expect("live node");
            self.live -= 1;
            removed.insert(id);
            stack.extend(node.children.iter().copied());
            self.waitlist.remove(&id);
            self.unindex(id, &node.state);
            if let Some(by) = node.covered_by {
                if let Some(set) = self.covers.get_mut(&by) {
                    set.remove(&id);
                }
            }
            if let Some(covered) = self.covers.remove(&id) {
                orphaned.extend(covered);
            }
        }
        for id in orphaned {
            if removed.contains(&id) || self.get(id).is_none() {
                continue;
            }
            self.node_mut(id).covered_by = None;
            self.enqueue(id);
        }
    }

    /// Checks the structural invariants; returns a description of the first violation.
    pub fn check_well_formed(&self) -> Result<(), String> {
        let root = self.get(self.root).ok_or("root missing")?;
        if root.parent.is_some() {
            return Err("root has a parent".into());
        }
        let mut count = 0;
        for node in self.nodes() {
            count += 1;
            if let Some((p, _)) = node.parent {
                let parent = self
                    .get(p)
                    .ok_or(format!("{:?}: dangling parent", node.id))?;
                if !parent.children.contains(&node.id) {
                    return Err(format!("{:?}: missing from parent's children", node.id));
                }
            } else if node.id != self.root {
                return Err(format!("{:?}: second root", node.id));
            }
            for c in &node.children {
                let child = self
                    .get(*c)
                    .ok_or(format!("{:?}: dangling child", node.id))?;
                if child.parent.map(|(p, _)| p) != Some(node.id) {
                    return Err(format!("{c:?}: wrong parent"));
                }
            }
            if let Some(by) = node.covered_by {
                if !node.children.is_empty() {
                    return Err(format!("{:?}: covered node has children", node.id));
                }
                let cover = self
                    .get(by)
                    .ok_or(format!("{:?}: coverer removed", node.id))?;
                if cover.state.location != node.state.location
                    || !node.state.data.leq(&cover.state.data)
                {
                    return Err(format!("{:?}: not covered by {by:?}", node.id));
                }
                if self.waitlist.contains(&node.id) {
                    return Err(format!("{:?}: covered node is waiting", node.id));
                }
            }
        }
        if count != self.live {
            return Err("live count mismatch".into());
        }
        for w in &self.waitlist {
            if self.get(*w).is_none() {
                return Err(format!("{w:?}: waiting but removed"));
            }
        }
        // every node reaches the root
        for node in self.nodes() {
            let mut cur = node.id;
            let mut steps = 0;
            while let Some((p, _)) = self.node(cur).parent {
                cur = p;
                steps += 1;
                if steps > self.nodes.len() {
                    return Err("parent cycle".into());
                }
            }
            if cur != self.root {
                return Err(format!("{:?}: detached", node.id));
            }
        }
        Ok(())
    }

    /// Graphviz rendering: one line per node, one line per edge.
    pub fn to_dot(&self, problem: &VerificationProblem) -> String {
        let mut out = String::from("digraph arg {\n");
        for node in self.nodes() {
            let mut label = format!(
                "{} @ {} {} π={}",
                node.id.0, node.state.location, node.state.data, node.precision
            );
            if let Some(by) = node.covered_by {
                let _ = write!(label, " covered by {}", by.0);
            }
            let shape = if node.is_target { ",color=red" } else { "" };
            let _ = writeln!(
                out,
                "  n{} [label=\"{}\"{}];",
                node.id.0,
                label.replace('"', "\\\""),
                shape
            );
        }
        let mut edges = BTreeMap::new();
        for node in self.nodes() {
            if let Some((p, e)) = node.parent {
                edges.insert(node.id, (p, e));
            }
        }
        for (child, (parent, e)) in edges {
            let op = problem.cfa.edge(e).op.to_string().replace('"', "\\\"");
            let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"];", parent.0, child.0, op);
        }
        out.push_str("}\n");
        out
    }
}
