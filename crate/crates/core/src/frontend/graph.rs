//! Program graphs and cut-point selection.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::Stmt;
use crate::exprdag::{ExprDag, ExprId, VarId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Assign(VarId, ExprId),
    Skip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeLabel {
    Action(Action),
    /// Taken when `cond` evaluates to `positive`.
    Branch {
        cond: ExprId,
        positive: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub label: EdgeLabel,
}

/// Outgoing structure of a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Succ {
    Exit,
    Action(Action, NodeId),
    Branch { cond: ExprId, then: NodeId, other: NodeId },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopInfo {
    /// Node holding the loop condition.
    pub head: NodeId,
    /// Edges from the loop body back into `head`.
    pub back_edges: Vec<usize>,
}

/// Control-flow graph of a while program. Node 0 is `st`; the last node is `te`.
/// All other nodes are numbered 1.. in depth-first order, preferring the
/// edge whose branch literal is written without negation.
#[derive(Clone, Debug)]
pub struct ProgramGraph {
    edges: Vec<Edge>,
    succ: Vec<Succ>,
    preds: Vec<Vec<usize>>,
    out: Vec<Vec<usize>>,
    loops: Vec<LoopInfo>,
}

impl ProgramGraph {
    pub fn st(&self) -> NodeId {
        NodeId(0)
    }

    pub fn te(&self) -> NodeId {
        NodeId(self.succ.len() as u32 - 1)
    }

    pub fn node_count(&self) -> usize {
        self.succ.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.succ.len() as u32).map(NodeId)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn succ(&self, n: NodeId) -> Succ {
        self.succ[n.index()]
    }

    pub fn out_edges(&self, n: NodeId) -> impl Iterator<Item = &Edge> {
        self.out[n.index()].iter().map(|&i| &self.edges[i])
    }

    pub fn in_edges(&self, n: NodeId) -> impl Iterator<Item = &Edge> {
        self.preds[n.index()].iter().map(|&i| &self.edges[i])
    }

    pub fn loops(&self) -> &[LoopInfo] {
        &self.loops
    }

    pub fn is_loop_head(&self, n: NodeId) -> bool {
        self.loops.iter().any(|l| l.head == n)
    }

    pub fn name(&self, n: NodeId) -> String {
        if n == self.st() {
            "st".into()
        } else if n == self.te() {
            "te".into()
        } else {
            n.0.to_string()
        }
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        match name {
            "st" => Some(self.st()),
            "te" => Some(self.te()),
            _ => name
                .parse::<u32>()
                .ok()
                .filter(|&i| i > 0 && (i as usize) < self.node_count() - 1)
                .map(NodeId),
        }
    }

    pub fn edge_label(&self, dag: &ExprDag, label: &EdgeLabel) -> String {
        match *label {
            EdgeLabel::Action(Action::Skip) => "skip".into(),
            EdgeLabel::Action(Action::Assign(v, e)) => {
                format!("{} := {}", dag.var_name(v), dag.show(e))
            }
            EdgeLabel::Branch { cond, positive } => literal_text(dag, cond, positive),
        }
    }

    /// Variables that may be read before they are definitely assigned.
    pub fn free_vars(&self, dag: &ExprDag) -> Vec<VarId> {
        let nvars = dag.var_count();
        let n = self.node_count();
        // must-assigned sets, forward intersection
        let mut assigned: Vec<Option<Vec<bool>>> = vec![None; n];
        assigned[0] = Some(vec![false; nvars]);
        let mut changed = true;
        while changed {
            changed = false;
            for e in &self.edges {
                let Some(mut set) = assigned[e.from.index()].clone() else {
                    continue;
                };
                if let EdgeLabel::Action(Action::Assign(v, _)) = e.label {
                    set[v.index()] = true;
                }
                let slot = &mut assigned[e.to.index()];
                let merged = match slot {
                    None => set,
                    Some(old) => old.iter().zip(&set).map(|(a, b)| *a && *b).collect(),
                };
                if slot.as_ref() != Some(&merged) {
                    *slot = Some(merged);
                    changed = true;
                }
            }
        }
        let mut free = vec![false; nvars];
        for e in &self.edges {
            let read = match e.label {
                EdgeLabel::Action(Action::Assign(_, rhs)) => rhs,
                EdgeLabel::Branch { cond, .. } => cond,
                EdgeLabel::Action(Action::Skip) => continue,
            };
            let set = assigned[e.from.index()].as_ref().expect("reachable node");
            for v in dag.vars_of(read) {
                if !set[v.index()] {
                    free[v.index()] = true;
                }
            }
        }
        (0..nvars as u32).map(VarId).filter(|v| free[v.index()]).collect()
    }
}

/// Textual form of a branch literal, collapsing double negation.
pub fn literal_text(dag: &ExprDag, cond: ExprId, positive: bool) -> String {
    let (cond, positive) = strip_not(dag, cond, positive);
    if positive {
        dag.show(cond).to_string()
    } else {
        let n = crate::exprdag::ExprNode::Not(cond);
        match dag.find(&n) {
            Some(id) => dag.show(id).to_string(),
            None => format!("!({})", dag.show(cond)),
        }
    }
}

fn strip_not(dag: &ExprDag, mut cond: ExprId, mut positive: bool) -> (ExprId, bool) {
    while let crate::exprdag::ExprNode::Not(x) = dag.node(cond) {
        cond = *x;
        positive = !positive;
    }
    (cond, positive)
}

struct Builder {
    edges: Vec<Edge>,
    next: u32,
    loops: Vec<LoopInfo>,
}

impl Builder {
    fn fresh(&mut self) -> NodeId {
        self.next += 1;
        NodeId(self.next - 1)
    }

    fn edge(&mut self, from: NodeId, to: NodeId, label: EdgeLabel) -> usize {
        self.edges.push(Edge { from, to, label });
        self.edges.len() - 1
    }

    fn stmt(&mut self, s: &Stmt, from: NodeId, to: NodeId) {
        match s {
            Stmt::Assign(v, e) => {
                self.edge(from, to, EdgeLabel::Action(Action::Assign(*v, *e)));
            }
            Stmt::Skip => {
                self.edge(from, to, EdgeLabel::Action(Action::Skip));
            }
            Stmt::Seq(stmts) => {
                let mut cur = from;
                for (i, s) in stmts.iter().enumerate() {
                    let next = if i + 1 == stmts.len() { to } else { self.fresh() };
                    self.stmt(s, cur, next);
                    cur = next;
                }
            }
            Stmt::If(cond, a, b) => {
                let t = self.fresh();
                let f = self.fresh();
                self.edge(
                    from,
                    t,
                    EdgeLabel::Branch {
                        cond: *cond,
                        positive: true,
                    },
                );
                self.edge(
                    from,
                    f,
                    EdgeLabel::Branch {
                        cond: *cond,
                        positive: false,
                    },
                );
                self.stmt(a, t, to);
                self.stmt(b, f, to);
            }
            Stmt::While(cond, body) => {
                let entry = self.fresh();
                self.edge(
                    from,
                    entry,
                    EdgeLabel::Branch {
                        cond: *cond,
                        positive: true,
                    },
                );
                self.edge(
                    from,
                    to,
                    EdgeLabel::Branch {
                        cond: *cond,
                        positive: false,
                    },
                );
                let first_back = self.edges.len();
                self.stmt(body, entry, from);
                let back_edges = (first_back..self.edges.len())
                    .filter(|&i| self.edges[i].to == from)
                    .collect();
                self.loops.push(LoopInfo { head: from, back_edges });
            }
        }
    }
}

/// Builds the program graph of `body`.
pub fn build_program_graph(dag: &ExprDag, body: &Stmt) -> ProgramGraph {
    let mut b = Builder {
        edges: Vec::new(),
        next: 2,
        loops: Vec::new(),
    };
    let (st, te) = (NodeId(0), NodeId(1));
    if body.starts_with_loop() {
        // st must not be a loop head
        let head = b.fresh();
        b.edge(st, head, EdgeLabel::Action(Action::Skip));
        b.stmt(body, head, te);
    } else {
        b.stmt(body, st, te);
    }
    renumber(dag, b)
}

fn renumber(dag: &ExprDag, b: Builder) -> ProgramGraph {
    let old_count = b.next as usize;
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); old_count];
    for (i, e) in b.edges.iter().enumerate() {
        out[e.from.index()].push(i);
    }
    // visit the non-negated literal first
    for list in &mut out {
        if let [a, _] = list[..] {
            if let EdgeLabel::Branch { cond, positive } = b.edges[a].label {
                if !strip_not(dag, cond, positive).1 {
                    list.swap(0, 1);
                }
            }
        }
    }
    let te_old = NodeId(1);
    let mut order: Vec<Option<u32>> = vec![None; old_count];
    order[0] = Some(0);
    let mut next = 1;
    let mut stack: Vec<(NodeId, usize)> = vec![(NodeId(0), 0)];
    while let Some((n, i)) = stack.pop() {
        let Some(&edge) = out[n.index()].get(i) else {
            continue;
        };
        stack.push((n, i + 1));
        let to = b.edges[edge].to;
        if to != te_old && order[to.index()].is_none() {
            order[to.index()] = Some(next);
            next += 1;
            stack.push((to, 0));
        }
    }
    order[te_old.index()] = Some(next);
    let count = next as usize + 1;
    let map = |n: NodeId| NodeId(order[n.index()].expect("node reachable from st"));

    let edges: Vec<Edge> = b
        .edges
        .iter()
        .map(|e| Edge {
            from: map(e.from),
            to: map(e.to),
            label: e.label,
        })
        .collect();
    let mut succ = vec![Succ::Exit; count];
    let mut preds = vec![Vec::new(); count];
    let mut outs = vec![Vec::new(); count];
    for (i, e) in edges.iter().enumerate() {
        preds[e.to.index()].push(i);
        outs[e.from.index()].push(i);
        let slot = &mut succ[e.from.index()];
        *slot = match (*slot, e.label) {
            (Succ::Exit, EdgeLabel::Action(a)) => Succ::Action(a, e.to),
            (Succ::Exit, EdgeLabel::Branch { cond, .. }) => Succ::Branch {
                cond,
                then: e.to,
                other: e.to,
            },
            (Succ::Branch { cond, then, other }, EdgeLabel::Branch { positive, .. }) => {
                if positive {
                    Succ::Branch {
                        cond,
                        then: e.to,
                        other,
                    }
                } else {
                    Succ::Branch {
                        cond,
                        then,
                        other: e.to,
                    }
                }
            }
            (s, _) => unreachable!("malformed successor structure {s:?}"),
        };
    }
    for list in &mut outs {
        list.sort_by_key(|&i| edges[i].to);
    }
    let loops = b
        .loops
        .into_iter()
        .map(|l| LoopInfo {
            head: map(l.head),
            back_edges: l.back_edges,
        })
        .collect();
    ProgramGraph {
        edges,
        succ,
        preds,
        out: outs,
        loops,
    }
}

/// Which node interrupts each loop.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutStrategy {
    /// The source of the loop's back edge when it is a unique action node,
    /// otherwise the loop head.
    #[default]
    BackEdge,
    /// Always the loop head.
    LoopHead,
}

impl std::str::FromStr for CutStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "back-edge" => Ok(CutStrategy::BackEdge),
            "loop-head" => Ok(CutStrategy::LoopHead),
            _ => Err(format!("unknown cut-point strategy `{s}` (back-edge|loop-head)")),
        }
    }
}

/// Cut points, sorted, always containing `st` and `te`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutPointSet {
    nodes: Vec<NodeId>,
}

impl CutPointSet {
    pub fn from_nodes(mut nodes: Vec<NodeId>) -> Self {
        nodes.sort();
        nodes.dedup();
        CutPointSet { nodes }
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.nodes.binary_search(&n).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

pub fn select_cut_points(g: &ProgramGraph, strategy: CutStrategy) -> CutPointSet {
    let mut nodes = vec![g.st(), g.te()];
    for l in g.loops() {
        let pick = match strategy {
            CutStrategy::LoopHead => l.head,
            CutStrategy::BackEdge => {
                let sources: Vec<NodeId> = l.back_edges.iter().map(|&i| g.edges()[i].from).collect();
                match sources[..] {
                    [src] if matches!(g.succ(src), Succ::Action(..)) => src,
                    _ => l.head,
                }
            }
        };
        nodes.push(pick);
    }
    nodes.sort();
    nodes.dedup();
    CutPointSet { nodes }
}

/// True if deleting `cuts` leaves no cycle in `g`.
pub fn cuts_break_all_cycles(g: &ProgramGraph, cuts: &CutPointSet) -> bool {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; g.node_count()];
    fn dfs(g: &ProgramGraph, cuts: &CutPointSet, n: NodeId, state: &mut [u8]) -> bool {
        state[n.index()] = 1;
        for e in g.out_edges(n) {
            if cuts.contains(e.to) {
                continue;
            }
            let seen = state[e.to.index()];
            if seen == 1 || (seen == 0 && !dfs(g, cuts, e.to, state)) {
                return false;
            }
        }
        state[n.index()] = 2;
        true
    }
    g.nodes()
        .filter(|n| !cuts.contains(*n))
        .all(|n| state[n.index()] != 0 || dfs(g, cuts, n, &mut state))
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}
