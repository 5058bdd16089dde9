use std::collections::HashMap;

use thiserror::Error;

use super::lattice::{LatticeElem, Leaf};
use super::order::PredOrder;
use crate::cost::CostReport;
use crate::exprdag::{ConcreteState, EvalCache, EvalError, ExprDag, ExprId, Value};
use crate::frontend::NodeId;
use crate::simplify::{FeasResult, FeasibilityChecker, Literal};
use crate::symexec::ContractedPath;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum AddError {
    #[error("conflicting paths from cut point {0:?}: ⊤ reached after joining")]
    TopEmerged(NodeId),
    #[error("decision diagram exceeds {0} nodes")]
    TooLarge(usize),
    #[error("no defined behaviour: ⊥ reached")]
    Bottom,
    #[error("⊤ reached during evaluation")]
    Top,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Handle of a node inside an [`AddManager`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeRef(u32);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    Terminal(LatticeElem),
    Decision { level: u32, lo: NodeRef, hi: NodeRef },
}

/// Arena of reduced ordered decision diagrams sharing one predicate order.
#[derive(Debug)]
pub struct AddManager {
    order: PredOrder,
    nodes: Vec<Node>,
    unique: HashMap<Node, NodeRef>,
    join_memo: HashMap<(NodeRef, NodeRef), NodeRef>,
    /// Feasibility queries allowed per elimination pass.
    pub elim_budget: usize,
    /// Arena size beyond which construction is abandoned.
    pub max_nodes: usize,
    overflow: bool,
}

pub const DEFAULT_MAX_NODES: usize = 1 << 18;

impl AddManager {
    pub fn new(order: PredOrder) -> Self {
        AddManager {
            order,
            nodes: Vec::new(),
            unique: HashMap::new(),
            join_memo: HashMap::new(),
            elim_budget: 20_000,
            max_nodes: DEFAULT_MAX_NODES,
            overflow: false,
        }
    }

    pub fn order(&self) -> &PredOrder {
        &self.order
    }

    fn intern(&mut self, n: Node) -> NodeRef {
        if let Some(&r) = self.unique.get(&n) {
            return r;
        }
        if self.nodes.len() >= self.max_nodes {
            // results are meaningless from here on; callers check `overflowed`
            self.overflow = true;
            return NodeRef(0);
        }
        let r = NodeRef(self.nodes.len() as u32);
        self.nodes.push(n.clone());
        self.unique.insert(n, r);
        r
    }

    pub fn terminal(&mut self, e: LatticeElem) -> NodeRef {
        self.intern(Node::Terminal(e))
    }

    pub fn bot(&mut self) -> NodeRef {
        self.terminal(LatticeElem::Bot)
    }

    /// Reduced node constructor.
    pub fn mk(&mut self, level: u32, lo: NodeRef, hi: NodeRef) -> NodeRef {
        if lo == hi {
            return lo;
        }
        debug_assert!(self.level(lo) > level && self.level(hi) > level, "order violated");
        self.intern(Node::Decision { level, lo, hi })
    }

    /// True once the node budget has been exceeded.
    pub fn overflowed(&self) -> bool {
        self.overflow
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn level(&self, r: NodeRef) -> u32 {
        match self.nodes[r.0 as usize] {
            Node::Terminal(_) => u32::MAX,
            Node::Decision { level, .. } => level,
        }
    }

    fn node(&self, r: NodeRef) -> &Node {
        &self.nodes[r.0 as usize]
    }

    pub fn elem(&self, r: NodeRef) -> Option<&LatticeElem> {
        match self.node(r) {
            Node::Terminal(e) => Some(e),
            Node::Decision { .. } => None,
        }
    }

    /// Diagram of a single path: the condition's BDD with 1 ↦ leaf and 0 ↦ ⊥.
    pub fn path_to_add(&mut self, p: &ContractedPath) -> NodeRef {
        let mut lits: Vec<(u32, bool)> = p
            .literals
            .iter()
            .map(|l| {
                let level = self.order.level(l.lit.ap).expect("AP missing from order");
                (level, l.lit.positive)
            })
            .collect();
        lits.sort();
        lits.dedup();
        if lits.windows(2).any(|w| w[0].0 == w[1].0) {
            return self.bot();
        }
        let bot = self.bot();
        let mut cur = self.terminal(LatticeElem::leaf(p.target, p.state.clone()));
        for &(level, positive) in lits.iter().rev() {
            cur = if positive {
                self.mk(level, bot, cur)
            } else {
                self.mk(level, cur, bot)
            };
        }
        cur
    }

    /// Pointwise supremum.
    pub fn join(&mut self, a: NodeRef, b: NodeRef) -> NodeRef {
        if a == b || self.overflow {
            return a;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        if let Some(&r) = self.join_memo.get(&key) {
            return r;
        }
        let r = match (self.node(a).clone(), self.node(b).clone()) {
            (Node::Terminal(LatticeElem::Bot), _) => b,
            (_, Node::Terminal(LatticeElem::Bot)) => a,
            (Node::Terminal(x), Node::Terminal(y)) => self.terminal(x.join(&y)),
            _ => {
                let level = self.level(a).min(self.level(b));
                let (a0, a1) = self.cofactors(a, level);
                let (b0, b1) = self.cofactors(b, level);
                let lo = self.join(a0, b0);
                let hi = self.join(a1, b1);
                self.mk(level, lo, hi)
            }
        };
        self.join_memo.insert(key, r);
        r
    }

    fn cofactors(&self, r: NodeRef, level: u32) -> (NodeRef, NodeRef) {
        match *self.node(r) {
            Node::Decision { level: l, lo, hi } if l == level => (lo, hi),
            _ => (r, r),
        }
    }

    /// Joins the diagrams of all paths leaving one cut point. ⊤ must not
    /// appear: the path conditions of one fragment are disjoint.
    pub fn aggregate(&mut self, u: NodeId, paths: &[ContractedPath]) -> Result<NodeRef, AddError> {
        let mut acc = self.bot();
        for p in paths {
            let d = self.path_to_add(p);
            acc = self.join(acc, d);
            if self.overflow {
                return Err(AddError::TooLarge(self.max_nodes));
            }
        }
        if self.reaches(acc, |e| *e == LatticeElem::Top) {
            return Err(AddError::TopEmerged(u));
        }
        Ok(acc)
    }

    pub fn reaches(&self, root: NodeRef, pred: impl Fn(&LatticeElem) -> bool) -> bool {
        self.reachable(root)
            .into_iter()
            .any(|r| self.elem(r).is_some_and(&pred))
    }

    fn reachable(&self, root: NodeRef) -> Vec<NodeRef> {
        let mut seen = HashMap::new();
        let mut stack = vec![root];
        let mut out = Vec::new();
        while let Some(r) = stack.pop() {
            if seen.insert(r, ()).is_some() {
                continue;
            }
            out.push(r);
            if let Node::Decision { lo, hi, .. } = *self.node(r) {
                stack.push(lo);
                stack.push(hi);
            }
        }
        out
    }

    /// Redirects every edge whose literal context is unsatisfiable to its
    /// sibling. Decisions whose outcome is implied by the context disappear.
    pub fn eliminate_infeasible(
        &mut self,
        root: NodeRef,
        dag: &ExprDag,
        feas: &dyn FeasibilityChecker,
    ) -> Result<NodeRef, AddError> {
        let mut memo = HashMap::new();
        let mut budget = self.elim_budget;
        let out = self.elim(root, &mut Vec::new(), dag, feas, &mut memo, &mut budget)?;
        if self.overflow {
            return Err(AddError::TooLarge(self.max_nodes));
        }
        Ok(out)
    }

    fn elim(
        &mut self,
        r: NodeRef,
        ctx: &mut Vec<Literal>,
        dag: &ExprDag,
        feas: &dyn FeasibilityChecker,
        memo: &mut HashMap<(NodeRef, Vec<Literal>), NodeRef>,
        budget: &mut usize,
    ) -> Result<NodeRef, AddError> {
        let Node::Decision { level, lo, hi } = *self.node(r) else {
            return Ok(r);
        };
        let mut key_ctx = ctx.clone();
        key_ctx.sort();
        let key = (r, key_ctx);
        if let Some(&out) = memo.get(&key) {
            return Ok(out);
        }
        let ap = self.order.ap(level);
        let mut feasible = |ctx: &mut Vec<Literal>, positive: bool| {
            if *budget == 0 {
                return true;
            }
            *budget -= 1;
            ctx.push(Literal::new(ap, positive));
            let res = feas.check(dag, ctx);
            ctx.pop();
            res != FeasResult::Unsat
        };
        // the context itself is feasible, so one side always is
        let hi_ok = feasible(ctx, true);
        let lo_ok = !hi_ok || feasible(ctx, false);
        let out = match (lo_ok, hi_ok) {
            (_, false) => self.elim_under(lo, ap, false, ctx, dag, feas, memo, budget)?,
            (false, true) => self.elim_under(hi, ap, true, ctx, dag, feas, memo, budget)?,
            _ => {
                let lo = self.elim_under(lo, ap, false, ctx, dag, feas, memo, budget)?;
                let hi = self.elim_under(hi, ap, true, ctx, dag, feas, memo, budget)?;
                self.mk(level, lo, hi)
            }
        };
        memo.insert(key, out);
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn elim_under(
        &mut self,
        r: NodeRef,
        ap: ExprId,
        positive: bool,
        ctx: &mut Vec<Literal>,
        dag: &ExprDag,
        feas: &dyn FeasibilityChecker,
        memo: &mut HashMap<(NodeRef, Vec<Literal>), NodeRef>,
        budget: &mut usize,
    ) -> Result<NodeRef, AddError> {
        ctx.push(Literal::new(ap, positive));
        let out = self.elim(r, ctx, dag, feas, memo, budget);
        ctx.pop();
        out
    }

    /// Replaces every decision with a ⊥ child by its other child. Only sound
    /// when the ⊥ regions are known to be unreachable.
    pub fn dissolve_bottom(&mut self, root: NodeRef) -> NodeRef {
        let mut memo = HashMap::new();
        self.dissolve(root, &mut memo)
    }

    fn dissolve(&mut self, r: NodeRef, memo: &mut HashMap<NodeRef, NodeRef>) -> NodeRef {
        let Node::Decision { level, lo, hi } = *self.node(r) else {
            return r;
        };
        if let Some(&out) = memo.get(&r) {
            return out;
        }
        let lo = self.dissolve(lo, memo);
        let hi = self.dissolve(hi, memo);
        let is_bot = |m: &Self, x: NodeRef| matches!(m.node(x), Node::Terminal(LatticeElem::Bot));
        let out = if is_bot(self, lo) {
            hi
        } else if is_bot(self, hi) {
            lo
        } else {
            self.mk(level, lo, hi)
        };
        memo.insert(r, out);
        out
    }

    /// Copies the diagram below `root` out of the arena, numbering nodes in
    /// depth-first post-order (low child first).
    pub fn extract(&self, root: NodeRef) -> Add {
        let mut index: HashMap<NodeRef, u32> = HashMap::new();
        let mut nodes = Vec::new();
        let mut stack = vec![(root, false)];
        while let Some((r, expanded)) = stack.pop() {
            if index.contains_key(&r) {
                continue;
            }
            match self.node(r) {
                Node::Terminal(e) => {
                    index.insert(r, nodes.len() as u32);
                    nodes.push(AddNode::Terminal(e.clone()));
                }
                Node::Decision { level, lo, hi } => {
                    if expanded {
                        index.insert(r, nodes.len() as u32);
                        nodes.push(AddNode::Decision {
                            ap: self.order.ap(*level),
                            level: *level,
                            lo: index[lo],
                            hi: index[hi],
                        });
                    } else {
                        stack.push((r, true));
                        stack.push((*hi, false));
                        stack.push((*lo, false));
                    }
                }
            }
        }
        Add {
            aps: self.order.aps().to_vec(),
            root: index[&root],
            nodes,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AddNode {
    Terminal(LatticeElem),
    Decision { ap: ExprId, level: u32, lo: u32, hi: u32 },
}

/// A standalone reduced ordered diagram. Children precede their parents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Add {
    pub aps: Vec<ExprId>,
    pub nodes: Vec<AddNode>,
    pub root: u32,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AddStats {
    pub decisions: usize,
    pub terminals: usize,
    /// Longest root-to-terminal path, in decisions.
    pub depth: usize,
}

impl Add {
    pub fn terminal(e: LatticeElem) -> Add {
        Add {
            aps: Vec::new(),
            nodes: vec![AddNode::Terminal(e)],
            root: 0,
        }
    }

    /// Rewrites every AP and right-hand side through `f`.
    pub fn map_exprs(&self, mut f: impl FnMut(ExprId) -> ExprId) -> Add {
        let elem = |e: &LatticeElem, f: &mut dyn FnMut(ExprId) -> ExprId| match e {
            LatticeElem::Leaf(l) => LatticeElem::leaf(l.target, l.state.map_exprs(f)),
            other => other.clone(),
        };
        Add {
            aps: self.aps.iter().map(|&a| f(a)).collect(),
            nodes: self
                .nodes
                .iter()
                .map(|n| match n {
                    AddNode::Terminal(e) => AddNode::Terminal(elem(e, &mut f)),
                    AddNode::Decision { ap, level, lo, hi } => AddNode::Decision {
                        ap: f(*ap),
                        level: *level,
                        lo: *lo,
                        hi: *hi,
                    },
                })
                .collect(),
            root: self.root,
        }
    }

    /// Every expression the diagram refers to.
    pub fn exprs(&self) -> impl Iterator<Item = ExprId> + '_ {
        let rhs = self.nodes.iter().flat_map(|n| -> Vec<ExprId> {
            match n {
                AddNode::Terminal(LatticeElem::Leaf(l)) => l.state.iter().map(|(_, e)| e).collect(),
                _ => Vec::new(),
            }
        });
        self.aps.iter().copied().chain(rhs)
    }

    pub fn node(&self, i: u32) -> &AddNode {
        &self.nodes[i as usize]
    }

    /// Follows the decisions under `st`, evaluating APs through `memo`.
    /// Every visited decision costs one jump plus its AP's evaluation cost.
    pub fn evaluate(
        &self,
        dag: &ExprDag,
        st: &ConcreteState,
        memo: &mut EvalCache,
        cost: &mut CostReport,
    ) -> Result<&Leaf, AddError> {
        let mut i = self.root;
        loop {
            match self.node(i) {
                AddNode::Terminal(LatticeElem::Leaf(l)) => return Ok(l),
                AddNode::Terminal(LatticeElem::Bot) => return Err(AddError::Bottom),
                AddNode::Terminal(LatticeElem::Top) => return Err(AddError::Top),
                AddNode::Decision { ap, lo, hi, .. } => {
                    let v = dag.eval(*ap, st, memo, cost)?;
                    cost.jump += 1;
                    i = match v {
                        Value::Bool(true) => *hi,
                        Value::Bool(false) => *lo,
                        Value::Int(_) => unreachable!("AP of integer sort"),
                    };
                }
            }
        }
    }

    /// Like [`Add::evaluate`] without memoization.
    pub fn evaluate_tree(&self, dag: &ExprDag, st: &ConcreteState, cost: &mut CostReport) -> Result<&Leaf, AddError> {
        let mut i = self.root;
        loop {
            match self.node(i) {
                AddNode::Terminal(LatticeElem::Leaf(l)) => return Ok(l),
                AddNode::Terminal(LatticeElem::Bot) => return Err(AddError::Bottom),
                AddNode::Terminal(LatticeElem::Top) => return Err(AddError::Top),
                AddNode::Decision { ap, lo, hi, .. } => {
                    let v = dag.eval_tree(*ap, st, cost)?;
                    cost.jump += 1;
                    i = if v.as_bool().expect("AP of Boolean sort") {
                        *hi
                    } else {
                        *lo
                    };
                }
            }
        }
    }

    /// Terminal reached under a truth assignment of the APs.
    pub fn lookup(&self, value: impl Fn(ExprId) -> bool) -> &LatticeElem {
        let mut i = self.root;
        loop {
            match self.node(i) {
                AddNode::Terminal(e) => return e,
                AddNode::Decision { ap, lo, hi, .. } => i = if value(*ap) { *hi } else { *lo },
            }
        }
    }

    pub fn stats(&self) -> AddStats {
        let mut depth = vec![0usize; self.nodes.len()];
        let mut s = AddStats::default();
        for (i, n) in self.nodes.iter().enumerate() {
            match n {
                AddNode::Terminal(_) => s.terminals += 1,
                AddNode::Decision { lo, hi, .. } => {
                    s.decisions += 1;
                    depth[i] = 1 + depth[*lo as usize].max(depth[*hi as usize]);
                }
            }
        }
        s.depth = depth[self.root as usize];
        s
    }

    /// Fewest decisions on any path from the root to a terminal satisfying `pred`.
    pub fn min_decisions_to(&self, pred: impl Fn(&LatticeElem) -> bool) -> Option<usize> {
        let mut best: Vec<Option<usize>> = vec![None; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            best[i] = match n {
                AddNode::Terminal(e) => pred(e).then_some(0),
                AddNode::Decision { lo, hi, .. } => {
                    let (a, b) = (best[*lo as usize], best[*hi as usize]);
                    match (a, b) {
                        (Some(a), Some(b)) => Some(1 + a.min(b)),
                        (Some(x), None) | (None, Some(x)) => Some(1 + x),
                        (None, None) => None,
                    }
                }
            };
        }
        best[self.root as usize]
    }

    pub fn contains(&self, pred: impl Fn(&LatticeElem) -> bool) -> bool {
        self.nodes.iter().any(|n| matches!(n, AddNode::Terminal(e) if pred(e)))
    }

    /// Ordered, reduced and free of duplicate nodes.
    pub fn check_invariants(&self) -> Result<(), String> {
        let level = |i: u32| match self.node(i) {
            AddNode::Terminal(_) => u32::MAX,
            AddNode::Decision { level, .. } => *level,
        };
        let mut seen = HashMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(j) = seen.insert(n, i) {
                return Err(format!("nodes {j} and {i} are equal"));
            }
            if let AddNode::Decision { ap, level: l, lo, hi } = n {
                if lo == hi {
                    return Err(format!("node {i} has equal children"));
                }
                if level(*lo) <= *l || level(*hi) <= *l {
                    return Err(format!("node {i} breaks the variable order"));
                }
                if self.aps.get(*l as usize) != Some(ap) {
                    return Err(format!("node {i} has the wrong AP for its level"));
                }
            }
        }
        Ok(())
    }
}
