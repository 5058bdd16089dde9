use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exprdag::{ExprDag, ExprId, ExprNode, LogicOp, SymbolicState};
use crate::frontend::{Action, CutPointSet, NodeId, ProgramGraph, Succ};
use crate::simplify::{FeasResult, FeasibilityChecker, Literal, Normalizer};

/// A branch literal together with where it was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathLiteral {
    pub lit: Literal,
    /// Branch node of the program graph.
    pub origin: NodeId,
    /// Number of revisits of the source cut point before the branch.
    pub depth: u32,
}

/// One symbolic path between two cut points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractedPath {
    pub source: NodeId,
    pub literals: Vec<PathLiteral>,
    pub state: SymbolicState,
    pub target: NodeId,
}

impl ContractedPath {
    pub fn condition(&self) -> impl Iterator<Item = Literal> + '_ {
        self.literals.iter().map(|l| l.lit)
    }

    /// The path condition as one interned conjunction.
    pub fn condition_expr(&self, dag: &mut ExprDag) -> ExprId {
        let mut acc = dag.boolean(true);
        for l in &self.literals {
            let x = if l.lit.positive { l.lit.ap } else { dag.not(l.lit.ap) };
            acc = if matches!(dag.node(acc), ExprNode::Bool(true)) {
                x
            } else {
                dag.and(acc, x)
            };
        }
        acc
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumConfig {
    /// Revisits of the source cut point followed before a path must stop.
    pub unroll: u32,
    /// Upper bound on emitted plus pending paths.
    pub max_paths: usize,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig {
            unroll: 0,
            max_paths: 1 << 16,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EnumError {
    #[error("path explosion: more than {limit} contracted paths from cut point {from}")]
    TooManyPaths { from: String, limit: usize },
    #[error("cut point {0} has no outgoing fragment")]
    NoFragment(String),
}

struct Frame {
    node: NodeId,
    state: SymbolicState,
    literals: Vec<PathLiteral>,
    depth: u32,
    started: bool,
}

/// Depth-first symbolic execution from cut point `u`.
///
/// Paths stop at every cut point, except that revisits of `u` itself are
/// followed up to `config.unroll` times. Branch conditions are substituted,
/// optionally normalized, and split into disjoint cubes over their atomic
/// propositions. Prefixes that `feas` proves unsatisfiable are dropped.
pub fn enumerate_paths(
    dag: &mut ExprDag,
    g: &ProgramGraph,
    cuts: &CutPointSet,
    u: NodeId,
    config: &EnumConfig,
    feas: &dyn FeasibilityChecker,
    mut normalizer: Option<&mut Normalizer>,
) -> Result<Vec<ContractedPath>, EnumError> {
    if u == g.te() || !cuts.contains(u) {
        return Err(EnumError::NoFragment(g.name(u)));
    }
    let mut out = Vec::new();
    let mut stack = vec![Frame {
        node: u,
        state: SymbolicState::identity(),
        literals: Vec::new(),
        depth: 0,
        started: false,
    }];
    while let Some(mut f) = stack.pop() {
        loop {
            if f.started && cuts.contains(f.node) {
                if f.node == u && f.depth < config.unroll {
                    f.depth += 1;
                } else {
                    out.push(ContractedPath {
                        source: u,
                        literals: f.literals,
                        state: f.state,
                        target: f.node,
                    });
                    break;
                }
            }
            f.started = true;
            match g.succ(f.node) {
                Succ::Exit => unreachable!("te is always a cut point"),
                Succ::Action(Action::Skip, to) => f.node = to,
                Succ::Action(Action::Assign(v, e), to) => {
                    let mut rhs = dag.substitute(e, &f.state);
                    if let Some(n) = normalizer.as_deref_mut() {
                        rhs = n.normalize(dag, rhs);
                    }
                    f.state.set(dag, v, rhs);
                    f.node = to;
                }
                Succ::Branch { cond, then, other } => {
                    let mut b = dag.substitute(cond, &f.state);
                    if let Some(n) = normalizer.as_deref_mut() {
                        b = n.normalize(dag, b);
                    }
                    let known: HashMap<ExprId, bool> = f.literals.iter().map(|l| (l.lit.ap, l.lit.positive)).collect();
                    let cubes = decompose(dag, b, known);
                    let mut children = Vec::with_capacity(cubes.len());
                    for (cube, value) in cubes {
                        let mut literals = f.literals.clone();
                        literals.extend(cube.iter().map(|&lit| PathLiteral {
                            lit,
                            origin: f.node,
                            depth: f.depth,
                        }));
                        if !cube.is_empty() {
                            let lits: Vec<Literal> = literals.iter().map(|l| l.lit).collect();
                            if feas.check(dag, &lits) == FeasResult::Unsat {
                                continue;
                            }
                        }
                        children.push(Frame {
                            node: if value { then } else { other },
                            state: f.state.clone(),
                            literals,
                            depth: f.depth,
                            started: true,
                        });
                    }
                    stack.extend(children.into_iter().rev());
                    break;
                }
            }
        }
        if out.len() + stack.len() > config.max_paths {
            return Err(EnumError::TooManyPaths {
                from: g.name(u),
                limit: config.max_paths,
            });
        }
    }
    Ok(out)
}

/// Kleene evaluation of `e` under a partial AP assignment.
fn tri(dag: &ExprDag, e: ExprId, known: &HashMap<ExprId, bool>) -> Option<bool> {
    match dag.node(e) {
        ExprNode::Bool(b) => Some(*b),
        ExprNode::Cmp(..) => known.get(&e).copied(),
        ExprNode::Not(x) => tri(dag, *x, known).map(|b| !b),
        ExprNode::Logic(op, l, r) => {
            let (l, r) = (tri(dag, *l, known), tri(dag, *r, known));
            match op {
                LogicOp::And => match (l, r) {
                    (Some(false), _) | (_, Some(false)) => Some(false),
                    (Some(true), Some(true)) => Some(true),
                    _ => None,
                },
                LogicOp::Or => match (l, r) {
                    (Some(true), _) | (_, Some(true)) => Some(true),
                    (Some(false), Some(false)) => Some(false),
                    _ => None,
                },
            }
        }
        n => unreachable!("arithmetic node in condition: {n:?}"),
    }
}

/// First atomic proposition, left to right, inside an undecided subterm.
fn pick(dag: &ExprDag, e: ExprId, known: &HashMap<ExprId, bool>) -> ExprId {
    match dag.node(e) {
        ExprNode::Cmp(..) => e,
        ExprNode::Not(x) => pick(dag, *x, known),
        ExprNode::Logic(_, l, r) => {
            if tri(dag, *l, known).is_none() {
                pick(dag, *l, known)
            } else {
                pick(dag, *r, known)
            }
        }
        n => unreachable!("decided node has no open AP: {n:?}"),
    }
}

/// Splits a Boolean condition into disjoint AP cubes, each paired with the
/// condition's value on it. Literals already fixed in `known` are not repeated.
pub fn decompose(dag: &ExprDag, e: ExprId, mut known: HashMap<ExprId, bool>) -> Vec<(Vec<Literal>, bool)> {
    fn go(
        dag: &ExprDag,
        e: ExprId,
        known: &mut HashMap<ExprId, bool>,
        cube: &mut Vec<Literal>,
        out: &mut Vec<(Vec<Literal>, bool)>,
    ) {
        if let Some(v) = tri(dag, e, known) {
            out.push((cube.clone(), v));
            return;
        }
        let ap = pick(dag, e, known);
        for pol in [true, false] {
            known.insert(ap, pol);
            cube.push(Literal::new(ap, pol));
            go(dag, e, known, cube, out);
            cube.pop();
        }
        known.remove(&ap);
    }
    let mut out = Vec::new();
    go(dag, e, &mut known, &mut Vec::new(), &mut out);
    out
}
