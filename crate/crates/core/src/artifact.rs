//! `.aggc.json`: serialized compiled programs.
//!
//! Expressions are listed children-first and referenced by position. Cut
//! points keep their program-graph numbers.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::add::{Add, AddNode, LatticeElem};
use crate::compile::{CompileConfig, CompileStats, CompiledProgram};
use crate::exprdag::{ArithOp, CmpOp, ExprDag, ExprId, ExprNode, LogicOp, SymbolicState, VarId};
use crate::frontend::{CutPointSet, NodeId};

pub const FORMAT: &str = "aggc";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("malformed artifact: {0}")]
    Json(#[from] serde_json::Error),
    #[error("not an aggc artifact or unsupported version (found `{format}` v{version})")]
    Version { format: String, version: u32 },
    #[error("malformed artifact: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Expr {
    Const(String),
    Var(u32),
    Bool(bool),
    Op { op: String, args: Vec<u32> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Node {
    Bot,
    Top,
    Leaf { target: u32, assign: Vec<(u32, u32)> },
    Decision { level: u32, lo: u32, hi: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Diagram {
    cut: u32,
    aps: Vec<u32>,
    root: u32,
    nodes: Vec<Node>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Artifact {
    format: String,
    version: u32,
    config: CompileConfig,
    vars: Vec<String>,
    inputs: Vec<u32>,
    exprs: Vec<Expr>,
    cuts: Vec<(u32, String)>,
    st: u32,
    te: u32,
    diagrams: Vec<Diagram>,
    stats: CompileStats,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

fn op_name(n: &ExprNode) -> &'static str {
    match n {
        ExprNode::Arith(op, ..) => op.symbol(),
        ExprNode::Cmp(op, ..) => op.symbol(),
        ExprNode::Logic(op, ..) => op.symbol(),
        ExprNode::Not(_) => "!",
        _ => unreachable!("leaf node"),
    }
}

pub fn to_json(p: &CompiledProgram) -> String {
    let id = |e: ExprId| e.index() as u32;
    let exprs = p
        .dag
        .ids()
        .map(|e| match p.dag.node(e) {
            ExprNode::Const(c) => Expr::Const(c.to_string()),
            ExprNode::Var(v) => Expr::Var(v.index() as u32),
            ExprNode::Bool(b) => Expr::Bool(*b),
            n => Expr::Op {
                op: op_name(n).to_string(),
                args: n.children().map(id).collect(),
            },
        })
        .collect();
    let diagrams = p
        .adds
        .iter()
        .map(|(u, a)| Diagram {
            cut: u.0,
            aps: a.aps.iter().map(|&e| id(e)).collect(),
            root: a.root,
            nodes: a
                .nodes
                .iter()
                .map(|n| match n {
                    AddNode::Terminal(LatticeElem::Bot) => Node::Bot,
                    AddNode::Terminal(LatticeElem::Top) => Node::Top,
                    AddNode::Terminal(LatticeElem::Leaf(l)) => Node::Leaf {
                        target: l.target.0,
                        assign: l.state.iter().map(|(v, e)| (v.index() as u32, id(e))).collect(),
                    },
                    AddNode::Decision { level, lo, hi, .. } => Node::Decision {
                        level: *level,
                        lo: *lo,
                        hi: *hi,
                    },
                })
                .collect(),
        })
        .collect();
    let a = Artifact {
        format: FORMAT.into(),
        version: VERSION,
        config: p.config,
        vars: p.dag.var_names().to_vec(),
        inputs: p.inputs.iter().map(|v| v.index() as u32).collect(),
        exprs,
        cuts: p.names.iter().map(|(u, n)| (u.0, n.clone())).collect(),
        st: p.st.0,
        te: p.te.0,
        diagrams,
        stats: p.stats.clone(),
    };
    serde_json::to_string_pretty(&a).expect("artifact serializes") + "\n"
}

fn invalid(msg: impl Into<String>) -> ArtifactError {
    ArtifactError::Invalid(msg.into())
}

pub fn from_json(text: &str) -> Result<CompiledProgram, ArtifactError> {
    let h: Header = serde_json::from_str(text)?;
    if h.format != FORMAT || h.version != VERSION {
        return Err(ArtifactError::Version {
            format: h.format,
            version: h.version,
        });
    }
    let a: Artifact = serde_json::from_str(text)?;
    let mut dag = ExprDag::new();
    let vars: Vec<VarId> = a.vars.iter().map(|n| dag.var_id(n)).collect();
    let var = |i: u32| {
        vars.get(i as usize)
            .copied()
            .ok_or_else(|| invalid(format!("unknown variable {i}")))
    };
    let mut ids: Vec<ExprId> = Vec::with_capacity(a.exprs.len());
    for (i, e) in a.exprs.iter().enumerate() {
        let arg = |k: &u32| {
            ids.get(*k as usize)
                .copied()
                .ok_or_else(|| invalid(format!("expression {i} refers forward to {k}")))
        };
        let node = match e {
            Expr::Const(c) => ExprNode::Const(
                c.parse::<BigInt>()
                    .map_err(|_| invalid(format!("bad constant `{c}`")))?,
            ),
            Expr::Var(v) => ExprNode::Var(var(*v)?),
            Expr::Bool(b) => ExprNode::Bool(*b),
            Expr::Op { op, args } => {
                let args = args.iter().map(arg).collect::<Result<Vec<_>, _>>()?;
                match (op.as_str(), &args[..]) {
                    ("+", &[l, r]) => ExprNode::Arith(ArithOp::Add, l, r),
                    ("-", &[l, r]) => ExprNode::Arith(ArithOp::Sub, l, r),
                    ("*", &[l, r]) => ExprNode::Arith(ArithOp::Mul, l, r),
                    ("/", &[l, r]) => ExprNode::Arith(ArithOp::Div, l, r),
                    ("<", &[l, r]) => ExprNode::Cmp(CmpOp::Lt, l, r),
                    ("==", &[l, r]) => ExprNode::Cmp(CmpOp::Eq, l, r),
                    ("&&", &[l, r]) => ExprNode::Logic(LogicOp::And, l, r),
                    ("||", &[l, r]) => ExprNode::Logic(LogicOp::Or, l, r),
                    ("!", &[x]) => ExprNode::Not(x),
                    _ => return Err(invalid(format!("bad operator `{op}` in expression {i}"))),
                }
            }
        };
        ids.push(dag.intern(node));
    }
    let expr = |i: u32| {
        ids.get(i as usize)
            .copied()
            .ok_or_else(|| invalid(format!("unknown expression {i}")))
    };
    let mut adds = BTreeMap::new();
    for d in &a.diagrams {
        let aps = d.aps.iter().map(|&i| expr(i)).collect::<Result<Vec<_>, _>>()?;
        let mut nodes = Vec::with_capacity(d.nodes.len());
        for n in &d.nodes {
            nodes.push(match n {
                Node::Bot => AddNode::Terminal(LatticeElem::Bot),
                Node::Top => AddNode::Terminal(LatticeElem::Top),
                Node::Leaf { target, assign } => {
                    let mut state = SymbolicState::identity();
                    for &(v, e) in assign {
                        state.set(&dag, var(v)?, expr(e)?);
                    }
                    AddNode::Terminal(LatticeElem::leaf(NodeId(*target), state))
                }
                Node::Decision { level, lo, hi } => {
                    let ap = aps
                        .get(*level as usize)
                        .copied()
                        .ok_or_else(|| invalid("level out of range"))?;
                    if *lo as usize >= nodes.len() || *hi as usize >= nodes.len() {
                        return Err(invalid("child listed after its parent"));
                    }
                    AddNode::Decision {
                        ap,
                        level: *level,
                        lo: *lo,
                        hi: *hi,
                    }
                }
            });
        }
        if d.root as usize >= nodes.len() {
            return Err(invalid("root out of range"));
        }
        adds.insert(
            NodeId(d.cut),
            Add {
                aps,
                nodes,
                root: d.root,
            },
        );
    }
    let p = CompiledProgram {
        dag,
        cuts: CutPointSet::from_nodes(a.cuts.iter().map(|(u, _)| NodeId(*u)).collect()),
        names: a.cuts.into_iter().map(|(u, n)| (NodeId(u), n)).collect(),
        adds,
        st: NodeId(a.st),
        te: NodeId(a.te),
        inputs: a.inputs.iter().map(|&v| var(v)).collect::<Result<_, _>>()?,
        config: a.config,
        stats: a.stats,
    };
    p.check().map_err(ArtifactError::Invalid)?;
    Ok(p)
}
