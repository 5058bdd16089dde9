//! Graphviz output for diagrams and the expression table.

use std::fmt::Write as _;

use crate::add::{Add, AddNode, LatticeElem};
use crate::compile::CompiledProgram;
use crate::exprdag::{ExprDag, ExprNode};
use crate::frontend::NodeId;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn terminal_label(p: &CompiledProgram, e: &LatticeElem) -> String {
    match e {
        LatticeElem::Bot => "⊥".into(),
        LatticeElem::Top => "⊤".into(),
        LatticeElem::Leaf(l) => {
            let mut s = p.name(l.target).to_string();
            for (v, x) in l.state.iter() {
                let _ = write!(
                    s,
                    "\\n{} := {}",
                    escape(p.dag.var_name(v)),
                    escape(&p.dag.show(x).to_string())
                );
            }
            s
        }
    }
}

/// Decision nodes are ellipses with low edges dashed and high edges solid;
/// terminals are boxes.
pub fn add_dot(p: &CompiledProgram, u: NodeId) -> Option<String> {
    let add: &Add = p.adds.get(&u)?;
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"add_{}\" {{", escape(p.name(u)));
    let _ = writeln!(out, "  node [fontname=\"monospace\"];");
    for (i, n) in add.nodes.iter().enumerate() {
        match n {
            AddNode::Terminal(e) => {
                let _ = writeln!(out, "  n{i} [shape=box, label=\"{}\"];", terminal_label(p, e));
            }
            AddNode::Decision { ap, lo, hi, .. } => {
                let label = escape(&p.dag.show(*ap).to_string());
                let _ = writeln!(out, "  n{i} [shape=ellipse, label=\"{label}\"];");
                let _ = writeln!(out, "  n{i} -> n{lo} [style=dashed];");
                let _ = writeln!(out, "  n{i} -> n{hi};");
            }
        }
    }
    let _ = writeln!(out, "}}");
    Some(out)
}

/// One node per expression; operand edges are labelled by position.
pub fn ed_dot(dag: &ExprDag) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph ed {{");
    let _ = writeln!(out, "  node [fontname=\"monospace\"];");
    for e in dag.ids() {
        let i = e.index();
        let (label, shape) = match dag.node(e) {
            ExprNode::Const(c) => (c.to_string(), "plaintext"),
            ExprNode::Var(v) => (dag.var_name(*v).to_string(), "plaintext"),
            ExprNode::Bool(b) => (b.to_string(), "plaintext"),
            ExprNode::Arith(op, ..) => (op.symbol().to_string(), "circle"),
            ExprNode::Cmp(op, ..) => (op.symbol().to_string(), "circle"),
            ExprNode::Logic(op, ..) => (op.symbol().to_string(), "circle"),
            ExprNode::Not(_) => ("!".to_string(), "circle"),
        };
        let _ = writeln!(out, "  e{i} [shape={shape}, label=\"{}\"];", escape(&label));
        let children: Vec<_> = dag.node(e).children().collect();
        for (k, c) in children.iter().enumerate() {
            if children.len() == 1 {
                let _ = writeln!(out, "  e{i} -> e{};", c.index());
            } else {
                let _ = writeln!(out, "  e{i} -> e{} [label=\"{k}\"];", c.index());
            }
        }
    }
    let _ = writeln!(out, "}}");
    out
}
