use std::fmt;

use crate::exprdag::{ExprDag, SymbolicState};
use crate::frontend::{NodeId, ProgramGraph};

/// Successor cut point and the parallel assignment that leads there.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Leaf {
    pub target: NodeId,
    pub state: SymbolicState,
}

/// Flat lattice: ⊥ below every leaf, ⊤ above.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LatticeElem {
    Bot,
    Leaf(Leaf),
    Top,
}

impl LatticeElem {
    pub fn leaf(target: NodeId, state: SymbolicState) -> Self {
        LatticeElem::Leaf(Leaf { target, state })
    }

    pub fn as_leaf(&self) -> Option<&Leaf> {
        match self {
            LatticeElem::Leaf(l) => Some(l),
            _ => None,
        }
    }

    /// Supremum.
    pub fn join(&self, other: &LatticeElem) -> LatticeElem {
        match (self, other) {
            (LatticeElem::Bot, x) | (x, LatticeElem::Bot) => x.clone(),
            (a, b) if a == b => a.clone(),
            _ => LatticeElem::Top,
        }
    }

    pub fn show<'a>(&'a self, dag: &'a ExprDag, g: &'a ProgramGraph) -> impl fmt::Display + 'a {
        ShowElem { e: self, dag, g }
    }
}

struct ShowElem<'a> {
    e: &'a LatticeElem,
    dag: &'a ExprDag,
    g: &'a ProgramGraph,
}

impl fmt::Display for ShowElem<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.e {
            LatticeElem::Bot => f.write_str("⊥"),
            LatticeElem::Top => f.write_str("⊤"),
            LatticeElem::Leaf(l) => write!(f, "{} {}", self.g.name(l.target), l.state.show(self.dag)),
        }
    }
}
