//! Algebraic decision diagrams over the flat lattice of fragment outcomes.

mod lattice;
mod manager;
mod order;

pub use lattice::{LatticeElem, Leaf};
pub use manager::{Add, AddError, AddManager, AddNode, AddStats, NodeRef};
pub use order::{choose_order, occurrence, OrderStrategy, PredOrder};
