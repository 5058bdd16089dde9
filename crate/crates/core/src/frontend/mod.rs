//! Parsing, program graphs and cut points.

mod ast;
mod graph;
mod parse;

pub use ast::{unparse, Program, Stmt};
pub use graph::{
    build_program_graph, cuts_break_all_cycles, literal_text, select_cut_points, Action, CutPointSet, CutStrategy,
    Edge, EdgeLabel, LoopInfo, NodeId, ProgramGraph, Succ,
};
pub use parse::{parse_program, ParseError, ParseErrorKind};
