pub mod add;
pub mod artifact;
pub mod compile;
pub mod cost;
pub mod dot;
pub mod exprdag;
pub mod frontend;
pub mod gen;
pub mod programs;
pub mod runtime;
pub mod simplify;
pub mod symexec;
