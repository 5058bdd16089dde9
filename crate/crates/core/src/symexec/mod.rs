//! Concrete and symbolic execution over program graphs.

mod concrete;
mod lockstep;
mod paths;

use thiserror::Error;

use crate::exprdag::EvalError;

pub use concrete::{run_concrete, run_structural};
pub use lockstep::{render_trace, run_lockstep, BranchPolicy, LockstepEnd, LockstepError, LockstepTrace, SosConfig};
pub use paths::{decompose, enumerate_paths, ContractedPath, EnumConfig, EnumError, PathLiteral};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ExecError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("step budget of {0} exhausted")]
    Budget(u64),
    #[error("no defined behaviour at cut point {0}")]
    Undefined(String),
}
