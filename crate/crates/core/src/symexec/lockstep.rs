use std::fmt::Write as _;

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::exprdag::{ConcreteState, EvalError, ExprDag, ExprId, SymbolicState, Value};
use crate::frontend::{Action, CutPointSet, NodeId, ProgramGraph, Succ};

/// One configuration of the combined concrete/symbolic semantics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SosConfig {
    pub node: NodeId,
    /// Whether the concrete run agrees with the branches taken so far.
    pub c: bool,
    /// Path condition over the state at the last cut point.
    pub c_h: ExprId,
    pub sigma: ConcreteState,
    pub sigma_h: SymbolicState,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LockstepEnd {
    Terminated,
    Budget,
    RuntimeError(EvalError),
}

#[derive(Clone, Debug)]
pub struct LockstepTrace {
    pub steps: Vec<SosConfig>,
    pub end: LockstepEnd,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum LockstepError {
    #[error("step {step} at node {node}: {what}")]
    Violation { step: usize, node: String, what: String },
}

/// How branches are chosen.
pub enum BranchPolicy<'a> {
    /// Follow the concrete outcome.
    Concrete,
    /// Take the other branch with the given probability; `c` then turns false.
    Perturbed(&'a mut dyn RngCore, f64),
}

/// Runs the concrete and symbolic components side by side, checking after
/// every step that `c = ⟦c_H⟧(σ₀)` and `σ = ⟦σ_H⟧(σ₀)`, where `σ₀` is the
/// concrete state at the most recent cut point. Symbolic components restart
/// at every cut point.
pub fn run_lockstep(
    dag: &mut ExprDag,
    g: &ProgramGraph,
    cuts: &CutPointSet,
    input: &ConcreteState,
    budget: usize,
    mut policy: BranchPolicy<'_>,
) -> Result<LockstepTrace, LockstepError> {
    let tt = dag.boolean(true);
    let mut cfg = SosConfig {
        node: g.st(),
        c: true,
        c_h: tt,
        sigma: input.clone(),
        sigma_h: SymbolicState::identity(),
    };
    let mut entry = input.clone();
    let mut steps = vec![cfg.clone()];
    check(dag, &entry, &cfg, 0, g)?;
    let end = loop {
        if steps.len() > budget {
            break LockstepEnd::Budget;
        }
        let step = steps.len();
        match g.succ(cfg.node) {
            Succ::Exit => break LockstepEnd::Terminated,
            Succ::Action(Action::Skip, to) => cfg.node = to,
            Succ::Action(Action::Assign(v, e), to) => {
                let value = match dag.value(e, &cfg.sigma) {
                    Ok(Value::Int(x)) => x,
                    Ok(Value::Bool(_)) => unreachable!(),
                    Err(err) => break LockstepEnd::RuntimeError(err),
                };
                let rhs = dag.substitute(e, &cfg.sigma_h);
                check_expr(dag, &entry, e, rhs, &cfg.sigma, step, g, cfg.node)?;
                cfg.sigma.set(v, value);
                cfg.sigma_h.set(dag, v, rhs);
                cfg.node = to;
            }
            Succ::Branch { cond, then, other } => {
                let b = match dag.value(cond, &cfg.sigma) {
                    Ok(Value::Bool(b)) => b,
                    Ok(Value::Int(_)) => unreachable!(),
                    Err(err) => break LockstepEnd::RuntimeError(err),
                };
                let b_h = dag.substitute(cond, &cfg.sigma_h);
                check_expr(dag, &entry, cond, b_h, &cfg.sigma, step, g, cfg.node)?;
                let taken = match &mut policy {
                    BranchPolicy::Concrete => b,
                    BranchPolicy::Perturbed(rng, p) => {
                        if rng.random_bool(*p) {
                            !b
                        } else {
                            b
                        }
                    }
                };
                let lit = if taken { b_h } else { dag.not(b_h) };
                cfg.c_h = if cfg.c_h == tt { lit } else { dag.and(cfg.c_h, lit) };
                cfg.c = cfg.c && taken == b;
                cfg.node = if taken { then } else { other };
            }
        }
        check(dag, &entry, &cfg, step, g)?;
        steps.push(cfg.clone());
        if cuts.contains(cfg.node) {
            entry = cfg.sigma.clone();
            cfg.c = true;
            cfg.c_h = tt;
            cfg.sigma_h = SymbolicState::identity();
        }
    };
    Ok(LockstepTrace { steps, end })
}

fn violation(step: usize, g: &ProgramGraph, node: NodeId, what: String) -> LockstepError {
    LockstepError::Violation {
        step,
        node: g.name(node),
        what,
    }
}

fn check(
    dag: &ExprDag,
    entry: &ConcreteState,
    cfg: &SosConfig,
    step: usize,
    g: &ProgramGraph,
) -> Result<(), LockstepError> {
    match dag.value(cfg.c_h, entry) {
        Ok(Value::Bool(b)) if b == cfg.c => {}
        other => {
            return Err(violation(
                step,
                g,
                cfg.node,
                format!("c = {} but c_H = {} gives {other:?}", cfg.c, dag.show(cfg.c_h)),
            ))
        }
    }
    let after = entry
        .apply(dag, &cfg.sigma_h)
        .map_err(|e| violation(step, g, cfg.node, format!("σ_H not evaluable: {e}")))?;
    if after != cfg.sigma {
        return Err(violation(
            step,
            g,
            cfg.node,
            format!("σ = {:?} but ⟦σ_H⟧(σ₀) = {:?}", cfg.sigma.named(dag), after.named(dag)),
        ));
    }
    Ok(())
}

/// Expression-level substitution lemma: `⟦t⟧(σ) = ⟦t[σ_H]⟧(σ₀)`.
#[allow(clippy::too_many_arguments)]
fn check_expr(
    dag: &ExprDag,
    entry: &ConcreteState,
    t: ExprId,
    t_h: ExprId,
    sigma: &ConcreteState,
    step: usize,
    g: &ProgramGraph,
    node: NodeId,
) -> Result<(), LockstepError> {
    let a = dag.value(t, sigma);
    let b = dag.value(t_h, entry);
    if a != b {
        return Err(violation(
            step,
            g,
            node,
            format!("{} evaluates to {a:?} but {} to {b:?}", dag.show(t), dag.show(t_h)),
        ));
    }
    Ok(())
}

/// Text dump, one configuration per line.
pub fn render_trace(dag: &ExprDag, g: &ProgramGraph, trace: &LockstepTrace) -> String {
    let mut out = String::new();
    for (i, s) in trace.steps.iter().enumerate() {
        let sigma: Vec<String> = s
            .sigma
            .named(dag)
            .into_iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        let _ = writeln!(
            out,
            "{i:>4} {:>3} c={} c_H={} σ={{{}}} σ_H={}",
            g.name(s.node),
            s.c,
            dag.show(s.c_h),
            sigma.join(", "),
            s.sigma_h.show(dag)
        );
    }
    let _ = writeln!(out, "end: {:?}", trace.end);
    out
}
