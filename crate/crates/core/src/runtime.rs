//! Execution of aggregated programs and the cost sweep.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use num_bigint::BigInt;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::add::{AddError, OrderStrategy};
use crate::compile::{prepare, CompileConfig, CompiledProgram};
use crate::cost::CostReport;
use crate::exprdag::{ConcreteState, EvalCache, EvalError, Value};
use crate::frontend::{build_program_graph, Program};
use crate::symexec::run_concrete;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum RunError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("no defined behaviour at cut point {0}")]
    Bottom(String),
    #[error("⊤ reached at cut point {0}")]
    Top(String),
    #[error("step budget of {0} fragment steps exhausted")]
    Budget(u64),
    #[error("input variable `{0}` is not assigned")]
    MissingInput(String),
}

/// Lifetime of the evaluation memo.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MemoScope {
    /// One memo per fragment step, shared by the diagram walk and the
    /// parallel assignment.
    #[default]
    PerStep,
    /// Every operator occurrence is charged.
    None,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub budget: Option<u64>,
    pub memo: MemoScope,
}

/// Runs `p` cut point to cut point until `te`.
pub fn run_aggregated(
    p: &CompiledProgram,
    input: &ConcreteState,
    opts: RunOptions,
) -> Result<(ConcreteState, CostReport), RunError> {
    if let Some(v) = p.inputs.iter().find(|&&v| !input.contains(v)) {
        return Err(RunError::MissingInput(p.dag.var_name(*v).to_string()));
    }
    let mut st = input.clone();
    let mut cost = CostReport::default();
    let mut memo = EvalCache::new();
    let mut u = p.st;
    while u != p.te {
        if opts.budget.is_some_and(|b| cost.steps >= b) {
            return Err(RunError::Budget(cost.steps));
        }
        memo.reset();
        let add = &p.adds[&u];
        let leaf = match opts.memo {
            MemoScope::PerStep => add.evaluate(&p.dag, &st, &mut memo, &mut cost),
            MemoScope::None => add.evaluate_tree(&p.dag, &st, &mut cost),
        };
        let leaf = leaf.map_err(|e| match e {
            AddError::Eval(e) => RunError::Eval(e),
            AddError::Top => RunError::Top(p.name(u).to_string()),
            _ => RunError::Bottom(p.name(u).to_string()),
        })?;
        let mut writes: Vec<(_, BigInt)> = Vec::with_capacity(leaf.state.len());
        for (v, e) in leaf.state.iter() {
            let value = match opts.memo {
                MemoScope::PerStep => p.dag.eval(e, &st, &mut memo, &mut cost)?,
                MemoScope::None => p.dag.eval_tree(e, &st, &mut cost)?,
            };
            match value {
                Value::Int(x) => writes.push((v, x)),
                Value::Bool(_) => unreachable!("assignment of Boolean sort"),
            }
        }
        for (v, x) in writes {
            st.set(v, x);
            cost.assign += 1;
        }
        cost.steps += 1;
        u = leaf.target;
    }
    Ok((st, cost))
}

/// One column of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BenchConfig {
    Original,
    Compiled(CompileConfig),
}

impl fmt::Display for BenchConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchConfig::Original => f.write_str("original"),
            BenchConfig::Compiled(c) => c.fmt(f),
        }
    }
}

impl FromStr for BenchConfig {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "original" {
            Ok(BenchConfig::Original)
        } else {
            s.parse().map(BenchConfig::Compiled)
        }
    }
}

/// Category means over the seeds of one cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanCost {
    pub total: f64,
    pub arith: f64,
    pub logic: f64,
    pub compare: f64,
    pub jump: f64,
    pub assign: f64,
    pub steps: f64,
}

impl MeanCost {
    fn mean(reports: &[CostReport]) -> MeanCost {
        let n = reports.len().max(1) as f64;
        let avg = |f: fn(&CostReport) -> u64| reports.iter().map(|r| f(r) as f64).sum::<f64>() / n;
        MeanCost {
            total: avg(CostReport::total),
            arith: avg(|r| r.arith),
            logic: avg(|r| r.logic),
            compare: avg(|r| r.compare),
            jump: avg(|r| r.jump),
            assign: avg(|r| r.assign),
            steps: avg(|r| r.steps),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: i64,
    pub config: String,
    pub seed_count: usize,
    pub cost: MeanCost,
    pub error: Option<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Parallelism {
    #[default]
    Parallel,
    Sequential,
}

#[derive(Clone, Debug)]
pub struct BenchSpec {
    pub var: String,
    pub from: i64,
    pub to: i64,
    pub configs: Vec<BenchConfig>,
    /// Compilations averaged for random-order configs.
    pub seeds: usize,
    pub budget: Option<u64>,
    pub parallelism: Parallelism,
}

/// Seed count from `AGGC_BENCH_SEEDS`, 1000 when unset.
pub fn seeds_from_env() -> usize {
    std::env::var("AGGC_BENCH_SEEDS")
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|&n| n > 0)
        .unwrap_or(1000)
}

fn map_collect<T: Send, R: Send>(par: Parallelism, items: Vec<T>, f: impl Fn(T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    if par == Parallelism::Parallel {
        return items.into_par_iter().map(f).collect();
    }
    let _ = par;
    items.into_iter().map(f).collect()
}

enum Column {
    Original,
    Compiled(Result<Vec<CompiledProgram>, String>),
}

/// Cost of every `(n, config)` cell. Errors are recorded per cell.
pub fn bench(program: &Program, spec: &BenchSpec) -> Vec<BenchRow> {
    let columns: Vec<Column> = spec
        .configs
        .iter()
        .map(|c| match c {
            BenchConfig::Original => Column::Original,
            BenchConfig::Compiled(c) => Column::Compiled(compile_column(program, c, spec)),
        })
        .collect();
    let mut dag = program.dag.clone();
    let var = dag.var_id(&spec.var);
    let graph = build_program_graph(&dag, &program.body);
    let cells: Vec<(i64, usize)> = (spec.from..=spec.to)
        .flat_map(|n| (0..columns.len()).map(move |i| (n, i)))
        .collect();
    map_collect(spec.parallelism, cells, |(n, i)| {
        let mut input = ConcreteState::new();
        input.set(var, BigInt::from(n));
        let (reports, seed_count, error) = match &columns[i] {
            Column::Original => match run_concrete(&dag, &graph, &input, spec.budget) {
                Ok((_, c)) => (vec![c], 1, None),
                Err(e) => (Vec::new(), 1, Some(e.to_string())),
            },
            Column::Compiled(Err(e)) => (Vec::new(), 0, Some(e.clone())),
            Column::Compiled(Ok(ps)) => {
                let opts = RunOptions {
                    budget: spec.budget,
                    memo: MemoScope::PerStep,
                };
                let runs: Result<Vec<CostReport>, RunError> = ps
                    .iter()
                    .map(|p| run_aggregated(p, &input, opts).map(|(_, c)| c))
                    .collect();
                match runs {
                    Ok(r) => (r, ps.len(), None),
                    Err(e) => (Vec::new(), ps.len(), Some(e.to_string())),
                }
            }
        };
        BenchRow {
            n,
            config: spec.configs[i].to_string(),
            seed_count,
            cost: MeanCost::mean(&reports),
            error,
        }
    })
}

fn compile_column(program: &Program, c: &CompileConfig, spec: &BenchSpec) -> Result<Vec<CompiledProgram>, String> {
    let prepared = prepare(program, c).map_err(|e| e.to_string())?;
    let orders: Vec<OrderStrategy> = match c.order {
        OrderStrategy::Random { seed } => (0..spec.seeds as u64)
            .map(|i| OrderStrategy::Random {
                seed: seed.wrapping_add(i),
            })
            .collect(),
        o => vec![o],
    };
    map_collect(spec.parallelism, orders, |o| {
        prepared.finish(o).map_err(|e| e.to_string())
    })
    .into_iter()
    .collect()
}

pub const CSV_HEADER: &str =
    "n,config,seed_count,cost_total,cost_arith,cost_logic,cost_compare,cost_jump,cost_assign,steps,error";

fn num(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{x:.0}")
    } else {
        format!("{x:.3}")
    }
}

pub fn write_csv(rows: &[BenchRow], mut out: impl Write) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        let c = &r.cost;
        let fields = [c.total, c.arith, c.logic, c.compare, c.jump, c.assign, c.steps].map(num);
        let error = r.error.as_deref().unwrap_or("").replace(['"', ','], ";");
        writeln!(
            out,
            "{},{},{},{},{}",
            r.n,
            r.config,
            r.seed_count,
            fields.join(","),
            error
        )?;
    }
    Ok(())
}
