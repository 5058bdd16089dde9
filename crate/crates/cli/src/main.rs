//! `aggc`: compile while programs into per-cut-point decision diagrams, run
//! them, sweep costs and dump Graphviz.

mod svg;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aggc::add::OrderStrategy;
use aggc::artifact;
use aggc::compile::{compile, CompileConfig, CompileError, CompiledProgram};
use aggc::dot::{add_dot, ed_dot};
use aggc::exprdag::ConcreteState;
use aggc::frontend::{CutStrategy, Program};
use aggc::runtime::{
    bench, run_aggregated, seeds_from_env, write_csv, BenchConfig, BenchSpec, MemoScope, Parallelism, RunError,
    RunOptions,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
    #[error("{0}")]
    Invariant(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl From<CompileError> for CliError {
    fn from(e: CompileError) -> Self {
        match e {
            CompileError::Invariant(_) => CliError::Invariant(e.to_string()),
            e => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<RunError> for CliError {
    fn from(e: RunError) -> Self {
        match e {
            RunError::MissingInput(_) => CliError::Usage(e.to_string()),
            e => CliError::Runtime(e.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |e| CliError::Runtime(format!("{}: {e}", path.display()))
}

#[derive(Parser)]
#[command(name = "aggc", version, about = "Aggregating compiler for a small while language")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile a `.while` file into a `.aggc.json` artifact.
    Compile(CompileArgs),
    /// Run a compiled artifact.
    Run(RunArgs),
    /// Sweep an input variable and write per-configuration costs as CSV.
    Bench(BenchArgs),
    /// Write Graphviz files for diagrams and the expression table.
    Emit(EmitArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Occurrence,
    Random,
    Deepest,
}

#[derive(Clone, Copy, ValueEnum)]
enum CutsArg {
    BackEdge,
    LoopHead,
}

#[derive(Args)]
struct ConfigArgs {
    /// Revisits of a cut point followed inside one fragment.
    #[arg(short = 'k', long, default_value_t = 0)]
    unroll: u32,
    #[arg(long, value_enum, default_value = "occurrence")]
    order: OrderArg,
    /// Required with `--order random`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    normalize: bool,
    /// Infeasible-path pruning and elimination.
    #[arg(long)]
    elim: bool,
    /// Shorthand for `--normalize --elim`.
    #[arg(long)]
    all: bool,
    #[arg(long, value_enum, default_value = "back-edge")]
    cuts: CutsArg,
    /// A full configuration such as `k=16+normalize+elim+order=random:7`;
    /// replaces the individual flags.
    #[arg(long, conflicts_with_all = ["unroll", "order", "seed", "normalize", "elim", "all", "cuts"])]
    config: Option<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<CompileConfig, CliError> {
        if let Some(s) = &self.config {
            return s.parse().map_err(CliError::Usage);
        }
        let order = match (self.order, self.seed) {
            (OrderArg::Random, Some(seed)) => OrderStrategy::Random { seed },
            (OrderArg::Random, None) => return Err(CliError::Usage("--order random needs --seed".into())),
            (_, Some(_)) => return Err(CliError::Usage("--seed only applies to --order random".into())),
            (OrderArg::Occurrence, None) => OrderStrategy::Occurrence,
            (OrderArg::Deepest, None) => OrderStrategy::Deepest,
        };
        Ok(CompileConfig {
            unroll: self.unroll,
            order,
            normalize: self.normalize || self.all,
            elim: self.elim || self.all,
            cuts: match self.cuts {
                CutsArg::BackEdge => CutStrategy::BackEdge,
                CutsArg::LoopHead => CutStrategy::LoopHead,
            },
            ..CompileConfig::default()
        })
    }
}

#[derive(Args)]
struct CompileArgs {
    file: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
    /// Defaults to the input path with extension `.aggc.json`.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    artifact: PathBuf,
    /// `name=value`; repeatable.
    #[arg(short, long = "input", value_parser = parse_binding)]
    inputs: Vec<(String, BigInt)>,
    /// Print the cost report.
    #[arg(long)]
    cost: bool,
    /// Maximum number of fragment steps.
    #[arg(long)]
    budget: Option<u64>,
    /// Charge every operator occurrence instead of memoizing per step.
    #[arg(long)]
    no_memo: bool,
}

#[derive(Args)]
struct BenchArgs {
    file: PathBuf,
    #[arg(long)]
    var: String,
    #[arg(long)]
    from: i64,
    #[arg(long)]
    to: i64,
    /// `original` or a configuration such as `k=16+normalize+elim+order=random:0`;
    /// repeatable.
    #[arg(long = "config", required = true)]
    configs: Vec<String>,
    #[arg(long)]
    out: PathBuf,
    /// Also draw cost against the swept variable.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Random orders averaged per random-order config; defaults to
    /// `AGGC_BENCH_SEEDS` or 1000.
    #[arg(long)]
    seeds: Option<usize>,
    /// Step budget per run.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct EmitArgs {
    artifact: PathBuf,
    /// Cut point whose diagram is written; repeatable.
    #[arg(long = "dot-add")]
    dot_add: Vec<String>,
    /// Write the expression table.
    #[arg(long)]
    dot_ed: bool,
    /// Write `add_<cut>.dot` and `ed.dot` here instead of stdout.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn parse_binding(s: &str) -> Result<(String, BigInt), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let value = value
        .trim()
        .parse()
        .map_err(|_| format!("`{value}` is not an integer"))?;
    Ok((name.trim().to_string(), value))
}

fn read_program(path: &Path) -> Result<Program, CliError> {
    let src = fs::read_to_string(path).map_err(io_err(path))?;
    Program::parse(&src).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<CompiledProgram, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    artifact::from_json(&text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn artifact_path(src: &Path) -> PathBuf {
    let stem = src.file_stem().unwrap_or_default().to_string_lossy();
    src.with_file_name(format!("{stem}.aggc.json"))
}

fn cmd_compile(a: &CompileArgs, out: &mut impl Write) -> Result<(), CliError> {
    let config = a.config.resolve()?;
    let program = read_program(&a.file)?;
    let compiled = compile(&program, &config)?;
    let baseline = compile(&program, &CompileConfig::unrolled(config.unroll)).ok();
    let path = a.out.clone().unwrap_or_else(|| artifact_path(&a.file));
    fs::write(&path, artifact::to_json(&compiled)).map_err(io_err(&path))?;

    let w = |e: io::Error| CliError::Runtime(e.to_string());
    writeln!(out, "config {config}").map_err(w)?;
    writeln!(
        out,
        "{:<8} {:>6} {:>10} {:>10} {:>10} {:>6}  bottom",
        "cut", "paths", "unelim", "decisions", "terminals", "depth"
    )
    .map_err(w)?;
    for c in &compiled.stats.cuts {
        writeln!(
            out,
            "{:<8} {:>6} {:>10} {:>10} {:>10} {:>6}  {}",
            c.name,
            c.paths,
            c.decisions_before,
            c.decisions,
            c.terminals,
            c.depth,
            if c.bottom { "yes" } else { "no" }
        )
        .map_err(w)?;
    }
    let s = &compiled.stats;
    match &baseline {
        Some(b) => writeln!(
            out,
            "decisions {} -> {}, ED nodes {} -> {} (unoptimized -> configured)",
            b.stats.decisions(),
            s.decisions(),
            b.stats.ed_nodes,
            s.ed_nodes
        ),
        None => writeln!(
            out,
            "decisions {}, ED nodes {} (unoptimized build failed)",
            s.decisions(),
            s.ed_nodes
        ),
    }
    .map_err(w)?;
    writeln!(out, "wrote {}", path.display()).map_err(w)
}

fn cmd_run(a: &RunArgs, out: &mut impl Write) -> Result<(), CliError> {
    let mut p = load(&a.artifact)?;
    let mut input = ConcreteState::new();
    for (name, value) in &a.inputs {
        let v = p.dag.var_id(name);
        input.set(v, value.clone());
    }
    let opts = RunOptions {
        budget: a.budget,
        memo: if a.no_memo { MemoScope::None } else { MemoScope::PerStep },
    };
    let (st, cost) = run_aggregated(&p, &input, opts)?;
    let w = |e: io::Error| CliError::Runtime(e.to_string());
    for (name, value) in st.named(&p.dag) {
        writeln!(out, "{name}={value}").map_err(w)?;
    }
    if a.cost {
        writeln!(out, "cost {cost}").map_err(w)?;
    }
    Ok(())
}

fn cmd_bench(a: &BenchArgs, out: &mut impl Write) -> Result<(), CliError> {
    if a.from > a.to {
        return Err(CliError::Usage(format!("empty range {}..={}", a.from, a.to)));
    }
    let configs = a
        .configs
        .iter()
        .map(|c| c.parse::<BenchConfig>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::Usage)?;
    let program = read_program(&a.file)?;
    let spec = BenchSpec {
        var: a.var.clone(),
        from: a.from,
        to: a.to,
        configs,
        seeds: a.seeds.unwrap_or_else(seeds_from_env),
        budget: a.budget,
        parallelism: if a.sequential {
            Parallelism::Sequential
        } else {
            Parallelism::Parallel
        },
    };
    let rows = bench(&program, &spec);
    let mut csv = Vec::new();
    write_csv(&rows, &mut csv).map_err(|e| CliError::Runtime(e.to_string()))?;
    fs::write(&a.out, csv).map_err(io_err(&a.out))?;
    if let Some(path) = &a.svg {
        fs::write(path, svg::chart(&rows, &a.var)).map_err(io_err(path))?;
    }
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    writeln!(
        out,
        "{} rows, {failed} with errors, wrote {}",
        rows.len(),
        a.out.display()
    )
    .map_err(|e| CliError::Runtime(e.to_string()))
}

fn cmd_emit(a: &EmitArgs, out: &mut impl Write) -> Result<(), CliError> {
    if a.dot_add.is_empty() && !a.dot_ed {
        return Err(CliError::Usage(
            "nothing to emit: pass --dot-add CUT or --dot-ed".into(),
        ));
    }
    let p = load(&a.artifact)?;
    let mut files = Vec::new();
    for name in &a.dot_add {
        let dot = p.cut_by_name(name).and_then(|u| add_dot(&p, u)).ok_or_else(|| {
            let known: Vec<&str> = p.adds.keys().map(|&u| p.name(u)).collect();
            CliError::Usage(format!("no diagram at cut point `{name}` (have: {})", known.join(", ")))
        })?;
        files.push((format!("add_{name}.dot"), dot));
    }
    if a.dot_ed {
        files.push(("ed.dot".to_string(), ed_dot(&p.dag)));
    }
    let w = |e: io::Error| CliError::Runtime(e.to_string());
    for (file, dot) in files {
        match &a.out_dir {
            Some(dir) => {
                let path = dir.join(&file);
                fs::write(&path, dot).map_err(io_err(&path))?;
                writeln!(out, "wrote {}", path.display()).map_err(w)?;
            }
            None => out.write_all(dot.as_bytes()).map_err(w)?,
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = io::stdout().lock();
    let r = match &cli.cmd {
        Cmd::Compile(a) => cmd_compile(a, &mut out),
        Cmd::Run(a) => cmd_run(a, &mut out),
        Cmd::Bench(a) => cmd_bench(a, &mut out),
        Cmd::Emit(a) => cmd_emit(a, &mut out),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
