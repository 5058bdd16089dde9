//! From a parsed program to one aggregated diagram per cut point.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::add::{choose_order, Add, AddError, AddManager, LatticeElem, OrderStrategy};
use crate::exprdag::{ExprDag, VarId};
use crate::frontend::{
    build_program_graph, select_cut_points, CutPointSet, CutStrategy, NodeId, ParseError, Program, ProgramGraph,
};
use crate::simplify::{FeasibilityChecker, FourierMotzkin, NoCheck, Normalizer};
use crate::symexec::{enumerate_paths, ContractedPath, EnumConfig, EnumError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CompileConfig {
    /// Maximum number of revisits of a cut point followed inside one fragment.
    pub unroll: u32,
    pub order: OrderStrategy,
    pub normalize: bool,
    /// Infeasible-path pruning and elimination.
    pub elim: bool,
    pub cuts: CutStrategy,
    pub max_paths: usize,
}

impl Default for CompileConfig {
    fn default() -> Self {
        CompileConfig {
            unroll: 0,
            order: OrderStrategy::Occurrence,
            normalize: false,
            elim: false,
            cuts: CutStrategy::BackEdge,
            max_paths: EnumConfig::default().max_paths,
        }
    }
}

impl CompileConfig {
    pub fn unrolled(k: u32) -> Self {
        CompileConfig {
            unroll: k,
            ..Self::default()
        }
    }

    pub fn with_all(mut self, order: OrderStrategy) -> Self {
        self.normalize = true;
        self.elim = true;
        self.order = order;
        self
    }
}

/// Short label such as `k=16+normalize+elim+order=deepest`.
impl fmt::Display for CompileConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={}", self.unroll)?;
        if self.normalize {
            f.write_str("+normalize")?;
        }
        if self.elim {
            f.write_str("+elim")?;
        }
        if self.order != OrderStrategy::Occurrence {
            write!(f, "+order={}", self.order)?;
        }
        if self.cuts != CutStrategy::BackEdge {
            f.write_str("+cuts=loop-head")?;
        }
        Ok(())
    }
}

impl FromStr for CompileConfig {
    type Err = String;

    /// Parses the `Display` form; tokens are separated by `+` or `,`.
    fn from_str(s: &str) -> Result<Self, String> {
        let mut c = CompileConfig::default();
        for tok in s.split(['+', ',']).map(str::trim).filter(|t| !t.is_empty()) {
            match tok {
                "normalize" => c.normalize = true,
                "elim" => c.elim = true,
                _ => {
                    if let Some(k) = tok.strip_prefix("k=") {
                        c.unroll = k.parse().map_err(|_| format!("bad unroll count `{k}`"))?;
                    } else if let Some(o) = tok.strip_prefix("order=") {
                        c.order = o.parse()?;
                    } else if let Some(x) = tok.strip_prefix("cuts=") {
                        c.cuts = x.parse()?;
                    } else {
                        return Err(format!("unknown config token `{tok}`"));
                    }
                }
            }
        }
        Ok(c)
    }
}

#[derive(Debug, Error)]
pub enum CompileError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Paths(#[from] EnumError),
    #[error(transparent)]
    Add(#[from] AddError),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutStats {
    pub name: String,
    pub paths: usize,
    pub decisions_before: usize,
    pub decisions: usize,
    pub terminals: usize,
    pub depth: usize,
    /// ⊥ still reachable in the final diagram.
    pub bottom: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileStats {
    pub cuts: Vec<CutStats>,
    pub ed_nodes: usize,
}

impl CompileStats {
    pub fn decisions(&self) -> usize {
        self.cuts.iter().map(|c| c.decisions).sum()
    }
}

/// Aggregated program: a diagram for every cut point except `te`, all
/// sharing one compacted expression table.
#[derive(Clone, Debug)]
pub struct CompiledProgram {
    pub dag: ExprDag,
    pub cuts: CutPointSet,
    pub names: BTreeMap<NodeId, String>,
    pub adds: BTreeMap<NodeId, Add>,
    pub st: NodeId,
    pub te: NodeId,
    /// Variables read before being written.
    pub inputs: Vec<VarId>,
    pub config: CompileConfig,
    pub stats: CompileStats,
}

impl CompiledProgram {
    pub fn name(&self, u: NodeId) -> &str {
        self.names.get(&u).map(String::as_str).unwrap_or("?")
    }

    pub fn cut_by_name(&self, name: &str) -> Option<NodeId> {
        self.names.iter().find(|(_, n)| *n == name).map(|(u, _)| *u)
    }

    /// Checks the structural invariants every compiled program must satisfy.
    pub fn check(&self) -> Result<(), String> {
        for u in self.cuts.iter().filter(|&u| u != self.te) {
            let add = self
                .adds
                .get(&u)
                .ok_or_else(|| format!("no diagram for cut point {}", self.name(u)))?;
            add.check_invariants()
                .map_err(|e| format!("cut point {}: {e}", self.name(u)))?;
            for n in &add.nodes {
                if let crate::add::AddNode::Terminal(e) = n {
                    match e {
                        LatticeElem::Top => return Err(format!("⊤ in cut point {}", self.name(u))),
                        LatticeElem::Leaf(l) if !self.cuts.contains(l.target) => {
                            return Err(format!("leaf of {} targets a non-cut node", self.name(u)))
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(())
    }
}

/// Result of symbolic execution, independent of the predicate order.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub dag: ExprDag,
    pub graph: ProgramGraph,
    pub cuts: CutPointSet,
    pub paths: BTreeMap<NodeId, Vec<ContractedPath>>,
    pub config: CompileConfig,
}

fn checker(elim: bool) -> Box<dyn FeasibilityChecker> {
    if elim {
        Box::new(FourierMotzkin::default())
    } else {
        Box::new(NoCheck)
    }
}

pub fn prepare(program: &Program, config: &CompileConfig) -> Result<Prepared, CompileError> {
    let mut dag = program.dag.clone();
    let graph = build_program_graph(&dag, &program.body);
    let cuts = select_cut_points(&graph, config.cuts);
    let feas = checker(config.elim);
    let mut normalizer = config.normalize.then(Normalizer::default);
    let enum_config = EnumConfig {
        unroll: config.unroll,
        max_paths: config.max_paths,
    };
    let mut paths = BTreeMap::new();
    for u in cuts.iter().filter(|&u| u != graph.te()) {
        let ps = enumerate_paths(
            &mut dag,
            &graph,
            &cuts,
            u,
            &enum_config,
            feas.as_ref(),
            normalizer.as_mut(),
        )?;
        paths.insert(u, ps);
    }
    Ok(Prepared {
        dag,
        graph,
        cuts,
        paths,
        config: *config,
    })
}

/// Seed for one cut point, so that every fragment gets its own shuffle.
fn cut_seed(seed: u64, u: NodeId) -> u64 {
    seed ^ (u64::from(u.0) + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

impl Prepared {
    /// Builds the diagrams under `order`, overriding the configured strategy.
    pub fn finish(&self, order: OrderStrategy) -> Result<CompiledProgram, CompileError> {
        let feas = checker(self.config.elim);
        let mut adds = BTreeMap::new();
        let mut cuts = Vec::new();
        for (&u, ps) in &self.paths {
            let strategy = match order {
                OrderStrategy::Random { seed } => OrderStrategy::Random {
                    seed: cut_seed(seed, u),
                },
                o => o,
            };
            let mut m = AddManager::new(choose_order(&self.graph, ps, strategy));
            let mut root = m.aggregate(u, ps)?;
            let decisions_before = m.extract(root).stats().decisions;
            if self.config.elim {
                root = m.eliminate_infeasible(root, &self.dag, feas.as_ref())?;
                root = m.dissolve_bottom(root);
                if m.overflowed() {
                    return Err(AddError::TooLarge(m.max_nodes).into());
                }
            }
            let add = m.extract(root);
            let s = add.stats();
            cuts.push(CutStats {
                name: self.graph.name(u),
                paths: ps.len(),
                decisions_before,
                decisions: s.decisions,
                terminals: s.terminals,
                depth: s.depth,
                bottom: add.contains(|e| *e == LatticeElem::Bot),
            });
            adds.insert(u, add);
        }
        let (dag, map) = self.dag.compact(adds.values().flat_map(Add::exprs));
        let adds: BTreeMap<NodeId, Add> = adds.into_iter().map(|(u, a)| (u, a.map_exprs(|e| map[&e]))).collect();
        let names = self.cuts.iter().map(|u| (u, self.graph.name(u))).collect();
        let compiled = CompiledProgram {
            stats: CompileStats {
                cuts,
                ed_nodes: dag.len(),
            },
            inputs: self.graph.free_vars(&self.dag),
            dag,
            cuts: self.cuts.clone(),
            names,
            adds,
            st: self.graph.st(),
            te: self.graph.te(),
            config: CompileConfig { order, ..self.config },
        };
        compiled.check().map_err(CompileError::Invariant)?;
        Ok(compiled)
    }
}

pub fn compile(program: &Program, config: &CompileConfig) -> Result<CompiledProgram, CompileError> {
    prepare(program, config)?.finish(config.order)
}

pub fn compile_source(source: &str, config: &CompileConfig) -> Result<CompiledProgram, CompileError> {
    compile(&Program::parse(source)?, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::programs::FIBONACCI;

    #[test]
    fn config_labels_round_trip() {
        for s in [
            "k=0",
            "k=16+normalize+elim+order=deepest",
            "k=4+order=random:7",
            "k=2+elim+cuts=loop-head",
        ] {
            let c: CompileConfig = s.parse().unwrap();
            assert_eq!(c.to_string(), s);
        }
        assert!("k=x".parse::<CompileConfig>().is_err());
        assert!("fast".parse::<CompileConfig>().is_err());
    }

    #[test]
    fn fibonacci_defaults() {
        let p = compile_source(FIBONACCI, &CompileConfig::default()).unwrap();
        let names: Vec<&str> = p.adds.keys().map(|&u| p.name(u)).collect();
        assert_eq!(names, ["st", "7"]);
        let st = &p.stats.cuts[0];
        assert_eq!((st.paths, st.decisions, st.terminals), (3, 2, 3));
        let seven = &p.stats.cuts[1];
        assert_eq!((seven.paths, seven.decisions, seven.terminals), (2, 1, 2));
        assert!(!st.bottom && !seven.bottom);
    }

    #[test]
    fn loop_free_program_has_one_diagram() {
        let p = compile_source("x := y + 1", &CompileConfig::default()).unwrap();
        assert_eq!(p.adds.len(), 1);
        let add = &p.adds[&p.st];
        assert_eq!(add.nodes.len(), 1);
        assert_eq!(p.inputs.len(), 1);
    }

    #[test]
    fn deepest_order_leaves_one_decision_on_the_big_step() {
        let c: CompileConfig = "k=2+normalize+elim+order=deepest".parse().unwrap();
        let p = compile_source(FIBONACCI, &c).unwrap();
        let seven = p.cut_by_name("7").unwrap();
        let add = &p.adds[&seven];
        let big = add
            .min_decisions_to(|e| e.as_leaf().is_some_and(|l| l.target == seven))
            .unwrap();
        assert_eq!(big, 1);
    }

    #[test]
    fn random_seeds_are_reproducible() {
        let c: CompileConfig = "k=4+order=random:11".parse().unwrap();
        let a = compile_source(FIBONACCI, &c).unwrap();
        let b = compile_source(FIBONACCI, &c).unwrap();
        assert_eq!(a.adds, b.adds);
    }
}
