use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exprdag::ExprId;
use crate::frontend::ProgramGraph;
use crate::symexec::ContractedPath;

/// Total order over atomic propositions; position = decision level.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PredOrder {
    aps: Vec<ExprId>,
    level: HashMap<ExprId, u32>,
}

impl PredOrder {
    pub fn new(aps: Vec<ExprId>) -> Self {
        let level: HashMap<ExprId, u32> = aps.iter().enumerate().map(|(i, a)| (*a, i as u32)).collect();
        assert_eq!(level.len(), aps.len(), "duplicate AP in order");
        PredOrder { aps, level }
    }

    pub fn level(&self, ap: ExprId) -> Option<u32> {
        self.level.get(&ap).copied()
    }

    pub fn ap(&self, level: u32) -> ExprId {
        self.aps[level as usize]
    }

    pub fn aps(&self) -> &[ExprId] {
        &self.aps
    }

    pub fn len(&self) -> usize {
        self.aps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aps.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum OrderStrategy {
    /// First-encounter order over the enumerated paths.
    #[default]
    Occurrence,
    /// Seeded uniform shuffle.
    Random { seed: u64 },
    /// Loop conditions of the deepest unrolling first, then occurrence order.
    Deepest,
}

impl fmt::Display for OrderStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderStrategy::Occurrence => f.write_str("occurrence"),
            OrderStrategy::Random { seed } => write!(f, "random:{seed}"),
            OrderStrategy::Deepest => f.write_str("deepest"),
        }
    }
}

impl FromStr for OrderStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "occurrence" => Ok(OrderStrategy::Occurrence),
            "deepest" | "deepest-first" => Ok(OrderStrategy::Deepest),
            _ => match s.strip_prefix("random:").or_else(|| s.strip_prefix("random=")) {
                Some(seed) => seed
                    .parse()
                    .map(|seed| OrderStrategy::Random { seed })
                    .map_err(|_| format!("bad seed in `{s}`")),
                None => Err(format!("unknown order `{s}` (occurrence|random:SEED|deepest)")),
            },
        }
    }
}

/// APs in first-encounter order.
pub fn occurrence(paths: &[ContractedPath]) -> Vec<ExprId> {
    let mut seen = HashMap::new();
    let mut out = Vec::new();
    for p in paths {
        for l in &p.literals {
            if seen.insert(l.lit.ap, ()).is_none() {
                out.push(l.lit.ap);
            }
        }
    }
    out
}

pub fn choose_order(g: &ProgramGraph, paths: &[ContractedPath], strategy: OrderStrategy) -> PredOrder {
    let mut aps = occurrence(paths);
    match strategy {
        OrderStrategy::Occurrence => {}
        OrderStrategy::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            aps.shuffle(&mut rng);
        }
        OrderStrategy::Deepest => {
            let mut depth: HashMap<ExprId, u32> = HashMap::new();
            for l in paths.iter().flat_map(|p| &p.literals) {
                if g.is_loop_head(l.origin) {
                    let d = depth.entry(l.lit.ap).or_default();
                    *d = (*d).max(l.depth);
                }
            }
            let max = depth.values().copied().max().unwrap_or(0);
            if max > 0 {
                let (mut first, rest): (Vec<ExprId>, Vec<ExprId>) =
                    aps.into_iter().partition(|a| depth.get(a) == Some(&max));
                first.extend(rest);
                aps = first;
            }
        }
    }
    PredOrder::new(aps)
}
