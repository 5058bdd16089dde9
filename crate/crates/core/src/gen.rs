//! Random while programs for property tests.

use num_bigint::BigInt;
use rand::Rng;

use crate::exprdag::{ConcreteState, ExprDag, ExprId, VarId};
use crate::frontend::{Program, Stmt};

#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    /// Data variables, named `a`, `b`, ...
    pub vars: usize,
    pub max_depth: u32,
    /// Statements per block.
    pub max_block: usize,
    pub max_expr_depth: u32,
    /// Constants are drawn from `-c..=c`.
    pub const_range: i64,
    /// Loops count a fresh variable down from a bounded start, so every run
    /// ends.
    pub terminating: bool,
    pub division: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            vars: 3,
            max_depth: 3,
            max_block: 4,
            max_expr_depth: 2,
            const_range: 4,
            terminating: true,
            division: false,
        }
    }
}

struct Gen<'a, R> {
    rng: &'a mut R,
    cfg: GenConfig,
    dag: ExprDag,
    vars: Vec<VarId>,
    counters: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn var(&mut self) -> VarId {
        self.vars[self.rng.random_range(0..self.vars.len())]
    }

    fn leaf(&mut self) -> ExprId {
        if self.rng.random_bool(0.6) {
            let v = self.var();
            self.dag.var(v)
        } else {
            let c = self.rng.random_range(-self.cfg.const_range..=self.cfg.const_range);
            self.dag.constant(c)
        }
    }

    fn arith(&mut self, depth: u32) -> ExprId {
        if depth == 0 || self.rng.random_bool(0.35) {
            return self.leaf();
        }
        let l = self.arith(depth - 1);
        let ops = if self.cfg.division { 4 } else { 3 };
        match self.rng.random_range(0..ops) {
            0 => {
                let r = self.arith(depth - 1);
                self.dag.add(l, r)
            }
            1 => {
                let r = self.arith(depth - 1);
                self.dag.sub(l, r)
            }
            // a constant factor keeps values from growing doubly exponentially
            2 => {
                let c = self.rng.random_range(-3..=3);
                let r = self.dag.constant(c);
                self.dag.mul(l, r)
            }
            _ => {
                let r = self.arith(depth - 1);
                self.dag.div(l, r)
            }
        }
    }

    fn cond(&mut self, depth: u32) -> ExprId {
        let d = self.cfg.max_expr_depth;
        if depth > 0 && self.rng.random_bool(0.25) {
            let l = self.cond(depth - 1);
            return match self.rng.random_range(0..3) {
                0 => self.dag.not(l),
                1 => {
                    let r = self.cond(depth - 1);
                    self.dag.and(l, r)
                }
                _ => {
                    let r = self.cond(depth - 1);
                    self.dag.or(l, r)
                }
            };
        }
        let l = self.arith(d);
        let r = self.arith(d);
        if self.rng.random_bool(0.75) {
            self.dag.lt(l, r)
        } else {
            self.dag.eq(l, r)
        }
    }

    fn block(&mut self, depth: u32) -> Stmt {
        let n = self.rng.random_range(1..=self.cfg.max_block);
        Stmt::seq((0..n).map(|_| self.stmt(depth)).collect())
    }

    fn stmt(&mut self, depth: u32) -> Stmt {
        let compound = depth < self.cfg.max_depth && self.rng.random_bool(0.35);
        if !compound {
            if self.rng.random_bool(0.08) {
                return Stmt::Skip;
            }
            let v = self.var();
            let e = self.arith(self.cfg.max_expr_depth);
            return Stmt::Assign(v, e);
        }
        if self.rng.random_bool(0.5) {
            let c = self.cond(1);
            let a = self.block(depth + 1);
            let b = self.block(depth + 1);
            return Stmt::If(c, Box::new(a), Box::new(b));
        }
        if !self.cfg.terminating {
            let c = self.cond(1);
            let body = self.block(depth + 1);
            return Stmt::While(c, Box::new(body));
        }
        // i := start; while 0 < i && cond { body; i := i - 1 }
        let name = format!("i{}", self.counters);
        self.counters += 1;
        let i = self.dag.var_id(&name);
        let c = self.rng.random_range(0..=4);
        let start = self.dag.constant(c);
        let iv = self.dag.var(i);
        let zero = self.dag.constant(0);
        let mut guard = self.dag.lt(zero, iv);
        if self.rng.random_bool(0.3) {
            let extra = self.cond(0);
            guard = self.dag.and(guard, extra);
        }
        let one = self.dag.constant(1);
        let dec = self.dag.sub(iv, one);
        let body = Stmt::seq(vec![self.block(depth + 1), Stmt::Assign(i, dec)]);
        Stmt::seq(vec![Stmt::Assign(i, start), Stmt::While(guard, Box::new(body))])
    }
}

/// A random program over `cfg.vars` data variables.
pub fn random_program(rng: &mut impl Rng, cfg: &GenConfig) -> Program {
    let mut dag = ExprDag::new();
    let vars = (0..cfg.vars.max(1))
        .map(|k| dag.var_id(&((b'a' + (k % 26) as u8) as char).to_string()))
        .collect();
    let mut g = Gen {
        rng,
        cfg: *cfg,
        dag,
        vars,
        counters: 0,
    };
    let body = g.block(0);
    Program { dag: g.dag, body }
}

/// Binds every variable of `p` to a value in `-range..=range`.
pub fn random_input(rng: &mut impl Rng, p: &Program, range: i64) -> ConcreteState {
    let mut st = ConcreteState::new();
    for k in 0..p.dag.var_count() {
        let v = p.dag.lookup_var(&p.dag.var_names()[k]).expect("listed variable");
        st.set(v, BigInt::from(rng.random_range(-range..=range)));
    }
    st
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::build_program_graph;
    use crate::symexec::run_concrete;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_programs_parse_back_and_terminate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let p = random_program(&mut rng, &GenConfig::default());
            let again = Program::parse(&p.unparse()).unwrap();
            assert_eq!(again.unparse(), p.unparse());
            let g = build_program_graph(&p.dag, &p.body);
            let input = random_input(&mut rng, &p, 5);
            run_concrete(&p.dag, &g, &input, Some(1_000_000)).unwrap();
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let a = random_program(&mut ChaCha8Rng::seed_from_u64(9), &GenConfig::default());
        let b = random_program(&mut ChaCha8Rng::seed_from_u64(9), &GenConfig::default());
        assert_eq!(a.unparse(), b.unparse());
    }
}
