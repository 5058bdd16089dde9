use crate::cost::CostReport;
use crate::exprdag::{ConcreteState, ExprDag, Value};
use crate::frontend::{Action, ProgramGraph, Stmt, Succ};

use super::ExecError;

/// Runs the original program on its graph with tree-shaped cost accounting.
/// `budget` bounds the number of traversed edges.
pub fn run_concrete(
    dag: &ExprDag,
    g: &ProgramGraph,
    input: &ConcreteState,
    budget: Option<u64>,
) -> Result<(ConcreteState, CostReport), ExecError> {
    let mut st = input.clone();
    let mut cost = CostReport::default();
    let mut node = g.st();
    loop {
        match g.succ(node) {
            Succ::Exit => return Ok((st, cost)),
            Succ::Action(Action::Skip, to) => node = to,
            Succ::Action(Action::Assign(v, e), to) => {
                let value = dag.eval_tree(e, &st, &mut cost)?;
                st.set(v, int(value));
                cost.assign += 1;
                node = to;
            }
            Succ::Branch { cond, then, other } => {
                let b = dag.eval_tree(cond, &st, &mut cost)?;
                cost.jump += 1;
                node = if boolean(b) { then } else { other };
            }
        }
        cost.steps += 1;
        if budget.is_some_and(|b| cost.steps > b) {
            return Err(ExecError::Budget(cost.steps - 1));
        }
    }
}

/// Structural interpreter over the statement tree, charging exactly like
/// [`run_concrete`]. Used to cross-check the graph construction.
pub fn run_structural(
    dag: &ExprDag,
    body: &Stmt,
    input: &ConcreteState,
    budget: Option<u64>,
) -> Result<(ConcreteState, CostReport), ExecError> {
    let mut m = Machine {
        dag,
        st: input.clone(),
        cost: CostReport::default(),
        budget,
    };
    m.exec(body)?;
    Ok((m.st, m.cost))
}

struct Machine<'a> {
    dag: &'a ExprDag,
    st: ConcreteState,
    cost: CostReport,
    budget: Option<u64>,
}

impl Machine<'_> {
    fn tick(&mut self) -> Result<(), ExecError> {
        self.cost.steps += 1;
        match self.budget {
            Some(b) if self.cost.steps > b => Err(ExecError::Budget(b)),
            _ => Ok(()),
        }
    }

    fn test(&mut self, cond: crate::exprdag::ExprId) -> Result<bool, ExecError> {
        let b = self.dag.eval_tree(cond, &self.st, &mut self.cost)?;
        self.cost.jump += 1;
        self.tick()?;
        Ok(boolean(b))
    }

    fn exec(&mut self, s: &Stmt) -> Result<(), ExecError> {
        match s {
            Stmt::Skip => self.tick(),
            Stmt::Assign(v, e) => {
                let value = self.dag.eval_tree(*e, &self.st, &mut self.cost)?;
                self.st.set(*v, int(value));
                self.cost.assign += 1;
                self.tick()
            }
            Stmt::Seq(stmts) => stmts.iter().try_for_each(|s| self.exec(s)),
            Stmt::If(c, a, b) => {
                if self.test(*c)? {
                    self.exec(a)
                } else {
                    self.exec(b)
                }
            }
            Stmt::While(c, body) => {
                while self.test(*c)? {
                    self.exec(body)?;
                }
                Ok(())
            }
        }
    }
}

fn int(v: Value) -> num_bigint::BigInt {
    match v {
        Value::Int(i) => i,
        Value::Bool(_) => unreachable!("sort-checked assignment"),
    }
}

fn boolean(v: Value) -> bool {
    match v {
        Value::Bool(b) => b,
        Value::Int(_) => unreachable!("sort-checked condition"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{build_program_graph, Program};
    use crate::programs::FIBONACCI;
    use num_bigint::BigInt;

    fn fib(n: i64) -> (BigInt, CostReport) {
        let mut p = Program::parse(FIBONACCI).unwrap();
        let g = build_program_graph(&p.dag, &p.body);
        let input = ConcreteState::from_named(&mut p.dag, [("n", n)]);
        let (out, cost) = run_concrete(&p.dag, &g, &input, None).unwrap();
        let f = p.dag.lookup_var("fib").unwrap();
        (out.get(f).unwrap().clone(), cost)
    }

    fn reference_fib(n: i64) -> BigInt {
        let (mut a, mut b) = (BigInt::from(1), BigInt::from(1));
        for _ in 2..n {
            let c = &a + &b;
            a = b;
            b = c;
        }
        b
    }

    #[test]
    fn fibonacci_values() {
        for n in -3..40 {
            assert_eq!(fib(n).0, reference_fib(n), "n = {n}");
        }
        assert_eq!(fib(7).0, BigInt::from(13));
        assert_eq!(fib(3).0, BigInt::from(2));
    }

    #[test]
    fn fibonacci_hand_counted_costs() {
        // then-branch: compare, not, jump, assign
        assert_eq!(fib(1).1.total(), 4);
        // else-branch: compare, not, jump; two assigns; per iteration check 2
        // and body 6; final check 2
        assert_eq!(fib(3).1.total(), 3 + 2 + 2 + 6 + 2);
        assert_eq!(fib(4).1.total(), 3 + 2 + 2 * (2 + 6) + 2);
        assert_eq!(fib(150).1.total(), 3 + 2 + 148 * 8 + 2);
    }

    #[test]
    fn division_by_zero_is_a_runtime_error() {
        let p = Program::parse("x := 1 / 0").unwrap();
        let g = build_program_graph(&p.dag, &p.body);
        let err = run_concrete(&p.dag, &g, &ConcreteState::new(), None).unwrap_err();
        assert!(matches!(
            err,
            ExecError::Eval(crate::exprdag::EvalError::DivisionByZero { .. })
        ));
    }

    #[test]
    fn budget_stops_divergence() {
        let p = Program::parse("while true { skip }").unwrap();
        let g = build_program_graph(&p.dag, &p.body);
        let err = run_concrete(&p.dag, &g, &ConcreteState::new(), Some(100)).unwrap_err();
        assert_eq!(err, ExecError::Budget(100));
        let err = run_structural(&p.dag, &p.body, &ConcreteState::new(), Some(100)).unwrap_err();
        assert_eq!(err, ExecError::Budget(100));
    }

    #[test]
    fn graph_and_tree_interpreters_agree() {
        let mut p = Program::parse(FIBONACCI).unwrap();
        let g = build_program_graph(&p.dag, &p.body);
        for n in 0..30 {
            let input = ConcreteState::from_named(&mut p.dag, [("n", n)]);
            let (a, ca) = run_concrete(&p.dag, &g, &input, None).unwrap();
            let (b, cb) = run_structural(&p.dag, &p.body, &input, None).unwrap();
            assert_eq!(a, b);
            assert_eq!(ca, cb);
        }
    }

    #[test]
    fn while_false_terminates_immediately() {
        let p = Program::parse("while false { skip }").unwrap();
        let g = build_program_graph(&p.dag, &p.body);
        let (out, cost) = run_concrete(&p.dag, &g, &ConcreteState::new(), None).unwrap();
        assert_eq!(out, ConcreteState::new());
        assert_eq!(cost.jump, 1);
    }
}
