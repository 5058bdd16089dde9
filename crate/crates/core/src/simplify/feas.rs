//! Satisfiability of conjunctions of AP literals over the integers.
//!
//! Fourier-Motzkin elimination over the rational relaxation, with integer
//! tightening of every derived constraint. Non-linear monomials and division
//! subterms are treated as independent unknowns, which only weakens the
//! system, so `Unsat` stays sound. `Sat` is reported only for a verified
//! integer witness.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::poly::{Monomial, Poly};
use super::Literal;
use crate::cost::CostReport;
use crate::exprdag::{CmpOp, ConcreteState, EvalCache, ExprDag, ExprNode, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeasResult {
    Sat,
    Unsat,
    Unknown,
}

/// Decides (soundly, not completely) whether a literal conjunction has an
/// integer model.
pub trait FeasibilityChecker: Send + Sync {
    fn check(&self, dag: &ExprDag, lits: &[Literal]) -> FeasResult;

    fn name(&self) -> &'static str;
}

/// Never rules anything out.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoCheck;

impl FeasibilityChecker for NoCheck {
    fn check(&self, _: &ExprDag, lits: &[Literal]) -> FeasResult {
        if lits.is_empty() {
            FeasResult::Sat
        } else {
            FeasResult::Unknown
        }
    }

    fn name(&self) -> &'static str {
        "none"
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FourierMotzkin {
    /// Give up once a round holds more constraints than this.
    pub max_constraints: usize,
    /// Disequalities beyond this count are dropped instead of case-split.
    pub max_splits: usize,
    /// Term bound when turning APs into polynomials.
    pub max_monomials: usize,
}

impl Default for FourierMotzkin {
    fn default() -> Self {
        FourierMotzkin {
            max_constraints: 4096,
            max_splits: 4,
            max_monomials: 64,
        }
    }
}

/// `Σ coef·x + c ≤ 0` (or `= 0`), unknowns indexed densely.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Row {
    coefs: BTreeMap<usize, BigInt>,
    c: BigInt,
}

impl Row {
    fn from_poly(p: &Poly, index: &mut Unknowns) -> Row {
        let mut coefs = BTreeMap::new();
        for (m, k) in p.linear_part() {
            coefs.insert(index.get(m), k.clone());
        }
        Row {
            coefs,
            c: p.constant_term(),
        }
    }

    fn neg(&self) -> Row {
        Row {
            coefs: self.coefs.iter().map(|(i, k)| (*i, -k)).collect(),
            c: -&self.c,
        }
    }

    fn plus_const(mut self, k: i64) -> Row {
        self.c += k;
        self
    }

    fn is_trivial(&self) -> bool {
        self.coefs.is_empty()
    }

    /// Divides by the coefficient gcd, rounding the constant up. `None` when
    /// the row is `c ≤ 0` with `c > 0`.
    fn tighten(mut self) -> Option<Row> {
        if self.coefs.is_empty() {
            return (!self.c.is_positive()).then_some(self);
        }
        let g = self.coefs.values().fold(BigInt::zero(), |g, k| g.gcd(k));
        if !g.is_one() {
            for k in self.coefs.values_mut() {
                *k /= &g;
            }
            self.c = Integer::div_ceil(&self.c, &g);
        }
        Some(self)
    }

    /// Eliminates `x` using the equality `eq`, whose coefficient on `x` is ±1.
    fn substitute(&self, x: usize, eq: &Row) -> Row {
        let Some(a) = self.coefs.get(&x) else {
            return self.clone();
        };
        // x = -(rest of eq) / b with b = ±1
        let b = &eq.coefs[&x];
        let f = -(a * b);
        let mut out = self.clone();
        out.coefs.remove(&x);
        for (i, k) in &eq.coefs {
            if *i == x {
                continue;
            }
            let e = out.coefs.entry(*i).or_default();
            *e += &f * k;
        }
        out.coefs.retain(|_, k| !k.is_zero());
        out.c += &f * &eq.c;
        out
    }
}

#[derive(Default)]
struct Unknowns {
    index: HashMap<Monomial, usize>,
    monomials: Vec<Monomial>,
}

impl Unknowns {
    fn get(&mut self, m: &Monomial) -> usize {
        if let Some(&i) = self.index.get(m) {
            return i;
        }
        self.monomials.push(m.clone());
        self.index.insert(m.clone(), self.monomials.len() - 1);
        self.monomials.len() - 1
    }
}

enum Outcome {
    Unsat,
    /// Eliminated without contradiction; the payload is a candidate model.
    Open(Option<Vec<BigInt>>),
    GaveUp,
}

impl FeasibilityChecker for FourierMotzkin {
    fn check(&self, dag: &ExprDag, lits: &[Literal]) -> FeasResult {
        let mut unknowns = Unknowns::default();
        let mut ineqs = Vec::new();
        let mut eqs = Vec::new();
        let mut diseqs = Vec::new();
        let mut complete = true;
        for lit in lits {
            let (op, l, r) = match dag.node(lit.ap) {
                ExprNode::Bool(b) => {
                    if *b != lit.positive {
                        return FeasResult::Unsat;
                    }
                    continue;
                }
                ExprNode::Cmp(op, l, r) => (*op, *l, *r),
                _ => {
                    complete = false;
                    continue;
                }
            };
            let polys = Poly::from_expr(dag, l, self.max_monomials).zip(Poly::from_expr(dag, r, self.max_monomials));
            let Some((pl, pr)) = polys else {
                complete = false;
                continue;
            };
            let row = Row::from_poly(&pl.sub(&pr), &mut unknowns);
            match (op, lit.positive) {
                (CmpOp::Lt, true) => ineqs.push(row.plus_const(1)),
                (CmpOp::Lt, false) => ineqs.push(row.neg()),
                (CmpOp::Eq, true) => eqs.push(row),
                (CmpOp::Eq, false) => diseqs.push(row),
            }
        }
        if diseqs.len() > self.max_splits {
            diseqs.clear();
            complete = false;
        }
        // every disequality splits into row < 0 or row > 0
        let mut any_open = false;
        let mut gave_up = false;
        for mask in 0u32..(1 << diseqs.len()) {
            let mut case = ineqs.clone();
            for (i, d) in diseqs.iter().enumerate() {
                case.push(if mask & (1 << i) == 0 {
                    d.clone().plus_const(1)
                } else {
                    d.neg().plus_const(1)
                });
            }
            match self.solve(case, eqs.clone(), unknowns.monomials.len()) {
                Outcome::Unsat => {}
                Outcome::GaveUp => gave_up = true,
                Outcome::Open(model) => {
                    any_open = true;
                    if complete && verify(dag, lits, &unknowns.monomials, model) {
                        return FeasResult::Sat;
                    }
                }
            }
        }
        if !any_open && !gave_up {
            FeasResult::Unsat
        } else {
            FeasResult::Unknown
        }
    }

    fn name(&self) -> &'static str {
        "fourier-motzkin"
    }
}

impl FourierMotzkin {
    fn solve(&self, ineqs: Vec<Row>, mut eqs: Vec<Row>, n: usize) -> Outcome {
        let mut rows: Vec<Row> = Vec::new();
        // (unknown, defining equality), in substitution order
        let mut defined: Vec<(usize, Row)> = Vec::new();
        while let Some(eq) = eqs.pop() {
            let g = eq.coefs.values().fold(BigInt::zero(), |g, k| g.gcd(k));
            if g.is_zero() {
                if !eq.c.is_zero() {
                    return Outcome::Unsat;
                }
                continue;
            }
            if !eq.c.is_multiple_of(&g) {
                return Outcome::Unsat;
            }
            let eq = Row {
                coefs: eq.coefs.iter().map(|(i, k)| (*i, k / &g)).collect(),
                c: &eq.c / &g,
            };
            match eq.coefs.iter().find(|(_, k)| k.abs().is_one()) {
                Some((&x, _)) => {
                    eqs = eqs.iter().map(|r| r.substitute(x, &eq)).collect();
                    for (_, d) in &mut defined {
                        *d = d.substitute(x, &eq);
                    }
                    defined.push((x, eq));
                }
                None => {
                    rows.push(eq.neg());
                    rows.push(eq);
                }
            }
        }
        for r in ineqs {
            let r = defined.iter().fold(r, |r, (x, eq)| r.substitute(*x, eq));
            rows.push(r);
        }
        let mut rows = match tighten_all(rows) {
            Some(r) => r,
            None => return Outcome::Unsat,
        };

        // eliminate unknowns, cheapest first
        let mut stages: Vec<(usize, Vec<Row>)> = Vec::new();
        loop {
            let mut pos: BTreeMap<usize, usize> = BTreeMap::new();
            let mut neg: BTreeMap<usize, usize> = BTreeMap::new();
            for r in &rows {
                for (i, k) in &r.coefs {
                    if k.is_positive() {
                        *pos.entry(*i).or_default() += 1;
                    } else {
                        *neg.entry(*i).or_default() += 1;
                    }
                }
            }
            let vars: BTreeSet<usize> = pos.keys().chain(neg.keys()).copied().collect();
            let Some(x) = vars.into_iter().min_by_key(|i| {
                let p = pos.get(i).copied().unwrap_or(0);
                let m = neg.get(i).copied().unwrap_or(0);
                p * m
            }) else {
                break;
            };
            let (with, without): (Vec<Row>, Vec<Row>) = rows.into_iter().partition(|r| r.coefs.contains_key(&x));
            let mut next = without;
            let (ps, ns): (Vec<&Row>, Vec<&Row>) = with.iter().partition(|r| r.coefs[&x].is_positive());
            for p in &ps {
                for q in &ns {
                    let a = &p.coefs[&x];
                    let b = -&q.coefs[&x];
                    let mut coefs = BTreeMap::new();
                    for (i, k) in &p.coefs {
                        *coefs.entry(*i).or_insert_with(BigInt::zero) += &b * k;
                    }
                    for (i, k) in &q.coefs {
                        *coefs.entry(*i).or_insert_with(BigInt::zero) += a * k;
                    }
                    coefs.retain(|_, k: &mut BigInt| !k.is_zero());
                    let c = &b * &p.c + a * &q.c;
                    next.push(Row { coefs, c });
                }
            }
            if next.len() > self.max_constraints {
                return Outcome::GaveUp;
            }
            rows = match tighten_all(next) {
                Some(r) => r,
                None => return Outcome::Unsat,
            };
            stages.push((x, with));
        }

        // back-substitute a candidate integer model
        let mut model: Vec<Option<BigInt>> = vec![None; n];
        for (x, with) in stages.iter().rev() {
            let mut lo: Option<BigInt> = None;
            let mut hi: Option<BigInt> = None;
            for r in with {
                let a = &r.coefs[x];
                // a·x + rest ≤ 0
                let mut rest = r.c.clone();
                for (i, k) in &r.coefs {
                    if i != x {
                        rest += k * model[*i].clone().unwrap_or_default();
                    }
                }
                let bound = -rest;
                if a.is_positive() {
                    let b = Integer::div_floor(&bound, a);
                    hi = Some(hi.map_or(b.clone(), |h| h.min(b)));
                } else {
                    let b = Integer::div_ceil(&bound, a);
                    lo = Some(lo.map_or(b.clone(), |l| l.max(b)));
                }
            }
            let v = match (lo, hi) {
                (Some(l), Some(h)) if l > h => return Outcome::Open(None),
                (Some(l), _) if l.is_positive() => l,
                (_, Some(h)) if h.is_negative() => h,
                _ => BigInt::zero(),
            };
            model[*x] = Some(v);
        }
        for (x, eq) in defined.iter().rev() {
            let b = &eq.coefs[x];
            let mut rest = eq.c.clone();
            for (i, k) in &eq.coefs {
                if i != x {
                    rest += k * model[*i].clone().unwrap_or_default();
                }
            }
            model[*x] = Some(-rest * b);
        }
        Outcome::Open(Some(model.into_iter().map(Option::unwrap_or_default).collect()))
    }
}

/// Tightens every row and keeps only the strongest bound among rows over a
/// single unknown.
fn tighten_all(rows: Vec<Row>) -> Option<Vec<Row>> {
    let mut out = BTreeSet::new();
    // (unknown, positive) -> largest constant of `±x + c ≤ 0`
    let mut bounds: BTreeMap<(usize, bool), BigInt> = BTreeMap::new();
    for r in rows {
        let r = r.tighten()?;
        if r.is_trivial() {
            continue;
        }
        if r.coefs.len() == 1 {
            let (&x, k) = r.coefs.iter().next().expect("one coefficient");
            if k.abs().is_one() {
                let b = bounds.entry((x, k.is_positive())).or_insert_with(|| r.c.clone());
                if r.c > *b {
                    *b = r.c;
                }
                continue;
            }
        }
        out.insert(r);
    }
    for ((x, positive), c) in bounds {
        let k = if positive { BigInt::one() } else { -BigInt::one() };
        out.insert(Row {
            coefs: BTreeMap::from([(x, k)]),
            c,
        });
    }
    Some(out.into_iter().collect())
}

/// Checks the candidate against the original literals. Only possible when
/// every unknown is a plain variable.
fn verify(dag: &ExprDag, lits: &[Literal], unknowns: &[Monomial], model: Option<Vec<BigInt>>) -> bool {
    let Some(model) = model else {
        return false;
    };
    let mut st = ConcreteState::new();
    for (m, v) in unknowns.iter().zip(model) {
        match m.as_var() {
            Some(x) => st.set(x, v),
            None => return false,
        }
    }
    for e in dag.reachable(lits.iter().map(|l| l.ap)) {
        if let ExprNode::Var(v) = dag.node(e) {
            if !st.contains(*v) {
                st.set(*v, BigInt::zero());
            }
        }
    }
    let mut memo = EvalCache::new();
    let mut cost = CostReport::default();
    lits.iter()
        .all(|lit| matches!(dag.eval(lit.ap, &st, &mut memo, &mut cost), Ok(Value::Bool(b)) if b == lit.positive))
}
