use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exprdag::{ArithOp, ExprDag, ExprId, ExprNode, VarId};

/// Polynomial indeterminate: a program variable or an opaque division subterm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Var(VarId),
    Opaque(ExprId),
}

impl Atom {
    fn expr(self, dag: &mut ExprDag) -> ExprId {
        match self {
            Atom::Var(v) => dag.var(v),
            Atom::Opaque(e) => e,
        }
    }
}

/// Product of atoms with positive exponents, sorted by atom.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<(Atom, u32)>);

impl Monomial {
    pub fn atom(a: Atom) -> Self {
        Monomial(vec![(a, 1)])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, k)| k).sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Atom, u32)] {
        &self.0
    }

    /// The single variable of a degree-one monomial.
    pub fn as_var(&self) -> Option<VarId> {
        match self.0[..] {
            [(Atom::Var(v), 1)] => Some(v),
            _ => None,
        }
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut merged: BTreeMap<Atom, u32> = self.0.iter().copied().collect();
        for &(a, k) in &other.0 {
            *merged.entry(a).or_default() += k;
        }
        Monomial(merged.into_iter().collect())
    }
}

/// Higher degree first, then lexicographic; the constant monomial is last.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other.degree().cmp(&self.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse integer polynomial. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigInt>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigInt) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::default(), c);
        p
    }

    pub fn atom(a: Atom) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::atom(a), BigInt::one());
        p
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    /// Non-constant terms.
    pub fn linear_part(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter().filter(|(m, _)| !m.is_constant())
    }

    pub fn constant_term(&self) -> BigInt {
        self.terms.get(&Monomial::default()).cloned().unwrap_or_default()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_constant)
    }

    fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(&-BigInt::one()))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, k: &BigInt) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    /// Gcd of the non-constant coefficients; zero when there are none.
    pub fn content(&self) -> BigInt {
        self.linear_part().fold(BigInt::zero(), |g, (_, c)| g.gcd(c))
    }

    /// Converts an arithmetic expression. `None` once the term count exceeds
    /// `bound`.
    pub fn from_expr(dag: &ExprDag, e: ExprId, bound: usize) -> Option<Poly> {
        let p = match dag.node(e) {
            ExprNode::Const(c) => Poly::constant(c.clone()),
            ExprNode::Var(v) => Poly::atom(Atom::Var(*v)),
            ExprNode::Arith(ArithOp::Div, ..) => Poly::atom(Atom::Opaque(e)),
            ExprNode::Arith(op, l, r) => {
                let l = Poly::from_expr(dag, *l, bound)?;
                let r = Poly::from_expr(dag, *r, bound)?;
                match op {
                    ArithOp::Add => l.add(&r),
                    ArithOp::Sub => l.sub(&r),
                    ArithOp::Mul => {
                        if l.len() * r.len() > bound * 4 {
                            return None;
                        }
                        l.mul(&r)
                    }
                    ArithOp::Div => unreachable!(),
                }
            }
            n => panic!("not an arithmetic node: {n:?}"),
        };
        (p.len() <= bound).then_some(p)
    }

    /// Interns the canonical expression of this polynomial: the first positive
    /// term leads, the others are added or subtracted in monomial order, the
    /// constant comes last.
    pub fn render(&self, dag: &mut ExprDag) -> ExprId {
        if self.terms.is_empty() {
            return dag.constant(0);
        }
        let terms: Vec<(&Monomial, &BigInt)> = self.terms.iter().collect();
        let lead = terms.iter().position(|(_, c)| c.is_positive());
        let mut acc = match lead {
            Some(i) => render_term(dag, terms[i].0, terms[i].1),
            None => {
                // every coefficient is negative
                let (m, c) = terms[0];
                if m.is_constant() {
                    dag.constant(c.clone())
                } else {
                    let k = dag.constant(c.clone());
                    let body = render_monomial(dag, m);
                    dag.mul(k, body)
                }
            }
        };
        let lead = lead.unwrap_or(0);
        for (i, (m, c)) in terms.iter().enumerate() {
            if i == lead {
                continue;
            }
            let t = render_term(dag, m, &c.abs());
            acc = if c.is_positive() {
                dag.add(acc, t)
            } else {
                dag.sub(acc, t)
            };
        }
        acc
    }
}

fn render_monomial(dag: &mut ExprDag, m: &Monomial) -> ExprId {
    let mut acc: Option<ExprId> = None;
    for &(a, k) in m.factors() {
        let x = a.expr(dag);
        for _ in 0..k {
            acc = Some(match acc {
                None => x,
                Some(p) => dag.mul(p, x),
            });
        }
    }
    acc.expect("non-constant monomial")
}

/// `|c| * m` for positive `c`.
fn render_term(dag: &mut ExprDag, m: &Monomial, c: &BigInt) -> ExprId {
    if m.is_constant() {
        return dag.constant(c.clone());
    }
    let body = render_monomial(dag, m);
    if c.is_one() {
        body
    } else {
        let k = dag.constant(c.clone());
        dag.mul(k, body)
    }
}
