use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::poly::Poly;
use crate::exprdag::{CmpOp, ExprDag, ExprId, ExprNode, LogicOp};

pub const DEFAULT_MONOMIAL_BOUND: usize = 256;

/// Rewrites expressions into polynomial normal form.
///
/// Arithmetic terms become sparse polynomials over variables and division
/// subterms; comparisons become `L < 0` or `L = 0` with tightened integer
/// constants; Boolean structure is kept, with constants folded.
#[derive(Clone, Debug)]
pub struct Normalizer {
    bound: usize,
    memo: HashMap<ExprId, ExprId>,
}

impl Default for Normalizer {
    fn default() -> Self {
        Normalizer::new(DEFAULT_MONOMIAL_BOUND)
    }
}

impl Normalizer {
    pub fn new(bound: usize) -> Self {
        Normalizer {
            bound,
            memo: HashMap::new(),
        }
    }

    pub fn normalize(&mut self, dag: &mut ExprDag, e: ExprId) -> ExprId {
        if let Some(&r) = self.memo.get(&e) {
            return r;
        }
        let out = match dag.node(e).clone() {
            ExprNode::Const(_) | ExprNode::Var(_) | ExprNode::Bool(_) => e,
            ExprNode::Arith(..) => match Poly::from_expr(dag, e, self.bound) {
                Some(p) => p.render(dag),
                None => e,
            },
            ExprNode::Cmp(op, l, r) => self.comparison(dag, e, op, l, r),
            ExprNode::Not(x) => {
                let x = self.normalize(dag, x);
                match dag.node(x) {
                    ExprNode::Bool(b) => {
                        let b = !*b;
                        dag.boolean(b)
                    }
                    ExprNode::Not(y) => *y,
                    _ => dag.not(x),
                }
            }
            ExprNode::Logic(op, l, r) => {
                let l = self.normalize(dag, l);
                let r = self.normalize(dag, r);
                let lb = bool_const(dag, l);
                let rb = bool_const(dag, r);
                match (op, lb, rb) {
                    (LogicOp::And, Some(false), _) | (LogicOp::And, _, Some(false)) => dag.boolean(false),
                    (LogicOp::Or, Some(true), _) | (LogicOp::Or, _, Some(true)) => dag.boolean(true),
                    (_, Some(_), _) => r,
                    (_, _, Some(_)) => l,
                    _ => dag.intern(ExprNode::Logic(op, l, r)),
                }
            }
        };
        self.memo.insert(e, out);
        out
    }

    fn comparison(&mut self, dag: &mut ExprDag, e: ExprId, op: CmpOp, l: ExprId, r: ExprId) -> ExprId {
        let (Some(pl), Some(pr)) = (Poly::from_expr(dag, l, self.bound), Poly::from_expr(dag, r, self.bound)) else {
            return e;
        };
        let diff = pl.sub(&pr);
        if diff.len() > self.bound {
            return e;
        }
        let c = diff.constant_term();
        let g = diff.content();
        if g.is_zero() {
            let holds = match op {
                CmpOp::Lt => c.is_negative(),
                CmpOp::Eq => c.is_zero(),
            };
            return dag.boolean(holds);
        }
        let linear = diff.sub(&Poly::constant(c.clone()));
        let (lhs, constant) = match op {
            // g*L' + c < 0  <=>  L' + (ceil((c+1)/g) - 1) < 0
            CmpOp::Lt => {
                let c2 = ceil_div(&(&c + 1), &g) - 1;
                (scale_down(&linear, &g), c2)
            }
            CmpOp::Eq => {
                if !c.is_multiple_of(&g) {
                    return dag.boolean(false);
                }
                let mut lhs = scale_down(&linear, &g);
                let mut c2 = c / &g;
                let lead_negative = lhs.terms().next().is_some_and(|(_, k)| k.is_negative());
                if lead_negative {
                    lhs = lhs.scale(&BigInt::from(-1));
                    c2 = -c2;
                }
                (lhs, c2)
            }
        };
        let lhs = lhs.add(&Poly::constant(constant)).render(dag);
        let zero = dag.constant(0);
        dag.cmp(op, lhs, zero)
    }
}

/// One-shot normalization with the default bound.
pub fn normalize(dag: &mut ExprDag, e: ExprId) -> ExprId {
    Normalizer::default().normalize(dag, e)
}

fn bool_const(dag: &ExprDag, e: ExprId) -> Option<bool> {
    match dag.node(e) {
        ExprNode::Bool(b) => Some(*b),
        _ => None,
    }
}

fn scale_down(p: &Poly, g: &BigInt) -> Poly {
    let mut out = Poly::zero();
    for (m, c) in p.terms() {
        let mut t = Poly::constant(c / g);
        if !m.is_constant() {
            t = t.mul(&monomial_poly(m));
        }
        out = out.add(&t);
    }
    out
}

fn monomial_poly(m: &super::poly::Monomial) -> Poly {
    let mut p = Poly::constant(1.into());
    for &(a, k) in m.factors() {
        for _ in 0..k {
            p = p.mul(&Poly::atom(a));
        }
    }
    p
}

pub(crate) fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    Integer::div_ceil(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdag::ConcreteState;
    use proptest::prelude::*;

    fn parse_expr(dag: &mut ExprDag, src: &str) -> ExprId {
        let stmt = crate::frontend::parse_program(&format!("r := {src}"), dag).unwrap();
        match stmt {
            crate::frontend::Stmt::Assign(_, e) => e,
            _ => unreachable!(),
        }
    }

    fn parse_cond(dag: &mut ExprDag, src: &str) -> ExprId {
        let stmt = crate::frontend::parse_program(&format!("if {src} {{ skip }} else {{ skip }}"), dag).unwrap();
        match stmt {
            crate::frontend::Stmt::If(c, ..) => c,
            _ => unreachable!(),
        }
    }

    #[test]
    fn repeated_decrement() {
        let mut dag = ExprDag::new();
        let e = parse_expr(&mut dag, "((n - 1) - 1) - 1");
        let n = dag.named_var("n");
        let three = dag.constant(3);
        let want = dag.sub(n, three);
        assert_eq!(normalize(&mut dag, e), want);
    }

    #[test]
    fn fibonacci_accumulation() {
        let mut dag = ExprDag::new();
        dag.var_id("fib");
        dag.var_id("prev");
        let e = parse_expr(&mut dag, "(prev + fib) + (fib + (prev + fib))");
        let got = normalize(&mut dag, e);
        assert_eq!(dag.show(got).to_string(), "3 * fib + 2 * prev");
    }

    #[test]
    fn atoms_are_fixed_points() {
        let mut dag = ExprDag::new();
        let x = dag.named_var("x");
        let c = dag.constant(-4);
        assert_eq!(normalize(&mut dag, x), x);
        assert_eq!(normalize(&mut dag, c), c);
    }

    #[test]
    fn division_stays_opaque() {
        let mut dag = ExprDag::new();
        let e = parse_expr(&mut dag, "x / y + x / y");
        let got = normalize(&mut dag, e);
        assert_eq!(dag.show(got).to_string(), "2 * (x / y)");
    }

    #[test]
    fn strict_comparison_tightening() {
        let mut dag = ExprDag::new();
        let e = parse_cond(&mut dag, "2 < n - 3");
        let got = normalize(&mut dag, e);
        assert_eq!(dag.show(got).to_string(), "5 - n < 0");
        let e = parse_cond(&mut dag, "2 * x + 3 < 0");
        let got = normalize(&mut dag, e);
        assert_eq!(dag.show(got).to_string(), "x + 1 < 0");
    }

    #[test]
    fn equality_canonical_sign_and_gcd() {
        let mut dag = ExprDag::new();
        let a = parse_cond(&mut dag, "4 == 2 * x");
        let b = parse_cond(&mut dag, "x + x == 4");
        let na = normalize(&mut dag, a);
        let nb = normalize(&mut dag, b);
        assert_eq!(na, nb);
        assert_eq!(dag.show(na).to_string(), "x - 2 == 0");
        let odd = parse_cond(&mut dag, "2 * x == 3");
        let f = normalize(&mut dag, odd);
        assert_eq!(*dag.node(f), ExprNode::Bool(false));
    }

    #[test]
    fn constant_comparisons_fold() {
        let mut dag = ExprDag::new();
        let e = parse_cond(&mut dag, "1 < 2 && !(x - x == 0) || n < n + 1");
        let got = normalize(&mut dag, e);
        assert_eq!(*dag.node(got), ExprNode::Bool(true));
    }

    #[test]
    fn size_guard_returns_input() {
        let mut dag = ExprDag::new();
        let e = parse_expr(&mut dag, "(a + b + c) * (a + b + c) * (a + b + c)");
        let got = Normalizer::new(4).normalize(&mut dag, e);
        assert_eq!(got, e);
    }

    // --- random expressions ---

    #[derive(Clone, Debug)]
    enum T {
        C(i64),
        V(usize),
        Add(Box<T>, Box<T>),
        Sub(Box<T>, Box<T>),
        Mul(Box<T>, Box<T>),
        Div(Box<T>, i64),
    }

    fn term() -> impl Strategy<Value = T> {
        let leaf = prop_oneof![(-5i64..6).prop_map(T::C), (0usize..3).prop_map(T::V)];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| T::Add(a.into(), b.into())),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| T::Sub(a.into(), b.into())),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| T::Mul(a.into(), b.into())),
                (inner, prop_oneof![-3i64..0, 1i64..4]).prop_map(|(a, d)| T::Div(a.into(), d)),
            ]
        })
    }

    fn build(dag: &mut ExprDag, t: &T) -> ExprId {
        match t {
            T::C(c) => dag.constant(*c),
            T::V(i) => dag.named_var(["x", "y", "z"][*i]),
            T::Add(a, b) => {
                let (a, b) = (build(dag, a), build(dag, b));
                dag.add(a, b)
            }
            T::Sub(a, b) => {
                let (a, b) = (build(dag, a), build(dag, b));
                dag.sub(a, b)
            }
            T::Mul(a, b) => {
                let (a, b) = (build(dag, a), build(dag, b));
                dag.mul(a, b)
            }
            T::Div(a, d) => {
                let a = build(dag, a);
                let d = dag.constant(*d);
                dag.div(a, d)
            }
        }
    }

    proptest! {
        #[test]
        fn normalization_preserves_values(t in term(), s in term(), xs in prop::array::uniform3(-30i64..30)) {
            let mut dag = ExprDag::new();
            let e = build(&mut dag, &t);
            let f = build(&mut dag, &s);
            let lt = dag.lt(e, f);
            let eq = dag.eq(e, f);
            let st = ConcreteState::from_named(&mut dag, [("x", xs[0]), ("y", xs[1]), ("z", xs[2])]);
            let mut norm = Normalizer::default();
            for root in [e, lt, eq] {
                let n = norm.normalize(&mut dag, root);
                prop_assert_eq!(dag.value(root, &st).unwrap(), dag.value(n, &st).unwrap());
                prop_assert_eq!(norm.normalize(&mut dag, n), n);
            }
        }

        #[test]
        fn equal_polynomials_share_a_node(t in term(), s in term()) {
            // t + s and s + t expand to the same polynomial
            let mut dag = ExprDag::new();
            let a = build(&mut dag, &t);
            let b = build(&mut dag, &s);
            let ab = dag.add(a, b);
            let ba = dag.add(b, a);
            let bound = DEFAULT_MONOMIAL_BOUND;
            prop_assume!(Poly::from_expr(&dag, ab, bound).is_some());
            prop_assert_eq!(normalize(&mut dag, ab), normalize(&mut dag, ba));
        }
    }
}
