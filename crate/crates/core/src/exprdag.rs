//! Hash-consed expression DAG.
//!
//! Every arithmetic expression, Boolean expression and atomic proposition of a
//! compilation unit lives in one [`ExprDag`] and exists there exactly once:
//! interning a node that is structurally equal to an existing one returns the
//! existing [`ExprId`]. Decision-diagram predicates and parallel-assignment
//! right-hand sides only hold ids into this table, so sharing between them is
//! automatic.
//!
//! Evaluation is memoised per [`EvalCache`] scope. Inside one scope every
//! operator node is computed (and charged) at most once, which is how the
//! cost model accounts for shared sub-expressions.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::CostReport;

/// Handle of a node in an [`ExprDag`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExprId(pub(crate) u32);

impl ExprId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Interned program variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub(crate) u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Eq,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Eq => "==",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LogicOp {
    And,
    Or,
}

impl LogicOp {
    pub fn symbol(self) -> &'static str {
        match self {
            LogicOp::And => "&&",
            LogicOp::Or => "||",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExprNode {
    Const(BigInt),
    Var(VarId),
    Bool(bool),
    Arith(ArithOp, ExprId, ExprId),
    Cmp(CmpOp, ExprId, ExprId),
    Not(ExprId),
    Logic(LogicOp, ExprId, ExprId),
}

impl ExprNode {
    pub fn sort(&self) -> Sort {
        match self {
            ExprNode::Const(_) | ExprNode::Var(_) | ExprNode::Arith(..) => Sort::Int,
            _ => Sort::Bool,
        }
    }

    /// Children in left-to-right order.
    pub fn children(&self) -> impl Iterator<Item = ExprId> {
        let (a, b) = match *self {
            ExprNode::Arith(_, l, r) | ExprNode::Cmp(_, l, r) | ExprNode::Logic(_, l, r) => (Some(l), Some(r)),
            ExprNode::Not(x) => (Some(x), None),
            _ => (None, None),
        };
        a.into_iter().chain(b)
    }

    fn is_operator(&self) -> bool {
        !matches!(self, ExprNode::Const(_) | ExprNode::Var(_) | ExprNode::Bool(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sort {
    Int,
    Bool,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Int => f.write_str("arithmetic"),
            Sort::Bool => f.write_str("Boolean"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Int(BigInt),
    Bool(bool),
}

impl Value {
    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Value::Int(v) => Some(v),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Int(_) => None,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("division by zero in `{expr}`")]
    DivisionByZero { node: ExprId, expr: String },
    #[error("variable `{name}` is unbound")]
    Unbound { var: VarId, name: String },
}

/// Append-only interning table for expressions.
#[derive(Clone, Debug, Default)]
pub struct ExprDag {
    nodes: Vec<ExprNode>,
    index: HashMap<ExprNode, ExprId>,
    vars: Vec<String>,
    var_index: HashMap<String, VarId>,
}

impl ExprDag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, e: ExprId) -> &ExprNode {
        &self.nodes[e.index()]
    }

    pub fn sort(&self, e: ExprId) -> Sort {
        self.node(e).sort()
    }

    pub fn ids(&self) -> impl Iterator<Item = ExprId> {
        (0..self.nodes.len() as u32).map(ExprId)
    }

    /// Returns the existing id of a structurally equal node or appends a new one.
    ///
    /// Children must already be interned and sort-correct.
    pub fn intern(&mut self, node: ExprNode) -> ExprId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        debug_assert!(self.well_sorted(&node), "ill-sorted node {node:?}");
        let id = ExprId(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.index.insert(node, id);
        id
    }

    /// Looks a node up without interning it.
    pub fn find(&self, node: &ExprNode) -> Option<ExprId> {
        self.index.get(node).copied()
    }

    fn well_sorted(&self, node: &ExprNode) -> bool {
        let all = |want: Sort| node.children().all(|c| self.sort(c) == want);
        match node {
            ExprNode::Arith(..) | ExprNode::Cmp(..) => all(Sort::Int),
            ExprNode::Not(_) | ExprNode::Logic(..) => all(Sort::Bool),
            _ => true,
        }
    }

    pub fn var_id(&mut self, name: &str) -> VarId {
        if let Some(&v) = self.var_index.get(name) {
            return v;
        }
        let v = VarId(self.vars.len() as u32);
        self.vars.push(name.to_string());
        self.var_index.insert(name.to_string(), v);
        v
    }

    pub fn lookup_var(&self, name: &str) -> Option<VarId> {
        self.var_index.get(name).copied()
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.vars[v.index()]
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.vars
    }

    pub fn var(&mut self, v: VarId) -> ExprId {
        self.intern(ExprNode::Var(v))
    }

    pub fn named_var(&mut self, name: &str) -> ExprId {
        let v = self.var_id(name);
        self.var(v)
    }

    pub fn constant(&mut self, value: impl Into<BigInt>) -> ExprId {
        self.intern(ExprNode::Const(value.into()))
    }

    pub fn boolean(&mut self, value: bool) -> ExprId {
        self.intern(ExprNode::Bool(value))
    }

    pub fn arith(&mut self, op: ArithOp, l: ExprId, r: ExprId) -> ExprId {
        self.intern(ExprNode::Arith(op, l, r))
    }

    pub fn add(&mut self, l: ExprId, r: ExprId) -> ExprId {
        self.arith(ArithOp::Add, l, r)
    }

    pub fn sub(&mut self, l: ExprId, r: ExprId) -> ExprId {
        self.arith(ArithOp::Sub, l, r)
    }

    pub fn mul(&mut self, l: ExprId, r: ExprId) -> ExprId {
        self.arith(ArithOp::Mul, l, r)
    }

    pub fn div(&mut self, l: ExprId, r: ExprId) -> ExprId {
        self.arith(ArithOp::Div, l, r)
    }

    pub fn cmp(&mut self, op: CmpOp, l: ExprId, r: ExprId) -> ExprId {
        self.intern(ExprNode::Cmp(op, l, r))
    }

    pub fn lt(&mut self, l: ExprId, r: ExprId) -> ExprId {
        self.cmp(CmpOp::Lt, l, r)
    }

    pub fn eq(&mut self, l: ExprId, r: ExprId) -> ExprId {
        self.cmp(CmpOp::Eq, l, r)
    }

    pub fn not(&mut self, e: ExprId) -> ExprId {
        self.intern(ExprNode::Not(e))
    }

    pub fn and(&mut self, l: ExprId, r: ExprId) -> ExprId {
        self.intern(ExprNode::Logic(LogicOp::And, l, r))
    }

    pub fn or(&mut self, l: ExprId, r: ExprId) -> ExprId {
        self.intern(ExprNode::Logic(LogicOp::Or, l, r))
    }

    /// Herbrand interpretation of `e` under `s`: every variable is replaced by
    /// its image, nothing is evaluated. The result is interned with maximal
    /// sharing.
    pub fn substitute(&mut self, e: ExprId, s: &SymbolicState) -> ExprId {
        if s.is_identity() {
            return e;
        }
        let mut memo = HashMap::new();
        self.substitute_memo(e, s, &mut memo)
    }

    /// Substitution with a caller-owned memo; the memo is only valid for one `s`.
    pub fn substitute_memo(&mut self, e: ExprId, s: &SymbolicState, memo: &mut HashMap<ExprId, ExprId>) -> ExprId {
        if let Some(&r) = memo.get(&e) {
            return r;
        }
        let node = self.node(e).clone();
        let out = match node {
            ExprNode::Var(v) => s.get(v).unwrap_or(e),
            ExprNode::Const(_) | ExprNode::Bool(_) => e,
            ExprNode::Arith(op, l, r) => {
                let l = self.substitute_memo(l, s, memo);
                let r = self.substitute_memo(r, s, memo);
                self.arith(op, l, r)
            }
            ExprNode::Cmp(op, l, r) => {
                let l = self.substitute_memo(l, s, memo);
                let r = self.substitute_memo(r, s, memo);
                self.cmp(op, l, r)
            }
            ExprNode::Logic(op, l, r) => {
                let l = self.substitute_memo(l, s, memo);
                let r = self.substitute_memo(r, s, memo);
                self.intern(ExprNode::Logic(op, l, r))
            }
            ExprNode::Not(x) => {
                let x = self.substitute_memo(x, s, memo);
                self.not(x)
            }
        };
        memo.insert(e, out);
        out
    }

    /// Memoised evaluation. Operator nodes seen for the first time in `memo`'s
    /// current scope are charged to `cost`; leaves are free.
    pub fn eval(
        &self,
        e: ExprId,
        st: &ConcreteState,
        memo: &mut EvalCache,
        cost: &mut CostReport,
    ) -> Result<Value, EvalError> {
        if let Some(v) = memo.get(e) {
            return Ok(v.clone());
        }
        let node = self.node(e);
        let value = match node {
            ExprNode::Const(c) => return Ok(Value::Int(c.clone())),
            ExprNode::Bool(b) => return Ok(Value::Bool(*b)),
            ExprNode::Var(v) => return self.lookup(*v, st).map(|x| Value::Int(x.clone())),
            ExprNode::Arith(op, l, r) => {
                let l = self.eval(*l, st, memo, cost)?;
                let r = self.eval(*r, st, memo, cost)?;
                self.apply_arith(e, *op, int(&l), int(&r))?
            }
            ExprNode::Cmp(op, l, r) => {
                let l = self.eval(*l, st, memo, cost)?;
                let r = self.eval(*r, st, memo, cost)?;
                Value::Bool(apply_cmp(*op, int(&l), int(&r)))
            }
            ExprNode::Not(x) => Value::Bool(!boolean(&self.eval(*x, st, memo, cost)?)),
            ExprNode::Logic(op, l, r) => {
                // no short-circuit: both operands are always evaluated
                let l = boolean(&self.eval(*l, st, memo, cost)?);
                let r = boolean(&self.eval(*r, st, memo, cost)?);
                Value::Bool(apply_logic(*op, l, r))
            }
        };
        cost.charge(node);
        memo.put(e, value.clone());
        Ok(value)
    }

    /// Evaluation over the expression viewed as a syntax tree: every operator
    /// occurrence is charged, shared or not.
    pub fn eval_tree(&self, e: ExprId, st: &ConcreteState, cost: &mut CostReport) -> Result<Value, EvalError> {
        let node = self.node(e);
        let value = match node {
            ExprNode::Const(c) => return Ok(Value::Int(c.clone())),
            ExprNode::Bool(b) => return Ok(Value::Bool(*b)),
            ExprNode::Var(v) => return self.lookup(*v, st).map(|x| Value::Int(x.clone())),
            ExprNode::Arith(op, l, r) => {
                let l = self.eval_tree(*l, st, cost)?;
                let r = self.eval_tree(*r, st, cost)?;
                self.apply_arith(e, *op, int(&l), int(&r))?
            }
            ExprNode::Cmp(op, l, r) => {
                let l = self.eval_tree(*l, st, cost)?;
                let r = self.eval_tree(*r, st, cost)?;
                Value::Bool(apply_cmp(*op, int(&l), int(&r)))
            }
            ExprNode::Not(x) => Value::Bool(!boolean(&self.eval_tree(*x, st, cost)?)),
            ExprNode::Logic(op, l, r) => {
                let l = boolean(&self.eval_tree(*l, st, cost)?);
                let r = boolean(&self.eval_tree(*r, st, cost)?);
                Value::Bool(apply_logic(*op, l, r))
            }
        };
        cost.charge(node);
        Ok(value)
    }

    /// Cost-free evaluation, for oracles and assertions.
    pub fn value(&self, e: ExprId, st: &ConcreteState) -> Result<Value, EvalError> {
        let mut memo = EvalCache::new();
        self.eval(e, st, &mut memo, &mut CostReport::default())
    }

    fn lookup<'a>(&self, v: VarId, st: &'a ConcreteState) -> Result<&'a BigInt, EvalError> {
        st.get(v).ok_or_else(|| EvalError::Unbound {
            var: v,
            name: self.var_name(v).to_string(),
        })
    }

    fn apply_arith(&self, e: ExprId, op: ArithOp, l: &BigInt, r: &BigInt) -> Result<Value, EvalError> {
        Ok(Value::Int(match op {
            ArithOp::Add => l + r,
            ArithOp::Sub => l - r,
            ArithOp::Mul => l * r,
            ArithOp::Div => {
                if r.is_zero() {
                    return Err(EvalError::DivisionByZero {
                        node: e,
                        expr: self.show(e).to_string(),
                    });
                }
                // BigInt division truncates toward zero
                l / r
            }
        }))
    }

    /// Variables occurring in `e`.
    pub fn vars_of(&self, e: ExprId) -> Vec<VarId> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        let mut stack = vec![e];
        while let Some(x) = stack.pop() {
            if std::mem::replace(&mut seen[x.index()], true) {
                continue;
            }
            match self.node(x) {
                ExprNode::Var(v) => out.push(*v),
                n => stack.extend(n.children()),
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Number of distinct operator nodes reachable from `e`.
    pub fn operator_count(&self, e: ExprId) -> usize {
        self.reachable([e]).filter(|&x| self.node(x).is_operator()).count()
    }

    /// All nodes reachable from `roots`, in ascending id order.
    pub fn reachable(&self, roots: impl IntoIterator<Item = ExprId>) -> impl Iterator<Item = ExprId> {
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<ExprId> = roots.into_iter().collect();
        while let Some(x) = stack.pop() {
            if std::mem::replace(&mut seen[x.index()], true) {
                continue;
            }
            stack.extend(self.node(x).children());
        }
        seen.into_iter()
            .enumerate()
            .filter(|(_, s)| *s)
            .map(|(i, _)| ExprId(i as u32))
    }

    /// Copies the nodes reachable from `roots` into a fresh table. The variable
    /// table is kept whole; relative id order is preserved.
    pub fn compact(&self, roots: impl IntoIterator<Item = ExprId>) -> (ExprDag, HashMap<ExprId, ExprId>) {
        let mut out = ExprDag {
            vars: self.vars.clone(),
            var_index: self.var_index.clone(),
            ..ExprDag::default()
        };
        let mut map = HashMap::new();
        for id in self.reachable(roots) {
            let node = match self.node(id).clone() {
                ExprNode::Arith(op, l, r) => ExprNode::Arith(op, map[&l], map[&r]),
                ExprNode::Cmp(op, l, r) => ExprNode::Cmp(op, map[&l], map[&r]),
                ExprNode::Logic(op, l, r) => ExprNode::Logic(op, map[&l], map[&r]),
                ExprNode::Not(x) => ExprNode::Not(map[&x]),
                n => n,
            };
            map.insert(id, out.intern(node));
        }
        (out, map)
    }

    pub fn show(&self, e: ExprId) -> Show<'_> {
        Show { dag: self, e }
    }
}

fn int(v: &Value) -> &BigInt {
    v.as_int().expect("sort-checked arithmetic operand")
}

fn boolean(v: &Value) -> bool {
    v.as_bool().expect("sort-checked Boolean operand")
}

fn apply_cmp(op: CmpOp, l: &BigInt, r: &BigInt) -> bool {
    match op {
        CmpOp::Lt => l < r,
        CmpOp::Eq => l == r,
    }
}

fn apply_logic(op: LogicOp, l: bool, r: bool) -> bool {
    match op {
        LogicOp::And => l && r,
        LogicOp::Or => l || r,
    }
}

fn precedence(node: &ExprNode) -> u8 {
    match node {
        ExprNode::Logic(LogicOp::Or, ..) => 1,
        ExprNode::Logic(LogicOp::And, ..) => 2,
        ExprNode::Cmp(..) => 3,
        ExprNode::Arith(ArithOp::Add | ArithOp::Sub, ..) => 4,
        ExprNode::Arith(ArithOp::Mul | ArithOp::Div, ..) => 5,
        _ => 6,
    }
}

/// Pretty printer in the concrete source syntax, minimally parenthesised.
pub struct Show<'a> {
    dag: &'a ExprDag,
    e: ExprId,
}

impl Show<'_> {
    fn write(&self, f: &mut fmt::Formatter<'_>, e: ExprId) -> fmt::Result {
        let node = self.dag.node(e);
        let p = precedence(node);
        let side = |f: &mut fmt::Formatter<'_>, c: ExprId, strict: bool| {
            let cp = precedence(self.dag.node(c));
            if cp < p || (strict && cp == p) {
                f.write_str("(")?;
                self.write(f, c)?;
                f.write_str(")")
            } else {
                self.write(f, c)
            }
        };
        match node {
            ExprNode::Const(c) => write!(f, "{c}"),
            ExprNode::Bool(b) => write!(f, "{b}"),
            ExprNode::Var(v) => f.write_str(self.dag.var_name(*v)),
            ExprNode::Arith(op, l, r) => {
                side(f, *l, false)?;
                write!(f, " {} ", op.symbol())?;
                side(f, *r, true)
            }
            ExprNode::Cmp(op, l, r) => {
                side(f, *l, true)?;
                write!(f, " {} ", op.symbol())?;
                side(f, *r, true)
            }
            ExprNode::Logic(op, l, r) => {
                side(f, *l, false)?;
                write!(f, " {} ", op.symbol())?;
                side(f, *r, true)
            }
            ExprNode::Not(x) => match self.dag.node(*x) {
                ExprNode::Bool(_) | ExprNode::Not(_) => {
                    f.write_str("!")?;
                    self.write(f, *x)
                }
                _ => {
                    f.write_str("!(")?;
                    self.write(f, *x)?;
                    f.write_str(")")
                }
            },
        }
    }
}

impl fmt::Display for Show<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, self.e)
    }
}

/// Concrete program state: variable to integer.
#[derive(Clone, Debug, Default)]
pub struct ConcreteState {
    values: Vec<Option<BigInt>>,
}

impl ConcreteState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a state from `(name, value)` pairs, interning names in `dag`.
    pub fn from_named<I, S, V>(dag: &mut ExprDag, pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, V)>,
        S: AsRef<str>,
        V: Into<BigInt>,
    {
        let mut st = Self::new();
        for (name, value) in pairs {
            let v = dag.var_id(name.as_ref());
            st.set(v, value.into());
        }
        st
    }

    pub fn get(&self, v: VarId) -> Option<&BigInt> {
        self.values.get(v.index()).and_then(Option::as_ref)
    }

    pub fn set(&mut self, v: VarId, value: BigInt) {
        if self.values.len() <= v.index() {
            self.values.resize(v.index() + 1, None);
        }
        self.values[v.index()] = Some(value);
    }

    pub fn remove(&mut self, v: VarId) {
        if let Some(slot) = self.values.get_mut(v.index()) {
            *slot = None;
        }
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.get(v).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &BigInt)> {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, x)| x.as_ref().map(|x| (VarId(i as u32), x)))
    }

    pub fn named<'a>(&'a self, dag: &'a ExprDag) -> BTreeMap<&'a str, &'a BigInt> {
        self.iter().map(|(v, x)| (dag.var_name(v), x)).collect()
    }

    /// `⟦s⟧(self)`: applies a parallel assignment, every right-hand side read
    /// against the unmodified state.
    pub fn apply(&self, dag: &ExprDag, s: &SymbolicState) -> Result<ConcreteState, EvalError> {
        let mut memo = EvalCache::new();
        let mut out = self.clone();
        for (v, e) in s.iter() {
            let value = dag.eval(e, self, &mut memo, &mut CostReport::default())?;
            out.set(v, int(&value).clone());
        }
        Ok(out)
    }
}

impl PartialEq for ConcreteState {
    fn eq(&self, other: &Self) -> bool {
        self.iter().eq(other.iter())
    }
}

impl Eq for ConcreteState {}

/// Symbolic program state (parallel assignment). Variables without an entry
/// map to their own symbolic initial value; identity entries are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolicState {
    map: BTreeMap<VarId, ExprId>,
}

impl SymbolicState {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn is_identity(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, v: VarId) -> Option<ExprId> {
        self.map.get(&v).copied()
    }

    /// Image of `v`, which is `v`'s own variable node when unmapped.
    pub fn image(&self, dag: &mut ExprDag, v: VarId) -> ExprId {
        match self.get(v) {
            Some(e) => e,
            None => dag.var(v),
        }
    }

    /// Sets `v ↦ e`, dropping the entry when `e` is `v` itself.
    pub fn set(&mut self, dag: &ExprDag, v: VarId, e: ExprId) {
        if matches!(dag.node(e), ExprNode::Var(w) if *w == v) {
            self.map.remove(&v);
        } else {
            self.map.insert(v, e);
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, ExprId)> + '_ {
        self.map.iter().map(|(v, e)| (*v, *e))
    }

    pub fn map_exprs(&self, mut f: impl FnMut(ExprId) -> ExprId) -> SymbolicState {
        SymbolicState {
            map: self.map.iter().map(|(v, e)| (*v, f(*e))).collect(),
        }
    }

    pub fn show<'a>(&'a self, dag: &'a ExprDag) -> impl fmt::Display + 'a {
        ShowState { dag, s: self }
    }
}

impl FromIterator<(VarId, ExprId)> for SymbolicState {
    fn from_iter<T: IntoIterator<Item = (VarId, ExprId)>>(iter: T) -> Self {
        SymbolicState {
            map: iter.into_iter().collect(),
        }
    }
}

struct ShowState<'a> {
    dag: &'a ExprDag,
    s: &'a SymbolicState,
}

impl fmt::Display for ShowState<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, e)) in self.s.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} := {}", self.dag.var_name(v), self.dag.show(e))?;
        }
        f.write_str("}")
    }
}

/// Evaluation memo. `reset` starts a new scope in O(1).
#[derive(Clone, Debug, Default)]
pub struct EvalCache {
    slots: Vec<Option<(u32, Value)>>,
    generation: u32,
}

impl EvalCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.slots.clear();
        }
    }

    fn get(&self, e: ExprId) -> Option<&Value> {
        match self.slots.get(e.index()) {
            Some(Some((g, v))) if *g == self.generation => Some(v),
            _ => None,
        }
    }

    fn put(&mut self, e: ExprId, v: Value) {
        if self.slots.len() <= e.index() {
            self.slots.resize(e.index() + 1, None);
        }
        self.slots[e.index()] = Some((self.generation, v));
    }
}

impl CostReport {
    fn charge(&mut self, node: &ExprNode) {
        match node {
            ExprNode::Arith(..) => self.arith += 1,
            ExprNode::Cmp(..) => self.compare += 1,
            ExprNode::Not(_) | ExprNode::Logic(..) => self.logic += 1,
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(dag: &mut ExprDag, pairs: &[(&str, i64)]) -> ConcreteState {
        ConcreteState::from_named(dag, pairs.iter().map(|(n, v)| (*n, *v)))
    }

    #[test]
    fn interning_is_perfectly_shared() {
        let mut dag = ExprDag::new();
        let n1 = dag.named_var("n");
        let n2 = dag.named_var("n");
        assert_eq!(n1, n2);
        let c = dag.constant(3);
        let before = dag.len();
        assert_eq!(dag.constant(3), c);
        assert_eq!(dag.len(), before);
    }

    #[test]
    fn eval_sum_costs_one() {
        let mut dag = ExprDag::new();
        let x = dag.named_var("x");
        let y = dag.named_var("y");
        let t = dag.add(x, y);
        let st = state(&mut dag, &[("x", 5), ("y", 4)]);
        let mut cost = CostReport::default();
        let v = dag.eval(t, &st, &mut EvalCache::new(), &mut cost).unwrap();
        assert_eq!(v, Value::Int(9.into()));
        assert_eq!(cost.total(), 1);
    }

    #[test]
    fn constants_are_free() {
        let mut dag = ExprDag::new();
        let c = dag.constant(7);
        let mut cost = CostReport::default();
        let v = dag
            .eval(c, &ConcreteState::new(), &mut EvalCache::new(), &mut cost)
            .unwrap();
        assert_eq!(v, Value::Int(7.into()));
        assert_eq!(cost.total(), 0);
    }

    #[test]
    fn substitution_is_herbrand() {
        let mut dag = ExprDag::new();
        let x = dag.var_id("x");
        let y = dag.var_id("y");
        let (xe, ye) = (dag.var(x), dag.var(y));
        let t = dag.add(xe, ye);
        let three = dag.constant(3);
        let two = dag.constant(2);
        let five_ish = dag.add(three, two);
        let big_y = dag.named_var("Y");
        let mut s = SymbolicState::identity();
        s.set(&dag, x, five_ish);
        s.set(&dag, y, big_y);
        let out = dag.substitute(t, &s);
        assert_eq!(dag.show(out).to_string(), "3 + 2 + Y");
        assert_eq!(out, dag.add(five_ish, big_y));
        assert_eq!(dag.substitute(t, &SymbolicState::identity()), t);
    }

    #[test]
    fn substitution_shares_with_prior_occurrences() {
        let mut dag = ExprDag::new();
        let n = dag.var_id("n");
        let ne = dag.var(n);
        let two = dag.constant(2);
        let one = dag.constant(1);
        let cond = dag.lt(two, ne);
        let dec = dag.sub(ne, one);
        let mut s = SymbolicState::identity();
        s.set(&dag, n, dec);
        let a = dag.substitute(cond, &s);
        let direct = {
            let d = dag.sub(ne, one);
            dag.lt(two, d)
        };
        assert_eq!(a, direct);
    }

    #[test]
    fn shared_subdag_is_charged_once() {
        let mut dag = ExprDag::new();
        let n = dag.named_var("N");
        let (one, two, three) = (dag.constant(1), dag.constant(2), dag.constant(3));
        // flat forms: N-3 and N-2 share nothing but N
        let n3 = dag.sub(n, three);
        let n2 = dag.sub(n, two);
        let a3 = dag.lt(two, n3);
        let a2 = dag.lt(two, n2);
        let st = state(&mut dag, &[("N", 10)]);
        let mut memo = EvalCache::new();
        let mut cost = CostReport::default();
        dag.eval(a3, &st, &mut memo, &mut cost).unwrap();
        let mut second = CostReport::default();
        dag.eval(a2, &st, &mut memo, &mut second).unwrap();
        assert_eq!(second.total(), 2);

        // nested forms: ((N-1)-1)-1 contains (N-1)-1
        let m1 = dag.sub(n, one);
        let m2 = dag.sub(m1, one);
        let m3 = dag.sub(m2, one);
        let mut memo = EvalCache::new();
        dag.eval(m2, &st, &mut memo, &mut CostReport::default()).unwrap();
        let mut third = CostReport::default();
        dag.eval(m3, &st, &mut memo, &mut third).unwrap();
        assert_eq!(third.total(), 1);
    }

    #[test]
    fn division_truncates_toward_zero_and_traps_on_zero() {
        let mut dag = ExprDag::new();
        let x = dag.named_var("x");
        let y = dag.named_var("y");
        let q = dag.div(x, y);
        let st = state(&mut dag, &[("x", -7), ("y", 2)]);
        assert_eq!(dag.value(q, &st).unwrap(), Value::Int((-3).into()));
        let st = state(&mut dag, &[("x", 1), ("y", 0)]);
        assert!(matches!(dag.value(q, &st), Err(EvalError::DivisionByZero { .. })));
    }

    #[test]
    fn logic_is_not_short_circuit() {
        let mut dag = ExprDag::new();
        let x = dag.named_var("x");
        let one = dag.constant(1);
        let f = dag.boolean(false);
        let c = dag.lt(x, one);
        let both = dag.and(f, c);
        let st = state(&mut dag, &[("x", 0)]);
        let mut cost = CostReport::default();
        dag.eval_tree(both, &st, &mut cost).unwrap();
        assert_eq!((cost.logic, cost.compare), (1, 1));
    }

    #[test]
    fn printing_parenthesises_right_operands() {
        let mut dag = ExprDag::new();
        let a = dag.named_var("a");
        let b = dag.named_var("b");
        let c = dag.named_var("c");
        let bc = dag.sub(b, c);
        let e = dag.sub(a, bc);
        assert_eq!(dag.show(e).to_string(), "a - (b - c)");
        let ab = dag.sub(a, b);
        let e = dag.sub(ab, c);
        assert_eq!(dag.show(e).to_string(), "a - b - c");
    }

    #[test]
    fn compact_keeps_only_reachable_nodes() {
        let mut dag = ExprDag::new();
        let x = dag.named_var("x");
        let one = dag.constant(1);
        let _junk = dag.mul(x, x);
        let keep = dag.add(x, one);
        let (small, map) = dag.compact([keep]);
        assert_eq!(small.len(), 3);
        assert_eq!(small.show(map[&keep]).to_string(), "x + 1");
    }
}
