use std::fmt;

use crate::exprdag::{ExprDag, ExprId, VarId};

/// Statement tree. Expressions live in the program's [`ExprDag`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    Assign(VarId, ExprId),
    Skip,
    /// At least two statements, none of them a `Seq`.
    Seq(Vec<Stmt>),
    If(ExprId, Box<Stmt>, Box<Stmt>),
    While(ExprId, Box<Stmt>),
}

impl Stmt {
    /// Sequential composition that keeps `Seq` flat.
    pub fn seq(stmts: Vec<Stmt>) -> Stmt {
        let mut flat = Vec::with_capacity(stmts.len());
        for s in stmts {
            match s {
                Stmt::Seq(inner) => flat.extend(inner),
                s => flat.push(s),
            }
        }
        match flat.len() {
            0 => Stmt::Skip,
            1 => flat.pop().unwrap(),
            _ => Stmt::Seq(flat),
        }
    }

    pub fn stmts(&self) -> &[Stmt] {
        match self {
            Stmt::Seq(v) => v,
            s => std::slice::from_ref(s),
        }
    }

    /// True when the first executed construct is a `while` loop.
    pub fn starts_with_loop(&self) -> bool {
        match self {
            Stmt::While(..) => true,
            Stmt::Seq(v) => v[0].starts_with_loop(),
            _ => false,
        }
    }

    pub fn loop_count(&self) -> usize {
        match self {
            Stmt::Assign(..) | Stmt::Skip => 0,
            Stmt::Seq(v) => v.iter().map(Stmt::loop_count).sum(),
            Stmt::If(_, a, b) => a.loop_count() + b.loop_count(),
            Stmt::While(_, body) => 1 + body.loop_count(),
        }
    }
}

/// A parsed while program together with its expression table.
#[derive(Clone, Debug)]
pub struct Program {
    pub dag: ExprDag,
    pub body: Stmt,
}

impl Program {
    pub fn parse(source: &str) -> Result<Program, super::ParseError> {
        let mut dag = ExprDag::new();
        let body = super::parse_program(source, &mut dag)?;
        Ok(Program { dag, body })
    }

    /// Pretty-printed source in canonical layout.
    pub fn unparse(&self) -> String {
        unparse(&self.dag, &self.body)
    }
}

pub fn unparse(dag: &ExprDag, stmt: &Stmt) -> String {
    Unparse { dag, stmt }.to_string()
}

struct Unparse<'a> {
    dag: &'a ExprDag,
    stmt: &'a Stmt,
}

impl Unparse<'_> {
    fn block(&self, f: &mut fmt::Formatter<'_>, s: &Stmt, depth: usize) -> fmt::Result {
        let stmts = s.stmts();
        for (i, s) in stmts.iter().enumerate() {
            write!(f, "{:width$}", "", width = depth * 2)?;
            self.stmt(f, s, depth)?;
            if i + 1 < stmts.len() {
                f.write_str(";")?;
            }
            f.write_str("\n")?;
        }
        Ok(())
    }

    fn stmt(&self, f: &mut fmt::Formatter<'_>, s: &Stmt, depth: usize) -> fmt::Result {
        let pad = depth * 2;
        match s {
            Stmt::Assign(v, e) => write!(f, "{} := {}", self.dag.var_name(*v), self.dag.show(*e)),
            Stmt::Skip => f.write_str("skip"),
            Stmt::Seq(_) => unreachable!("nested sequence"),
            Stmt::If(c, a, b) => {
                writeln!(f, "if {} {{", self.dag.show(*c))?;
                self.block(f, a, depth + 1)?;
                writeln!(f, "{:pad$}}} else {{", "")?;
                self.block(f, b, depth + 1)?;
                write!(f, "{:pad$}}}", "")
            }
            Stmt::While(c, body) => {
                writeln!(f, "while {} {{", self.dag.show(*c))?;
                self.block(f, body, depth + 1)?;
                write!(f, "{:pad$}}}", "")
            }
        }
    }
}

impl fmt::Display for Unparse<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.block(f, self.stmt, 0)
    }
}
