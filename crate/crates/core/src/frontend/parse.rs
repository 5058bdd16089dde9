//! Lexer and recursive-descent parser for `.while` sources.
//!
//! ```text
//! program ::= stmts
//! stmts   ::= stmt (';' stmt)* ';'?
//! stmt    ::= IDENT ':=' expr | 'skip'
//!           | 'if' expr '{' stmts '}' 'else' '{' stmts '}'
//!           | 'while' expr '{' stmts '}'
//! expr    ::= binary expression over || && (< ==) (+ -) (* /), loosest first
//! unary   ::= '!' unary-comparison | '-' INT | INT | IDENT | 'true' | 'false' | '(' expr ')'
//! ```
//!
//! `!` takes a comparison-level operand, so `!1 < n` reads as `!(1 < n)`.
//! Comments run from `//` to the end of the line.

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use super::ast::Stmt;
use crate::exprdag::{ArithOp, CmpOp, ExprDag, ExprId, ExprNode, LogicOp, Sort};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    Sort,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{kind} error at {line}:{col}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax => f.write_str("syntax"),
            ParseErrorKind::Sort => f.write_str("sort"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    If,
    Else,
    While,
    Skip,
    True,
    False,
    Assign,
    Semi,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    EqEq,
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Int(i) => return write!(f, "integer `{i}`"),
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::If => "`if`",
            Tok::Else => "`else`",
            Tok::While => "`while`",
            Tok::Skip => "`skip`",
            Tok::True => "`true`",
            Tok::False => "`false`",
            Tok::Assign => "`:=`",
            Tok::Semi => "`;`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Slash => "`/`",
            Tok::Lt => "`<`",
            Tok::EqEq => "`==`",
            Tok::AndAnd => "`&&`",
            Tok::OrOr => "`||`",
            Tok::Bang => "`!`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, message: String| ParseError {
        kind: ParseErrorKind::Syntax,
        line,
        col,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let tok = if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Spanned {
                tok: Tok::Int(digits.parse().expect("digits")),
                line: l0,
                col: c0,
            });
            continue;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = match word.as_str() {
                "if" => Tok::If,
                "else" => Tok::Else,
                "while" => Tok::While,
                "skip" => Tok::Skip,
                "true" => Tok::True,
                "false" => Tok::False,
                _ => Tok::Ident(word),
            };
            out.push(Spanned { tok, line: l0, col: c0 });
            continue;
        } else {
            match two.as_str() {
                ":=" => Some(Tok::Assign),
                "==" => Some(Tok::EqEq),
                "&&" => Some(Tok::AndAnd),
                "||" => Some(Tok::OrOr),
                _ => None,
            }
        };
        let (tok, width) = match tok {
            Some(t) => (t, 2),
            None => {
                let t = match c {
                    ';' => Tok::Semi,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '<' => Tok::Lt,
                    '!' => Tok::Bang,
                    other => return Err(err(l0, c0, format!("unexpected character `{other}`"))),
                };
                (t, 1)
            }
        };
        i += width;
        col += width;
        out.push(Spanned { tok, line: l0, col: c0 });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

#[derive(Clone, Copy)]
enum BinOp {
    Arith(ArithOp),
    Cmp(CmpOp),
    Logic(LogicOp),
}

fn binop(tok: &Tok) -> Option<(BinOp, u8)> {
    Some(match tok {
        Tok::OrOr => (BinOp::Logic(LogicOp::Or), 1),
        Tok::AndAnd => (BinOp::Logic(LogicOp::And), 2),
        Tok::Lt => (BinOp::Cmp(CmpOp::Lt), 3),
        Tok::EqEq => (BinOp::Cmp(CmpOp::Eq), 3),
        Tok::Plus => (BinOp::Arith(ArithOp::Add), 4),
        Tok::Minus => (BinOp::Arith(ArithOp::Sub), 4),
        Tok::Star => (BinOp::Arith(ArithOp::Mul), 5),
        Tok::Slash => (BinOp::Arith(ArithOp::Div), 5),
        _ => return None,
    })
}

struct Parser<'d> {
    toks: Vec<Spanned>,
    pos: usize,
    dag: &'d mut ExprDag,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error(&self, kind: ParseErrorKind, at: (usize, usize), message: String) -> ParseError {
        ParseError {
            kind,
            line: at.0,
            col: at.1,
            message,
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(
                ParseErrorKind::Syntax,
                self.here(),
                format!("expected {want}, found {}", self.peek()),
            ))
        }
    }

    fn stmts(&mut self) -> Result<Stmt, ParseError> {
        let mut out = vec![self.stmt()?];
        while *self.peek() == Tok::Semi {
            self.bump();
            if matches!(self.peek(), Tok::RBrace | Tok::Eof) {
                break;
            }
            out.push(self.stmt()?);
        }
        Ok(Stmt::seq(out))
    }

    fn block(&mut self) -> Result<Stmt, ParseError> {
        self.expect(Tok::LBrace)?;
        let body = self.stmts()?;
        self.expect(Tok::RBrace)?;
        Ok(body)
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let at = self.here();
        match self.bump() {
            Tok::Skip => Ok(Stmt::Skip),
            Tok::Ident(name) => {
                self.expect(Tok::Assign)?;
                let rhs = self.expr_of(Sort::Int)?;
                let v = self.dag.var_id(&name);
                Ok(Stmt::Assign(v, rhs))
            }
            Tok::If => {
                let cond = self.expr_of(Sort::Bool)?;
                let then = self.block()?;
                self.expect(Tok::Else)?;
                let other = self.block()?;
                Ok(Stmt::If(cond, Box::new(then), Box::new(other)))
            }
            Tok::While => {
                let cond = self.expr_of(Sort::Bool)?;
                let body = self.block()?;
                Ok(Stmt::While(cond, Box::new(body)))
            }
            t => Err(self.error(ParseErrorKind::Syntax, at, format!("expected a statement, found {t}"))),
        }
    }

    fn expr_of(&mut self, sort: Sort) -> Result<ExprId, ParseError> {
        let at = self.here();
        let e = self.expr(0)?;
        self.check(at, e, sort)?;
        Ok(e)
    }

    fn check(&self, at: (usize, usize), e: ExprId, want: Sort) -> Result<(), ParseError> {
        let got = self.dag.sort(e);
        if got == want {
            Ok(())
        } else {
            Err(self.error(
                ParseErrorKind::Sort,
                at,
                format!("{got} expression `{}` where {want} expected", self.dag.show(e)),
            ))
        }
    }

    fn expr(&mut self, min_prec: u8) -> Result<ExprId, ParseError> {
        let lhs_at = self.here();
        let mut lhs = self.unary()?;
        while let Some((op, prec)) = binop(self.peek()) {
            if prec <= min_prec {
                break;
            }
            self.bump();
            let rhs_at = self.here();
            let rhs = self.expr(prec)?;
            lhs = match op {
                BinOp::Arith(op) => {
                    self.check(lhs_at, lhs, Sort::Int)?;
                    self.check(rhs_at, rhs, Sort::Int)?;
                    self.dag.arith(op, lhs, rhs)
                }
                BinOp::Cmp(op) => {
                    self.check(lhs_at, lhs, Sort::Int)?;
                    self.check(rhs_at, rhs, Sort::Int)?;
                    if matches!(self.peek(), Tok::Lt | Tok::EqEq) {
                        return Err(self.error(
                            ParseErrorKind::Syntax,
                            self.here(),
                            "comparisons do not chain; add parentheses".into(),
                        ));
                    }
                    self.dag.cmp(op, lhs, rhs)
                }
                BinOp::Logic(op) => {
                    self.check(lhs_at, lhs, Sort::Bool)?;
                    self.check(rhs_at, rhs, Sort::Bool)?;
                    self.dag.intern(ExprNode::Logic(op, lhs, rhs))
                }
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<ExprId, ParseError> {
        let at = self.here();
        match self.bump() {
            Tok::Int(i) => Ok(self.dag.constant(i)),
            Tok::Minus => match self.bump() {
                Tok::Int(i) => Ok(self.dag.constant(-i)),
                t => Err(self.error(
                    ParseErrorKind::Syntax,
                    at,
                    format!("`-` must prefix an integer literal, found {t}"),
                )),
            },
            Tok::Ident(name) => Ok(self.dag.named_var(&name)),
            Tok::True => Ok(self.dag.boolean(true)),
            Tok::False => Ok(self.dag.boolean(false)),
            Tok::Bang => {
                let inner_at = self.here();
                // binds looser than comparison, tighter than &&
                let inner = self.expr(2)?;
                self.check(inner_at, inner, Sort::Bool)?;
                Ok(self.dag.not(inner))
            }
            Tok::LParen => {
                let e = self.expr(0)?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            t => Err(self.error(ParseErrorKind::Syntax, at, format!("expected an expression, found {t}"))),
        }
    }
}

/// Parses `source`, interning every expression into `dag`.
pub fn parse_program(source: &str, dag: &mut ExprDag) -> Result<Stmt, ParseError> {
    let toks = lex(source)?;
    let mut p = Parser { toks, pos: 0, dag };
    let body = p.stmts()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(
            ParseErrorKind::Syntax,
            p.here(),
            format!("expected `;` or end of input, found {}", p.peek()),
        ));
    }
    Ok(body)
}
