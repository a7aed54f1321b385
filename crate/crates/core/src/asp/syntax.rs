//! Lexer, parser and AST for a small gringo-like input language.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Int(i64),
    Sym(String),
    Var(String),
    /// `lo..hi`, allowed only in facts.
    Range(i64, i64),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Literal {
    Pos(Atom),
    Neg(Atom),
    Cmp(Term, CmpOp, Term),
    /// A bare variable in a body. Never safe; kept so the safety check can
    /// name it.
    Var(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Statement {
    Fact(Atom),
    Rule { head: Atom, body: Vec<Literal> },
    Constraint { body: Vec<Literal> },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NonGroundProgram {
    pub statements: Vec<Statement>,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(i) => write!(f, "{i}"),
            Term::Sym(s) | Term::Var(s) => f.write_str(s),
            Term::Range(a, b) => write!(f, "{a}..{b}"),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pred)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
        })
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Pos(a) => write!(f, "{a}"),
            Literal::Neg(a) => write!(f, "not {a}"),
            Literal::Cmp(l, op, r) => write!(f, "{l} {op} {r}"),
            Literal::Var(v) => f.write_str(v),
        }
    }
}

fn write_body(f: &mut fmt::Formatter<'_>, body: &[Literal]) -> fmt::Result {
    for (i, l) in body.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{l}")?;
    }
    Ok(())
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Fact(a) => write!(f, "{a}."),
            Statement::Rule { head, body } => {
                write!(f, "{head} :- ")?;
                write_body(f, body)?;
                f.write_str(".")
            }
            Statement::Constraint { body } => {
                f.write_str(":- ")?;
                write_body(f, body)?;
                f.write_str(".")
            }
        }
    }
}

impl fmt::Display for NonGroundProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.statements {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    LParen,
    RParen,
    Comma,
    Dot,
    DotDot,
    If,
    Minus,
    Cmp(CmpOp),
    Not,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Var(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::DotDot => f.write_str("`..`"),
            Tok::If => f.write_str("`:-`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Cmp(op) => write!(f, "`{op}`"),
            Tok::Not => f.write_str("`not`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn parse_err<T>(line: usize, column: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        column,
        message: message.into(),
    })
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut push = |tok: Tok, width: usize, i: &mut usize, col: &mut usize| {
            out.push(Spanned {
                tok,
                line: l0,
                column: c0,
            });
            *i += width;
            *col += width;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '.' if chars.get(i + 1) == Some(&'.') => push(Tok::DotDot, 2, &mut i, &mut col),
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            ':' if chars.get(i + 1) == Some(&'-') => push(Tok::If, 2, &mut i, &mut col),
            '-' => push(Tok::Minus, 1, &mut i, &mut col),
            '<' if chars.get(i + 1) == Some(&'=') => push(Tok::Cmp(CmpOp::Le), 2, &mut i, &mut col),
            '<' => push(Tok::Cmp(CmpOp::Lt), 1, &mut i, &mut col),
            '>' if chars.get(i + 1) == Some(&'=') => push(Tok::Cmp(CmpOp::Ge), 2, &mut i, &mut col),
            '>' => push(Tok::Cmp(CmpOp::Gt), 1, &mut i, &mut col),
            '!' if chars.get(i + 1) == Some(&'=') => push(Tok::Cmp(CmpOp::Ne), 2, &mut i, &mut col),
            '=' if chars.get(i + 1) == Some(&'=') => push(Tok::Cmp(CmpOp::Eq), 2, &mut i, &mut col),
            '=' => push(Tok::Cmp(CmpOp::Eq), 1, &mut i, &mut col),
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let v = s
                    .parse::<i64>()
                    .or_else(|_| parse_err(l0, c0, format!("integer `{s}` out of range")))?;
                out.push(Spanned {
                    tok: Tok::Int(v),
                    line: l0,
                    column: c0,
                });
                col += i - start;
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let tok = if s == "not" {
                    Tok::Not
                } else if c.is_uppercase() || c == '_' {
                    Tok::Var(s)
                } else {
                    Tok::Ident(s)
                };
                out.push(Spanned {
                    tok,
                    line: l0,
                    column: c0,
                });
                col += i - start;
            }
            other => return parse_err(l0, c0, format!("unexpected character `{other}`")),
        }
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, what: &str) -> Result<T> {
        let t = &self.toks[self.pos];
        parse_err(
            t.line,
            t.column,
            format!("expected {what}, found {}", t.tok),
        )
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            self.fail(what)
        }
    }

    fn int(&mut self) -> Result<Option<i64>> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.next();
                Ok(Some(v))
            }
            Tok::Minus => {
                self.next();
                match self.peek().clone() {
                    Tok::Int(v) => {
                        self.next();
                        Ok(Some(-v))
                    }
                    _ => self.fail("an integer after `-`"),
                }
            }
            _ => Ok(None),
        }
    }

    fn term(&mut self) -> Result<Term> {
        if let Some(v) = self.int()? {
            if *self.peek() == Tok::DotDot {
                self.next();
                return match self.int()? {
                    Some(hi) => Ok(Term::Range(v, hi)),
                    None => self.fail("an integer after `..`"),
                };
            }
            return Ok(Term::Int(v));
        }
        match self.peek().clone() {
            Tok::Var(v) => {
                self.next();
                Ok(Term::Var(v))
            }
            Tok::Ident(s) => {
                self.next();
                if *self.peek() == Tok::LParen {
                    return self.fail("a constant (function symbols are not supported)");
                }
                Ok(Term::Sym(s))
            }
            _ => self.fail("a term"),
        }
    }

    fn atom_after_name(&mut self, pred: String) -> Result<Atom> {
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.next();
            loop {
                args.push(self.term()?);
                match self.peek() {
                    Tok::Comma => {
                        self.next();
                    }
                    Tok::RParen => {
                        self.next();
                        break;
                    }
                    _ => return self.fail("`,` or `)`"),
                }
            }
        }
        Ok(Atom { pred, args })
    }

    fn atom(&mut self) -> Result<Atom> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                self.atom_after_name(s)
            }
            _ => self.fail("an atom"),
        }
    }

    fn cmp_op(&mut self) -> Option<CmpOp> {
        if let Tok::Cmp(op) = *self.peek() {
            self.next();
            Some(op)
        } else {
            None
        }
    }

    fn literal(&mut self) -> Result<Literal> {
        match self.peek().clone() {
            Tok::Not => {
                self.next();
                Ok(Literal::Neg(self.atom()?))
            }
            Tok::Ident(s) => {
                self.next();
                if let Some(op) = self.cmp_op() {
                    let rhs = self.term()?;
                    return Ok(Literal::Cmp(Term::Sym(s), op, rhs));
                }
                Ok(Literal::Pos(self.atom_after_name(s)?))
            }
            Tok::Var(v) => {
                self.next();
                match self.cmp_op() {
                    Some(op) => {
                        let rhs = self.term()?;
                        Ok(Literal::Cmp(Term::Var(v), op, rhs))
                    }
                    None => Ok(Literal::Var(v)),
                }
            }
            Tok::Int(_) | Tok::Minus => {
                let lhs = self.term()?;
                match self.cmp_op() {
                    Some(op) => Ok(Literal::Cmp(lhs, op, self.term()?)),
                    None => self.fail("a comparison operator"),
                }
            }
            _ => self.fail("a body literal"),
        }
    }

    fn body(&mut self) -> Result<Vec<Literal>> {
        let mut body = vec![self.literal()?];
        while *self.peek() == Tok::Comma {
            self.next();
            body.push(self.literal()?);
        }
        Ok(body)
    }

    fn statement(&mut self) -> Result<(Statement, usize, usize)> {
        let start = &self.toks[self.pos];
        let (line, column) = (start.line, start.column);
        let st = if *self.peek() == Tok::If {
            self.next();
            let body = self.body()?;
            Statement::Constraint { body }
        } else {
            let head = self.atom()?;
            if *self.peek() == Tok::If {
                self.next();
                let body = self.body()?;
                Statement::Rule { head, body }
            } else {
                Statement::Fact(head)
            }
        };
        self.expect(Tok::Dot, "`.`")?;
        Ok((st, line, column))
    }
}

fn term_vars(t: &Term, out: &mut BTreeSet<String>) {
    if let Term::Var(v) = t {
        out.insert(v.clone());
    }
}

fn atom_vars(a: &Atom, out: &mut BTreeSet<String>) {
    for t in &a.args {
        term_vars(t, out);
    }
}

fn check_statement(st: &Statement, line: usize, column: usize) -> Result<()> {
    let (head, body): (Option<&Atom>, &[Literal]) = match st {
        Statement::Fact(a) => (Some(a), &[]),
        Statement::Rule { head, body } => (Some(head), body),
        Statement::Constraint { body } => (None, body),
    };
    let has_range = |a: &Atom| a.args.iter().any(|t| matches!(t, Term::Range(..)));
    if !matches!(st, Statement::Fact(_)) {
        let in_body = body.iter().any(|l| match l {
            Literal::Pos(a) | Literal::Neg(a) => has_range(a),
            Literal::Cmp(x, _, y) => matches!(x, Term::Range(..)) || matches!(y, Term::Range(..)),
            Literal::Var(_) => false,
        });
        if head.is_some_and(has_range) || in_body {
            return parse_err(line, column, "integer ranges are only supported in facts");
        }
    }
    let mut bound = BTreeSet::new();
    for l in body {
        if let Literal::Pos(a) = l {
            atom_vars(a, &mut bound);
        }
    }
    let mut used = BTreeSet::new();
    if let Some(h) = head {
        atom_vars(h, &mut used);
    }
    for l in body {
        match l {
            Literal::Pos(_) => {}
            Literal::Neg(a) => atom_vars(a, &mut used),
            Literal::Cmp(x, _, y) => {
                term_vars(x, &mut used);
                term_vars(y, &mut used);
            }
            Literal::Var(v) => {
                used.insert(v.clone());
            }
        }
    }
    if let Some(v) = used.difference(&bound).next() {
        return Err(Error::UnsafeVariable {
            variable: v.clone(),
            rule: st.to_string(),
        });
    }
    if let Some(Literal::Var(v)) = body.iter().find(|l| matches!(l, Literal::Var(_))) {
        return parse_err(
            line,
            column,
            format!("variable `{v}` used as a body literal"),
        );
    }
    Ok(())
}

/// Parses and safety-checks a program.
pub fn parse_program(text: &str) -> Result<NonGroundProgram> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let mut statements = Vec::new();
    while *p.peek() != Tok::Eof {
        let (st, line, column) = p.statement()?;
        check_statement(&st, line, column)?;
        statements.push(st);
    }
    Ok(NonGroundProgram { statements })
}
