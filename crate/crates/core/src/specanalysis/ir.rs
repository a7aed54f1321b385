//! A line-oriented mini IR:
//!
//! ```text
//! loc entry:
//!   x := 1
//!   if y > 0 goto pos else other
//! loc pos:
//!   z := x * y
//!   goto done
//! loc other:
//!   z := -x
//! loc done:
//! assume done z +
//! ```
//!
//! Each `loc` opens a block; its location is the program point at the block
//! entry. A block without `goto`/`if` falls through to the next one. The
//! first block is the entry and must have no predecessors. `#` and `//`
//! start comments.

use std::collections::HashMap;

use super::sign::Sign;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operand {
    Var(usize),
    Const(i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expr {
    Operand(Operand),
    Neg(Operand),
    Bin(Operand, BinOp, Operand),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Assign {
    pub target: usize,
    pub expr: Expr,
}

/// `var ⋈ 0` as the set of concrete signs that pass (bits `−`=1, `0`=2, `+`=4).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Guard {
    pub var: usize,
    pub allowed: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Terminator {
    Goto(usize),
    Branch {
        guard: Guard,
        then: usize,
        otherwise: usize,
    },
    /// Continue with the next block, or stop if this is the last one.
    FallThrough,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub name: String,
    pub assigns: Vec<Assign>,
    pub term: Terminator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub guard: Option<Guard>,
}

/// "at `loc`, `var` has sign `sign`".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assumption {
    pub loc: usize,
    pub var: usize,
    pub sign: Sign,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MiniProgram {
    pub vars: Vec<String>,
    pub blocks: Vec<Block>,
    pub assumptions: Vec<Assumption>,
    pub edges: Vec<Edge>,
    /// Incoming edge indices per location.
    pub preds: Vec<Vec<usize>>,
    /// Locations in reverse postorder from the entry; unreachable ones last.
    pub order: Vec<usize>,
}

fn err<T>(line: usize, column: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        column,
        message: message.into(),
    })
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<(String, usize)>> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            break;
        } else if c.is_alphanumeric() || c == '_' {
            let s = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((chars[s..i].iter().collect(), col));
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            if [":=", "<=", ">=", "!=", "=="].contains(&two.as_str()) {
                out.push((two, col));
                i += 2;
            } else if "+-*<>=:".contains(c) {
                out.push((c.to_string(), col));
                i += 1;
            } else {
                return err(lineno, col, format!("unexpected character `{c}`"));
            }
        }
    }
    Ok(out)
}

fn is_ident(s: &str) -> bool {
    s.chars()
        .next()
        .is_some_and(|c| c.is_alphabetic() || c == '_')
}

fn cmp_allowed(op: &str) -> Option<u8> {
    Some(match op {
        "<" => 1,
        "<=" => 3,
        ">" => 4,
        ">=" => 6,
        "=" | "==" => 2,
        "!=" => 5,
        _ => return None,
    })
}

fn parse_sign(s: &str) -> Option<Sign> {
    Some(match s {
        "+" | "pos" | ">0" => Sign::Pos,
        "-" | "neg" | "<0" => Sign::Neg,
        "0" | "zero" | "=0" => Sign::Zero,
        _ => return None,
    })
}

pub(crate) fn sign_label(s: Sign) -> &'static str {
    match s {
        Sign::Neg => "<0",
        Sign::Zero => "=0",
        Sign::Pos => ">0",
        _ => unreachable!("assumption signs are proper"),
    }
}

struct Pending {
    line: usize,
    col: usize,
    kind: PendingKind,
}

enum PendingKind {
    Goto(usize, String),
    Branch(usize, Guard, String, String),
    Assume(String, String, Sign),
}

#[derive(Default)]
struct Builder {
    vars: Vec<String>,
    var_index: HashMap<String, usize>,
    blocks: Vec<Block>,
    terminated: Vec<bool>,
}

impl Builder {
    fn var(&mut self, name: &str) -> usize {
        if let Some(&i) = self.var_index.get(name) {
            return i;
        }
        self.vars.push(name.to_string());
        self.var_index.insert(name.to_string(), self.vars.len() - 1);
        self.vars.len() - 1
    }

    fn operand(&mut self, tok: &str, line: usize, col: usize) -> Result<Operand> {
        if let Ok(v) = tok.parse::<i64>() {
            Ok(Operand::Const(v))
        } else if is_ident(tok) {
            Ok(Operand::Var(self.var(tok)))
        } else {
            err(
                line,
                col,
                format!("expected a variable or integer, found `{tok}`"),
            )
        }
    }

    fn expr(&mut self, raw: &[(String, usize)], line: usize, end_col: usize) -> Result<Expr> {
        // A `-` in operand position directly before a literal is its sign.
        let mut toks: Vec<(String, usize)> = Vec::new();
        let mut i = 0;
        while i < raw.len() {
            let operand_slot = toks
                .last()
                .is_none_or(|(s, _)| "+-*".contains(s.as_str()));
            let next_is_int = raw
                .get(i + 1)
                .is_some_and(|(s, _)| s.parse::<i64>().is_ok());
            if raw[i].0 == "-" && operand_slot && next_is_int {
                toks.push((format!("-{}", raw[i + 1].0), raw[i].1));
                i += 2;
            } else {
                toks.push(raw[i].clone());
                i += 1;
            }
        }
        let t: Vec<&str> = toks.iter().map(|(s, _)| s.as_str()).collect();
        let col = |i: usize| toks.get(i).map_or(end_col, |(_, c)| *c);
        match t.as_slice() {
            [a] => Ok(Expr::Operand(self.operand(a, line, col(0))?)),
            ["-", a] => Ok(Expr::Neg(self.operand(a, line, col(1))?)),
            [a, op, b] => {
                let op = match *op {
                    "+" => BinOp::Add,
                    "-" => BinOp::Sub,
                    "*" => BinOp::Mul,
                    other => return err(line, col(1), format!("unknown operator `{other}`")),
                };
                Ok(Expr::Bin(
                    self.operand(a, line, col(0))?,
                    op,
                    self.operand(b, line, col(2))?,
                ))
            }
            _ => err(line, col(0), "expected `c`, `w`, `-w` or `w op u`"),
        }
    }
}

pub fn parse_mini(text: &str) -> Result<MiniProgram> {
    let mut b = Builder::default();
    let mut pending: Vec<Pending> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let toks = tokenize(raw, line)?;
        let t: Vec<&str> = toks.iter().map(|(s, _)| s.as_str()).collect();
        let end_col = raw.chars().count() + 1;
        let col = |i: usize| toks.get(i).map_or(end_col, |(_, c)| *c);
        if t.is_empty() {
            continue;
        }
        if t[0] == "assume" {
            let [_, loc, var, sign @ ..] = t.as_slice() else {
                return err(line, col(0), "expected `assume LOC VAR SIGN`");
            };
            let sign_text: String = sign.concat();
            let Some(sign) = parse_sign(&sign_text) else {
                return err(line, col(3), format!("unknown sign `{sign_text}`"));
            };
            pending.push(Pending {
                line,
                col: col(1),
                kind: PendingKind::Assume(loc.to_string(), var.to_string(), sign),
            });
            continue;
        }
        if t[0] == "loc" {
            match t.as_slice() {
                [_, name, ":"] if is_ident(name) => {
                    if b.blocks.iter().any(|bl| bl.name == *name) {
                        return err(line, col(1), format!("duplicate location `{name}`"));
                    }
                    b.blocks.push(Block {
                        name: name.to_string(),
                        assigns: Vec::new(),
                        term: Terminator::FallThrough,
                    });
                    b.terminated.push(false);
                    continue;
                }
                _ => return err(line, col(0), "expected `loc NAME:`"),
            }
        }
        let Some(cur) = b.blocks.len().checked_sub(1) else {
            return err(line, col(0), "statement before the first `loc`");
        };
        if b.terminated[cur] {
            return err(line, col(0), "statement after the end of a block");
        }
        match t.as_slice() {
            ["goto", target] => {
                pending.push(Pending {
                    line,
                    col: col(1),
                    kind: PendingKind::Goto(cur, target.to_string()),
                });
                b.terminated[cur] = true;
            }
            ["if", v, op, "0", "goto", l1, "else", l2] => {
                let Some(allowed) = cmp_allowed(op) else {
                    return err(line, col(2), format!("unknown comparison `{op}`"));
                };
                if !is_ident(v) {
                    return err(line, col(1), "expected a variable");
                }
                let guard = Guard {
                    var: b.var(v),
                    allowed,
                };
                pending.push(Pending {
                    line,
                    col: col(5),
                    kind: PendingKind::Branch(cur, guard, l1.to_string(), l2.to_string()),
                });
                b.terminated[cur] = true;
            }
            [v, ":=", ..] if is_ident(v) && !["if", "goto"].contains(v) => {
                let target = b.var(v);
                let expr = b.expr(&toks[2..], line, end_col)?;
                b.blocks[cur].assigns.push(Assign { target, expr });
            }
            _ => return err(line, col(0), "unrecognized statement"),
        }
    }
    if b.blocks.is_empty() {
        return err(1, 1, "program has no locations");
    }

    let names: HashMap<String, usize> = b
        .blocks
        .iter()
        .enumerate()
        .map(|(i, bl)| (bl.name.clone(), i))
        .collect();
    let mut assumptions: Vec<Assumption> = Vec::new();
    for p in &pending {
        let resolve = |name: &str| match names.get(name) {
            Some(&i) => Ok(i),
            None => err(p.line, p.col, format!("unknown location `{name}`")),
        };
        match &p.kind {
            PendingKind::Goto(from, to) => b.blocks[*from].term = Terminator::Goto(resolve(to)?),
            PendingKind::Branch(from, guard, l1, l2) => {
                b.blocks[*from].term = Terminator::Branch {
                    guard: *guard,
                    then: resolve(l1)?,
                    otherwise: resolve(l2)?,
                }
            }
            PendingKind::Assume(loc, var, sign) => {
                let loc = resolve(loc)?;
                let Some(&var) = b.var_index.get(var) else {
                    return err(p.line, p.col, format!("unknown variable `{var}`"));
                };
                let label = format!(
                    "{}:{}{}",
                    b.blocks[loc].name,
                    b.vars[var],
                    sign_label(*sign)
                );
                if assumptions.iter().any(|a| a.label == label) {
                    return err(p.line, p.col, format!("duplicate assumption `{label}`"));
                }
                assumptions.push(Assumption {
                    loc,
                    var,
                    sign: *sign,
                    label,
                });
            }
        }
    }

    let n = b.blocks.len();
    let mut edges = Vec::new();
    for (i, bl) in b.blocks.iter().enumerate() {
        match bl.term {
            Terminator::Goto(t) => edges.push(Edge {
                from: i,
                to: t,
                guard: None,
            }),
            Terminator::Branch {
                guard,
                then,
                otherwise,
            } => {
                edges.push(Edge {
                    from: i,
                    to: then,
                    guard: Some(guard),
                });
                edges.push(Edge {
                    from: i,
                    to: otherwise,
                    guard: Some(Guard {
                        var: guard.var,
                        allowed: 7 & !guard.allowed,
                    }),
                });
            }
            Terminator::FallThrough if i + 1 < n => edges.push(Edge {
                from: i,
                to: i + 1,
                guard: None,
            }),
            Terminator::FallThrough => {}
        }
    }
    let mut preds = vec![Vec::new(); n];
    for (k, e) in edges.iter().enumerate() {
        preds[e.to].push(k);
    }
    if !preds[0].is_empty() {
        return Err(Error::usage(format!(
            "entry location `{}` must not have predecessors",
            b.blocks[0].name
        )));
    }

    let mut seen = vec![false; n];
    let mut post = Vec::new();
    // Iterative DFS keeping successor order.
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    seen[0] = true;
    while let Some((node, k)) = stack.pop() {
        let succ: Vec<usize> = edges
            .iter()
            .filter(|e| e.from == node)
            .map(|e| e.to)
            .collect();
        if k < succ.len() {
            stack.push((node, k + 1));
            let s = succ[k];
            if !seen[s] {
                seen[s] = true;
                stack.push((s, 0));
            }
        } else {
            post.push(node);
        }
    }
    let mut order: Vec<usize> = post.into_iter().rev().collect();
    order.extend((0..n).filter(|&i| !seen[i]));

    Ok(MiniProgram {
        vars: b.vars,
        blocks: b.blocks,
        assumptions,
        edges,
        preds,
        order,
    })
}

impl MiniProgram {
    pub fn location(&self, name: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.name == name)
    }

    pub fn variable(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
loc entry:
  x := 1
  if y > 0 goto pos else other   # branch on an unknown
loc pos:
  z := x * y
  goto done
loc other:
  z := -x
loc done:
assume done z +
assume pos y +
";

    #[test]
    fn parses_sample() {
        let p = parse_mini(SAMPLE).unwrap();
        assert_eq!(p.vars, vec!["x", "y", "z"]);
        assert_eq!(p.blocks.len(), 4);
        assert_eq!(p.edges.len(), 4);
        assert_eq!(p.assumptions[0].label, "done:z>0");
        assert_eq!(p.assumptions[1].label, "pos:y>0");
        assert_eq!(p.order[0], 0);
        assert_eq!(*p.order.last().unwrap(), 3);
        assert_eq!(p.preds[3].len(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            parse_mini("x := 1"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_mini("loc a:\ngoto b"),
            Err(Error::Parse {
                line: 2,
                column: 6,
                ..
            })
        ));
        assert!(matches!(
            parse_mini("loc a:\nloc b:\ngoto a"),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            parse_mini("loc a:\nx := 1\nassume a q +"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_mini("loc a:\nx := 1 ?"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_mini("loc a:\ngoto a\nx := 1"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_mini("loc a:\nx := 1\nassume a x +\nassume a x pos"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn expressions() {
        let p =
            parse_mini("loc a:\nx := -3\ny := -x\nz := x - 2\nw := y*z\nx := -1 * y\nx := y - -2")
                .unwrap();
        let e: Vec<Expr> = p.blocks[0].assigns.iter().map(|a| a.expr).collect();
        assert_eq!(e[0], Expr::Operand(Operand::Const(-3)));
        assert_eq!(e[1], Expr::Neg(Operand::Var(0)));
        assert_eq!(
            e[2],
            Expr::Bin(Operand::Var(0), BinOp::Sub, Operand::Const(2))
        );
        assert_eq!(
            e[3],
            Expr::Bin(Operand::Var(1), BinOp::Mul, Operand::Var(2))
        );
        assert_eq!(
            e[4],
            Expr::Bin(Operand::Const(-1), BinOp::Mul, Operand::Var(1))
        );
        assert_eq!(
            e[5],
            Expr::Bin(Operand::Var(1), BinOp::Sub, Operand::Const(-2))
        );
        assert!(parse_mini("loc a:\nx := 1 +").is_err());
    }
}
