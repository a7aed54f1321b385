//! Grounding by joining positive bodies against the possibly-derivable atoms.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use super::program::{GroundProgram, GroundRule};
use super::syntax::{Atom, CmpOp, Literal, NonGroundProgram, Statement, Term};
use crate::error::{Error, Result};
use crate::lattice::{AtomSet, AtomUniverse};

/// Ground constant. Integers order before symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Sym(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroundAtom {
    pub pred: String,
    pub args: Vec<Value>,
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Sym(s) => f.write_str(s),
        }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pred)?;
        if !self.args.is_empty() {
            let args: Vec<String> = self.args.iter().map(Value::to_string).collect();
            write!(f, "({})", args.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroundCaps {
    /// Maximum number of rule instantiations explored.
    pub max_instances: u64,
}

impl Default for GroundCaps {
    fn default() -> Self {
        GroundCaps {
            max_instances: 1_000_000,
        }
    }
}

type Binding = HashMap<String, Value>;

#[derive(Default)]
struct Domain {
    atoms: Vec<GroundAtom>,
    seen: HashSet<GroundAtom>,
    by_pred: HashMap<(String, usize), Vec<usize>>,
}

impl Domain {
    fn insert(&mut self, a: GroundAtom) -> bool {
        if self.seen.contains(&a) {
            return false;
        }
        self.by_pred
            .entry((a.pred.clone(), a.args.len()))
            .or_default()
            .push(self.atoms.len());
        self.seen.insert(a.clone());
        self.atoms.push(a);
        true
    }

    fn candidates(&self, pred: &str, arity: usize) -> &[usize] {
        self.by_pred
            .get(&(pred.to_string(), arity))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

struct Grounder<'a> {
    dom: Domain,
    caps: &'a GroundCaps,
    instances: u64,
}

fn eval(t: &Term, b: &Binding) -> Value {
    match t {
        Term::Int(i) => Value::Int(*i),
        Term::Sym(s) => Value::Sym(s.clone()),
        Term::Var(v) => b[v].clone(),
        Term::Range(..) => unreachable!("ranges are rejected outside facts"),
    }
}

fn instantiate(a: &Atom, b: &Binding) -> GroundAtom {
    GroundAtom {
        pred: a.pred.clone(),
        args: a.args.iter().map(|t| eval(t, b)).collect(),
    }
}

fn compare(l: &Value, op: CmpOp, r: &Value) -> bool {
    match op {
        CmpOp::Lt => l < r,
        CmpOp::Le => l <= r,
        CmpOp::Gt => l > r,
        CmpOp::Ge => l >= r,
        CmpOp::Eq => l == r,
        CmpOp::Ne => l != r,
    }
}

/// Extends `b` so that `pattern` matches `g`, or returns `None`.
fn unify(pattern: &Atom, g: &GroundAtom, b: &Binding) -> Option<Binding> {
    let mut out = b.clone();
    for (t, v) in pattern.args.iter().zip(&g.args) {
        match t {
            Term::Var(name) => match out.get(name) {
                Some(bound) if bound != v => return None,
                Some(_) => {}
                None => {
                    out.insert(name.clone(), v.clone());
                }
            },
            other => {
                if eval(other, &out) != *v {
                    return None;
                }
            }
        }
    }
    Some(out)
}

impl Grounder<'_> {
    /// All bindings satisfying the positive atoms and comparisons of `body`,
    /// in domain order.
    fn bindings(&mut self, body: &[Literal]) -> Result<Vec<Binding>> {
        let pos: Vec<&Atom> = body
            .iter()
            .filter_map(|l| match l {
                Literal::Pos(a) => Some(a),
                _ => None,
            })
            .collect();
        let mut partial = vec![Binding::new()];
        for a in pos {
            let mut next = Vec::new();
            for b in &partial {
                for &i in self.dom.candidates(&a.pred, a.args.len()) {
                    if let Some(nb) = unify(a, &self.dom.atoms[i], b) {
                        next.push(nb);
                    }
                }
            }
            self.instances += next.len() as u64;
            if self.instances > self.caps.max_instances {
                return Err(Error::cap(
                    "grounding instantiations",
                    self.caps.max_instances,
                ));
            }
            partial = next;
        }
        Ok(partial
            .into_iter()
            .filter(|b| {
                body.iter().all(|l| match l {
                    Literal::Cmp(x, op, y) => compare(&eval(x, b), *op, &eval(y, b)),
                    _ => true,
                })
            })
            .collect())
    }
}

fn expand_fact(a: &Atom) -> Vec<GroundAtom> {
    let mut out = vec![Vec::new()];
    for t in &a.args {
        let choices: Vec<Value> = match t {
            Term::Range(lo, hi) => (*lo..=*hi).map(Value::Int).collect(),
            other => vec![eval(other, &Binding::new())],
        };
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<Value>| {
                choices.iter().map(move |c| {
                    let mut p = prefix.clone();
                    p.push(c.clone());
                    p
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|args| GroundAtom {
            pred: a.pred.clone(),
            args,
        })
        .collect()
}

enum Draft {
    Rule {
        head: GroundAtom,
        pos: Vec<GroundAtom>,
        neg: Vec<GroundAtom>,
    },
    Constraint {
        pos: Vec<GroundAtom>,
        neg: Vec<GroundAtom>,
    },
}

/// Grounds a safe program.
///
/// Atoms that can never be derived are dropped: positive occurrences kill the
/// rule instance and negative occurrences are trivially true. Each ground
/// constraint `:- B` becomes `c ← B, not c` for a fresh hidden atom `c`.
pub fn ground(p: &NonGroundProgram, caps: &GroundCaps) -> Result<GroundProgram> {
    let mut g = Grounder {
        dom: Domain::default(),
        caps,
        instances: 0,
    };
    for st in &p.statements {
        if let Statement::Fact(a) = st {
            for ga in expand_fact(a) {
                g.dom.insert(ga);
            }
        }
    }
    loop {
        let mut changed = false;
        for st in &p.statements {
            if let Statement::Rule { head, body } = st {
                for b in g.bindings(body)? {
                    changed |= g.dom.insert(instantiate(head, &b));
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut drafts = Vec::new();
    let derivable = |a: &GroundAtom, d: &Domain| d.seen.contains(a);
    for st in &p.statements {
        match st {
            Statement::Fact(a) => {
                for ga in expand_fact(a) {
                    drafts.push(Draft::Rule {
                        head: ga,
                        pos: vec![],
                        neg: vec![],
                    });
                }
            }
            Statement::Rule { body, .. } | Statement::Constraint { body } => {
                for b in g.bindings(body)? {
                    let pos: Vec<GroundAtom> = body
                        .iter()
                        .filter_map(|l| match l {
                            Literal::Pos(a) => Some(instantiate(a, &b)),
                            _ => None,
                        })
                        .collect();
                    let neg: Vec<GroundAtom> = body
                        .iter()
                        .filter_map(|l| match l {
                            Literal::Neg(a) => Some(instantiate(a, &b)),
                            _ => None,
                        })
                        .filter(|a| derivable(a, &g.dom))
                        .collect();
                    drafts.push(match st {
                        Statement::Rule { head, .. } => Draft::Rule {
                            head: instantiate(head, &b),
                            pos,
                            neg,
                        },
                        _ => Draft::Constraint { pos, neg },
                    });
                }
            }
        }
    }

    let mut universe = AtomUniverse::default();
    let index = |u: &mut AtomUniverse, a: &GroundAtom| u.intern(&a.to_string());
    let mut seen_rules: HashSet<(Option<usize>, Vec<usize>, Vec<usize>)> = HashSet::new();
    let mut raw: Vec<(usize, Vec<usize>, Vec<usize>)> = Vec::new();
    let mut constraints = 0usize;
    for d in drafts {
        let (head, pos, neg) = match &d {
            Draft::Rule { head, pos, neg } => (Some(head), pos, neg),
            Draft::Constraint { pos, neg } => (None, pos, neg),
        };
        let h = head.map(|a| index(&mut universe, a));
        let mut pi: Vec<usize> = pos.iter().map(|a| index(&mut universe, a)).collect();
        let mut ni: Vec<usize> = neg.iter().map(|a| index(&mut universe, a)).collect();
        pi.sort_unstable();
        pi.dedup();
        ni.sort_unstable();
        ni.dedup();
        if !seen_rules.insert((h, pi.clone(), ni.clone())) {
            continue;
        }
        let h = match h {
            Some(h) => h,
            None => {
                constraints += 1;
                let c = universe.push_hidden(format!("__c{constraints}"));
                ni.push(c);
                c
            }
        };
        raw.push((h, pi, ni));
    }
    let n = universe.len();
    let rules = raw
        .into_iter()
        .map(|(head, pos, neg)| GroundRule {
            head,
            pos: AtomSet::from_indices(n, pos),
            neg: AtomSet::from_indices(n, neg),
        })
        .collect();
    GroundProgram::new(Arc::new(universe), rules)
}
