//! Sign analysis under speculative assumptions, and the assumption operator.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::ir::{BinOp, Edge, Expr, MiniProgram, Operand};
use super::sign::Sign;
use crate::bnb::{bnb_run, exact_fixed_points, BnbConfig, SearchState};
use crate::error::Result;
use crate::lattice::{full_interval, AtomSet, AtomUniverse, Powerset};
use crate::refine::{Monotonicity, OperatorSpec};

/// Per-location sign vectors; `None` marks an unreachable location.
///
/// A vector never contains `⊥`: a location where some variable has no
/// possible sign is unreachable as a whole.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignState {
    pub locs: Vec<Option<Vec<Sign>>>,
}

fn normalize(v: Vec<Sign>) -> Option<Vec<Sign>> {
    if v.contains(&Sign::Bot) {
        None
    } else {
        Some(v)
    }
}

fn join_loc(a: &Option<Vec<Sign>>, b: &Option<Vec<Sign>>) -> Option<Vec<Sign>> {
    match (a, b) {
        (None, x) | (x, None) => x.clone(),
        (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(x, y)| x.join(*y)).collect()),
    }
}

impl SignState {
    pub fn bottom(p: &MiniProgram) -> Self {
        SignState {
            locs: vec![None; p.blocks.len()],
        }
    }

    /// The sign of `var` at `loc`; `⊥` if the location is unreachable.
    pub fn get(&self, loc: usize, var: usize) -> Sign {
        self.locs[loc].as_ref().map_or(Sign::Bot, |v| v[var])
    }

    pub fn leq(&self, other: &SignState) -> bool {
        self.locs
            .iter()
            .zip(&other.locs)
            .all(|(a, b)| match (a, b) {
                (None, _) => true,
                (Some(_), None) => false,
                (Some(a), Some(b)) => a.iter().zip(b).all(|(x, y)| x.leq(*y)),
            })
    }

    pub fn join(&self, other: &SignState) -> SignState {
        SignState {
            locs: self
                .locs
                .iter()
                .zip(&other.locs)
                .map(|(a, b)| join_loc(a, b))
                .collect(),
        }
    }

    /// `{"loc": {"var": sign, ...} | null, ...}`
    pub fn to_json(&self, p: &MiniProgram) -> Value {
        let mut m = serde_json::Map::new();
        for (b, s) in p.blocks.iter().zip(&self.locs) {
            let v = match s {
                None => Value::Null,
                Some(s) => Value::Object(
                    p.vars
                        .iter()
                        .zip(s)
                        .map(|(n, x)| (n.clone(), json!(x)))
                        .collect(),
                ),
            };
            m.insert(b.name.clone(), v);
        }
        Value::Object(m)
    }

    /// One line per location, e.g. `done: x=+ y=⊤`.
    pub fn render(&self, p: &MiniProgram) -> String {
        let mut out = String::new();
        for (b, s) in p.blocks.iter().zip(&self.locs) {
            out.push_str(&b.name);
            out.push(':');
            match s {
                None => out.push_str(" unreachable"),
                Some(s) => {
                    for (n, x) in p.vars.iter().zip(s) {
                        out.push_str(&format!(" {n}={x}"));
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

fn eval_operand(o: Operand, env: &[Sign]) -> Sign {
    match o {
        Operand::Var(v) => env[v],
        Operand::Const(c) => Sign::of(c),
    }
}

fn eval(e: &Expr, env: &[Sign]) -> Sign {
    match *e {
        Expr::Operand(o) => eval_operand(o, env),
        Expr::Neg(o) => eval_operand(o, env).negate(),
        Expr::Bin(a, op, b) => {
            let (a, b) = (eval_operand(a, env), eval_operand(b, env));
            match op {
                BinOp::Add => a.plus(b),
                BinOp::Sub => a.plus(b.negate()),
                BinOp::Mul => a.times(b),
            }
        }
    }
}

/// What flows along `e` out of a source state.
fn edge_flow(p: &MiniProgram, e: &Edge, src: &Option<Vec<Sign>>) -> Option<Vec<Sign>> {
    let mut env = src.clone()?;
    for a in &p.blocks[e.from].assigns {
        env[a.target] = eval(&a.expr, &env);
    }
    if let Some(g) = e.guard {
        env[g.var] = env[g.var].restrict(g.allowed);
    }
    normalize(env)
}

/// One parallel application of the abstract semantics: the entry gets all
/// `⊤`, every other location the join of its incoming edges.
pub fn transfer(p: &MiniProgram, s: &SignState) -> SignState {
    SignState {
        locs: (0..p.blocks.len()).map(|l| incoming(p, s, l)).collect(),
    }
}

fn incoming(p: &MiniProgram, s: &SignState, l: usize) -> Option<Vec<Sign>> {
    if l == 0 {
        return Some(vec![Sign::Top; p.vars.len()]);
    }
    p.preds[l]
        .iter()
        .map(|&k| {
            let e = &p.edges[k];
            edge_flow(p, e, &s.locs[e.from])
        })
        .fold(None, |acc, x| join_loc(&acc, &x))
}

fn project_loc(
    p: &MiniProgram,
    sigma: &AtomSet,
    l: usize,
    v: Option<Vec<Sign>>,
) -> Option<Vec<Sign>> {
    let mut v = v?;
    for i in sigma.iter() {
        let a = &p.assumptions[i];
        if a.loc == l {
            v[a.var] = v[a.var].meet(a.sign);
        }
    }
    normalize(v)
}

/// Meets every location with the assumptions of `sigma` made there.
pub fn project(p: &MiniProgram, sigma: &AtomSet, s: &SignState) -> SignState {
    SignState {
        locs: s
            .locs
            .iter()
            .enumerate()
            .map(|(l, v)| project_loc(p, sigma, l, v.clone()))
            .collect(),
    }
}

/// The least fixed point of `project ∘ transfer`, by round-robin iteration
/// in reverse postorder starting from all-unreachable.
pub fn analyze(p: &MiniProgram, sigma: &AtomSet) -> SignState {
    let mut s = SignState::bottom(p);
    loop {
        let mut changed = false;
        for &l in &p.order {
            let new = project_loc(p, sigma, l, incoming(p, &s, l));
            if new != s.locs[l] {
                s.locs[l] = new;
                changed = true;
            }
        }
        if !changed {
            return s;
        }
    }
}

/// Whether an assumption holds in an analysis result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// The location has exactly the assumed sign.
    True,
    /// The location has a different proper sign.
    False,
    /// The location is `⊤`: neither confirmed nor refuted.
    Unknown,
    /// The location is unreachable.
    Vacuous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Keep assumptions the analysis does not refute. Unreachable counts as
    /// refuted.
    May,
    /// Keep assumptions the analysis confirms. Unreachable counts as
    /// confirmed.
    Proved,
}

impl std::str::FromStr for Mode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "may" => Ok(Mode::May),
            "proved" => Ok(Mode::Proved),
            _ => Err(crate::Error::usage(format!("unknown mode `{s}`"))),
        }
    }
}

pub fn verdict(p: &MiniProgram, a: usize, s: &SignState) -> Verdict {
    let a = &p.assumptions[a];
    match s.get(a.loc, a.var) {
        Sign::Bot => Verdict::Vacuous,
        Sign::Top => Verdict::Unknown,
        x if x == a.sign => Verdict::True,
        _ => Verdict::False,
    }
}

/// The assumptions that survive in `s` under `mode`.
pub fn safe(p: &MiniProgram, s: &SignState, mode: Mode) -> AtomSet {
    let n = p.assumptions.len();
    AtomSet::from_indices(
        n,
        (0..n).filter(|&a| {
            matches!(
                (mode, verdict(p, a, s)),
                (_, Verdict::True)
                    | (Mode::May, Verdict::Unknown)
                    | (Mode::Proved, Verdict::Vacuous)
            )
        }),
    )
}

/// The powerset of the program's assumptions, labelled like `L:x>0`.
pub fn assumption_lattice(p: &MiniProgram) -> Powerset {
    let u = AtomUniverse::new(p.assumptions.iter().map(|a| a.label.clone()))
        .expect("labels are unique");
    Powerset::new(Arc::new(u))
}

/// `σ ↦ safe(analyze(σ))`, memoized.
///
/// In may-mode a larger `σ` prunes more, which can only flip verdicts from
/// unknown to true, false or vacuous; the set of survivors shrinks, so the
/// map is antimonotone. In proved-mode survivors are true or vacuous, both
/// of which persist under more pruning, so the map is monotone.
pub fn phi_operator(p: &Arc<MiniProgram>, mode: Mode) -> OperatorSpec<AtomSet> {
    let tag = match mode {
        Mode::May => Monotonicity::Antimonotone,
        Mode::Proved => Monotonicity::Monotone,
    };
    let p = Arc::clone(p);
    let memo: Mutex<HashMap<AtomSet, AtomSet>> = Mutex::new(HashMap::new());
    OperatorSpec::new(format!("phi-{mode:?}").to_lowercase(), tag, move |sigma| {
        if let Some(v) = memo.lock().expect("memo lock").get(sigma) {
            return v.clone();
        }
        let out = safe(&p, &analyze(&p, sigma), mode);
        memo.lock()
            .expect("memo lock")
            .insert(sigma.clone(), out.clone());
        out
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StableSets {
    pub mode: Mode,
    /// Every `σ` with `Φ(σ) = σ`, in lattice order, with its analysis.
    pub sets: Vec<(AtomSet, SignState)>,
    pub search: SearchState,
    pub complete: bool,
}

impl StableSets {
    pub fn to_json(&self, p: &MiniProgram, lat: &Powerset) -> Value {
        json!({
            "mode": self.mode,
            "complete": self.complete,
            "stable": self.sets.iter().map(|(s, a)| json!({
                "assumptions": lat.names_of(s),
                "signs": a.to_json(p),
            })).collect::<Vec<_>>(),
            "search": self.search.to_json(lat),
        })
    }
}

/// The stable assumption sets: fixed points of `Φ` over all subsets of the
/// declared assumptions, found by branch-and-bound.
pub fn stable_assumption_sets(
    p: &Arc<MiniProgram>,
    mode: Mode,
    cfg: &BnbConfig,
    enum_cap: u64,
) -> Result<StableSets> {
    let lat = assumption_lattice(p);
    let op = phi_operator(p, mode);
    let search = bnb_run(&lat, &op, &full_interval(&lat), cfg)?;
    let complete = search.bounds.is_empty() && !search.stopped_early;
    let points = if complete {
        exact_fixed_points(&lat, &op, &search, enum_cap)?
    } else {
        search.fixed_points.clone()
    };
    Ok(StableSets {
        mode,
        sets: points
            .into_iter()
            .map(|s| {
                let a = analyze(p, &s);
                (s, a)
            })
            .collect(),
        search,
        complete,
    })
}

/// Reference answer: tries every subset.
pub fn brute_force_stable_sets(p: &MiniProgram, mode: Mode) -> Result<Vec<AtomSet>> {
    let n = p.assumptions.len();
    if n > 20 {
        return Err(crate::Error::cap("assumption subsets", 1u64 << 20));
    }
    let mut out: Vec<AtomSet> = (0..1u64 << n)
        .map(|bits| AtomSet::from_bits(n, bits))
        .filter(|s| safe(p, &analyze(p, s), mode) == *s)
        .collect();
    out.sort();
    Ok(out)
}
