use std::sync::Arc;

use serde_json::json;

use crate::bnb::{bnb_run, exact_fixed_points, BnbConfig, SearchState};
use crate::error::{Error, Result};
use crate::lattice::{full_interval, AtomSet, AtomUniverse, Interval, Lattice, Powerset};
use crate::refine::{oscillating_pair, Monotonicity, OperatorSpec};

/// `head ← pos, not neg`.
///
/// A rule whose head also occurs in its own negative body acts as the
/// constraint `:- pos, not neg`; the grounder encodes constraints this way.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundRule {
    pub head: usize,
    pub pos: AtomSet,
    pub neg: AtomSet,
}

impl GroundRule {
    pub fn is_constraint_shaped(&self) -> bool {
        self.neg.contains(self.head)
    }

    fn fires_under_reduct(&self, m: &AtomSet) -> bool {
        self.neg.is_disjoint(m)
    }
}

/// A ground normal program over a fixed Herbrand base.
#[derive(Clone, Debug)]
pub struct GroundProgram {
    universe: Arc<AtomUniverse>,
    rules: Vec<GroundRule>,
    /// For each atom, the rules that use it positively.
    occurs: Vec<Vec<u32>>,
}

impl PartialEq for GroundProgram {
    fn eq(&self, other: &Self) -> bool {
        self.universe.names() == other.universe.names() && self.rules == other.rules
    }
}

impl GroundProgram {
    pub fn new(universe: Arc<AtomUniverse>, rules: Vec<GroundRule>) -> Result<Self> {
        let n = universe.len();
        for r in &rules {
            if r.head >= n || r.pos.width() != n || r.neg.width() != n {
                return Err(Error::usage("rule refers to atoms outside the universe"));
            }
        }
        let mut occurs = vec![Vec::new(); n];
        for (i, r) in rules.iter().enumerate() {
            for a in r.pos.iter() {
                occurs[a].push(i as u32);
            }
        }
        Ok(GroundProgram {
            universe,
            rules,
            occurs,
        })
    }

    /// Parses and grounds program text with default caps.
    pub fn from_text(text: &str) -> Result<Self> {
        super::ground(&super::parse_program(text)?, &super::GroundCaps::default())
    }

    pub fn universe(&self) -> &Arc<AtomUniverse> {
        &self.universe
    }

    pub fn lattice(&self) -> Powerset {
        Powerset::new(Arc::clone(&self.universe))
    }

    pub fn rules(&self) -> &[GroundRule] {
        &self.rules
    }

    pub fn width(&self) -> usize {
        self.universe.len()
    }

    fn check_set(&self, m: &AtomSet) -> Result<()> {
        if m.width() != self.width() {
            return Err(Error::usage("atom set over a different universe"));
        }
        Ok(())
    }

    pub fn is_positive(&self) -> bool {
        self.rules.iter().all(|r| r.neg.is_empty())
    }

    /// GL reduct: drop rules blocked by `m`, strip negation from the rest.
    pub fn gl_reduct(&self, m: &AtomSet) -> Result<GroundProgram> {
        self.check_set(m)?;
        let empty = AtomSet::empty(self.width());
        let rules = self
            .rules
            .iter()
            .filter(|r| r.fires_under_reduct(m))
            .map(|r| GroundRule {
                head: r.head,
                pos: r.pos.clone(),
                neg: empty.clone(),
            })
            .collect();
        GroundProgram::new(Arc::clone(&self.universe), rules)
    }

    /// Least Herbrand model of a positive program.
    pub fn minimal_model(&self) -> Result<AtomSet> {
        if !self.is_positive() {
            return Err(Error::usage("minimal model needs a positive program"));
        }
        Ok(self.least_model(|_| true))
    }

    fn least_model(&self, active: impl Fn(&GroundRule) -> bool) -> AtomSet {
        let mut missing: Vec<usize> = self
            .rules
            .iter()
            .map(|r| if active(r) { r.pos.len() } else { usize::MAX })
            .collect();
        let mut model = AtomSet::empty(self.width());
        let mut queue: Vec<usize> = self
            .rules
            .iter()
            .zip(&missing)
            .filter(|(_, &m)| m == 0)
            .map(|(r, _)| r.head)
            .collect();
        while let Some(a) = queue.pop() {
            if model.contains(a) {
                continue;
            }
            model.insert(a);
            for &ri in &self.occurs[a] {
                let m = &mut missing[ri as usize];
                if *m != usize::MAX {
                    *m -= 1;
                    if *m == 0 {
                        queue.push(self.rules[ri as usize].head);
                    }
                }
            }
        }
        model
    }

    /// `S_P(m)`: the least model of the reduct by `m`.
    pub fn sp(&self, m: &AtomSet) -> AtomSet {
        self.least_model(|r| r.fires_under_reduct(m))
    }

    /// `S_P` as an anti-monotone operator on the atom powerset.
    pub fn gl_operator(&self) -> OperatorSpec<AtomSet> {
        let me = self.clone();
        OperatorSpec::new("S_P", Monotonicity::Antimonotone, move |m: &AtomSet| {
            me.sp(m)
        })
    }

    pub fn is_stable_model(&self, m: &AtomSet) -> Result<bool> {
        self.check_set(m)?;
        Ok(self.sp(m) == *m)
    }

    /// Every subset of the base, tested one by one. Sorted.
    pub fn brute_force_stable_models(&self, cap: u64) -> Result<Vec<AtomSet>> {
        let lat = self.lattice();
        let mut out: Vec<AtomSet> = lat
            .enumerate(&full_interval(&lat), cap)?
            .into_iter()
            .filter(|m| self.sp(m) == *m)
            .collect();
        out.sort();
        Ok(out)
    }

    /// Stable models by guessing only the atoms that occur negatively.
    ///
    /// `S_P(m)` depends on `m` only through the negated atoms, so every stable
    /// model is `S_P(g)` for the guess `g = m ∩ neg`. Atoms that head no rule
    /// or only constraint-shaped rules are never in a stable model and are
    /// not guessed. Sorted.
    pub fn oracle_stable_models(&self, cap: u64) -> Result<Vec<AtomSet>> {
        let n = self.width();
        let mut negated = AtomSet::empty(n);
        let mut supported = AtomSet::empty(n);
        for r in &self.rules {
            negated.union_with(&r.neg);
            if !r.is_constraint_shaped() {
                supported.insert(r.head);
            }
        }
        let guessable: Vec<usize> = negated.intersection(&supported).iter().collect();
        if guessable.len() >= 63 || (1u64 << guessable.len()) > cap {
            return Err(Error::cap(
                format!("stable-model oracle over 2^{} guesses", guessable.len()),
                cap,
            ));
        }
        let mut out = Vec::new();
        for mask in 0..1u64 << guessable.len() {
            let g = AtomSet::from_indices(
                n,
                guessable
                    .iter()
                    .enumerate()
                    .filter(|(bit, _)| mask >> bit & 1 == 1)
                    .map(|(_, &a)| a),
            );
            let m = self.sp(&g);
            if m.intersection(&negated) == g {
                out.push(m);
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// `[μ, S_P(μ)]` with `μ = lfp(S_P ∘ S_P)`: atoms true in every stable
    /// model below, atoms true in some stable model above.
    pub fn well_founded_bound(&self) -> Interval<AtomSet> {
        let lat = self.lattice();
        let (mu, nu) = oscillating_pair(&lat, &self.gl_operator()).expect("S_P is anti-monotone");
        Interval::new(mu, nu)
    }

    /// Occurrences of each atom in rule bodies.
    pub fn body_frequency(&self) -> Vec<u64> {
        let mut w = vec![0u64; self.width()];
        for r in &self.rules {
            for a in r.pos.iter().chain(r.neg.iter()) {
                if a != r.head {
                    w[a] += 1;
                }
            }
        }
        w
    }

    /// Rules sorted and deduplicated, for structural comparison.
    pub fn canonical(&self) -> GroundProgram {
        let mut rules = self.rules.clone();
        rules.sort();
        rules.dedup();
        GroundProgram::new(Arc::clone(&self.universe), rules).expect("same universe")
    }

    /// Program text in the input language.
    ///
    /// Constraint-shaped rules print as `:- body.`; the `not head` literal is
    /// kept only when the head has other, ordinary rules.
    pub fn to_text(&self) -> String {
        let mut ordinary = AtomSet::empty(self.width());
        for r in &self.rules {
            if !r.is_constraint_shaped() {
                ordinary.insert(r.head);
            }
        }
        let name = |a: usize| self.universe.name(a);
        let mut out = String::new();
        for r in &self.rules {
            let mut lits: Vec<String> = r.pos.iter().map(|a| name(a).to_string()).collect();
            let skip = (r.is_constraint_shaped() && !ordinary.contains(r.head)).then_some(r.head);
            lits.extend(
                r.neg
                    .iter()
                    .filter(|&a| Some(a) != skip)
                    .map(|a| format!("not {}", name(a))),
            );
            if r.is_constraint_shaped() {
                if lits.is_empty() {
                    lits.push("1 = 1".into());
                }
                out.push_str(&format!(":- {}.\n", lits.join(", ")));
            } else if lits.is_empty() {
                out.push_str(&format!("{}.\n", name(r.head)));
            } else {
                out.push_str(&format!("{} :- {}.\n", name(r.head), lits.join(", ")));
            }
        }
        out
    }

    /// Stable models through the branch-and-bound search.
    pub fn stable_models(&self, cfg: &BnbConfig, enum_cap: u64) -> Result<StableModelReport> {
        let lat = self.lattice();
        let op = self.gl_operator();
        let search = bnb_run(&lat, &op, &full_interval(&lat), cfg)?;
        let complete = search.bounds.is_empty() && !search.stopped_early;
        let models = if complete {
            exact_fixed_points(&lat, &op, &search, enum_cap)?
        } else {
            search.fixed_points.clone()
        };
        Ok(StableModelReport {
            models,
            well_founded: self.well_founded_bound(),
            search,
            complete,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StableModelReport {
    /// Stable models found. All of them when `complete`.
    pub models: Vec<AtomSet>,
    pub well_founded: Interval<AtomSet>,
    pub search: SearchState,
    pub complete: bool,
}

impl StableModelReport {
    pub fn to_json(&self, lat: &Powerset) -> serde_json::Value {
        json!({
            "well_founded": lat.interval_to_visible_json(&self.well_founded),
            "models": self.models.iter().map(|m| lat.visible_names_of(m)).collect::<Vec<_>>(),
            "complete": self.complete,
            "search": self.search.to_json(lat),
        })
    }
}
