//! Sound branch-and-bound over powerset intervals.
//!
//! Starting from `IR(B_I)`, every active interval is split in two, each half
//! is refined, halves that refinement proves empty are dropped and the rest
//! become the next generation. No fixed point is ever lost: at every
//! iteration each fixed point inside `B_I` lies in some interval of
//! `final ∪ bounds`, so the search can be interrupted at any time.

use num_bigint::BigInt;
use rayon::prelude::*;
use serde_json::json;

use crate::error::{Error, Result};
use crate::lattice::powerset::split_on;
use crate::lattice::{
    adjacency_check, hull, interval_subset, total_cardinality, valid, AtomSet, DecomposePolicy,
    Interval, Lattice, Powerset,
};
use crate::refine::{iterate_refine, phi_check, OperatorSpec, RefineConfig};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StopMode {
    /// Stop after the iteration in which a fixed point is first seen.
    FirstFixedPoint,
    #[default]
    Exhaustive,
}

#[derive(Clone, Debug)]
pub struct BnbConfig {
    /// Maximum number of active intervals. `None` disables the budget.
    pub budget: Option<usize>,
    /// Maximum number of outer iterations.
    pub outer_cap: Option<usize>,
    pub ir: RefineConfig,
    pub stop_mode: StopMode,
    pub policy: DecomposePolicy,
    /// Drop finalized singletons whose point is not a fixed point.
    pub discard_nonfixed_singletons: bool,
    /// On a stall, try the remaining split atoms before finalizing.
    pub resplit_on_stall: bool,
    /// Process the intervals of one generation on the rayon pool.
    pub parallel: bool,
    /// Re-check the search invariants after every iteration.
    pub check_invariants: bool,
}

impl Default for BnbConfig {
    fn default() -> Self {
        BnbConfig {
            budget: None,
            outer_cap: None,
            ir: RefineConfig::default(),
            stop_mode: StopMode::Exhaustive,
            policy: DecomposePolicy::LowestIndex,
            discard_nonfixed_singletons: true,
            resplit_on_stall: false,
            parallel: false,
            check_invariants: cfg!(debug_assertions),
        }
    }
}

impl BnbConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budget == Some(0) {
            return Err(Error::usage("budget must be at least 1"));
        }
        if self.outer_cap == Some(0) {
            return Err(Error::usage("outer iteration cap must be at least 1"));
        }
        self.ir.validate()
    }
}

/// Snapshot of the search. Interval lists are kept in canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchState {
    /// Active intervals still to be split.
    pub bounds: Vec<Interval<AtomSet>>,
    pub final_bounds: Vec<Interval<AtomSet>>,
    /// Final intervals that refinement could not split further.
    pub stalled: Vec<Interval<AtomSet>>,
    pub fixed_points: Vec<AtomSet>,
    pub outer_iterations: usize,
    pub ir_calls: usize,
    /// `IR(B_I)`, or `None` when `B_I` was refuted outright.
    pub root: Option<Interval<AtomSet>>,
    pub stopped_early: bool,
}

impl SearchState {
    pub fn is_done(&self) -> bool {
        self.bounds.is_empty() || self.stopped_early
    }

    /// Every interval that may still hold a fixed point.
    pub fn coverage(&self) -> impl Iterator<Item = &Interval<AtomSet>> {
        self.final_bounds.iter().chain(&self.bounds)
    }

    pub fn to_json(&self, lat: &Powerset) -> serde_json::Value {
        let ivs = |v: &[Interval<AtomSet>]| -> Vec<serde_json::Value> {
            v.iter()
                .map(|b| serde_json::to_value(lat.interval_to_visible_json(b)).expect("plain data"))
                .collect()
        };
        json!({
            "final": ivs(&self.final_bounds),
            "active": ivs(&self.bounds),
            "fixed_points": self.fixed_points.iter().map(|x| lat.visible_names_of(x)).collect::<Vec<_>>(),
            "outer_iterations": self.outer_iterations,
            "ir_calls": self.ir_calls,
            "stalled": ivs(&self.stalled),
        })
    }
}

/// What one active interval turns into during an outer iteration.
#[derive(Default)]
struct Expansion {
    keep: Vec<Interval<AtomSet>>,
    finalize: Option<(Interval<AtomSet>, bool)>,
    ir_calls: usize,
}

/// Algorithm state that can be advanced one outer iteration at a time.
pub struct BnbSearch<'a> {
    lat: &'a Powerset,
    op: &'a OperatorSpec<AtomSet>,
    cfg: BnbConfig,
    input: Interval<AtomSet>,
    state: SearchState,
}

impl<'a> BnbSearch<'a> {
    /// Runs `IR(B_I)` and seeds the search. `B_I` must be sound; the full
    /// interval always is.
    pub fn new(
        lat: &'a Powerset,
        op: &'a OperatorSpec<AtomSet>,
        b_i: &Interval<AtomSet>,
        cfg: BnbConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        lat.check(&b_i.lo)?;
        lat.check(&b_i.hi)?;
        if !valid(lat, b_i) {
            return Err(Error::usage("initial bound must be a valid interval"));
        }
        let phi = phi_check(lat, op, b_i, &cfg.ir)?;
        let mut search = BnbSearch {
            lat,
            op,
            cfg,
            input: b_i.clone(),
            state: SearchState {
                bounds: Vec::new(),
                final_bounds: Vec::new(),
                stalled: Vec::new(),
                fixed_points: Vec::new(),
                outer_iterations: 0,
                ir_calls: 1,
                root: None,
                stopped_early: false,
            },
        };
        if phi.sound_so_far {
            let root = phi.outcome.result;
            search.state.root = Some(root.clone());
            search.note_endpoints(&root);
            if root.is_singleton() {
                search.finalize(root, false);
            } else {
                search.state.bounds.push(root);
            }
            search.after_iteration()?;
        }
        Ok(search)
    }

    pub fn state(&self) -> &SearchState {
        &self.state
    }

    pub fn into_state(self) -> SearchState {
        self.state
    }

    /// One outer iteration. Returns `false` once there is nothing left to do
    /// (no active intervals, early stop, or the outer cap).
    pub fn step(&mut self) -> Result<bool> {
        if self.state.is_done() || self.outer_cap_reached() {
            return Ok(false);
        }
        self.state.outer_iterations += 1;
        let bounds = std::mem::take(&mut self.state.bounds);
        let expansions: Vec<Expansion> = if self.cfg.parallel {
            bounds
                .par_iter()
                .map(|b| self.expand(b))
                .collect::<Result<_>>()?
        } else {
            bounds
                .iter()
                .map(|b| self.expand(b))
                .collect::<Result<_>>()?
        };
        let mut new_bounds: Vec<Interval<AtomSet>> = Vec::new();
        for e in expansions {
            self.state.ir_calls += e.ir_calls;
            if let Some((b, stalled)) = e.finalize {
                self.note_endpoints(&b);
                self.finalize(b, stalled);
            }
            for k in e.keep {
                self.note_endpoints(&k);
                if k.is_singleton() {
                    self.finalize(k, false);
                    continue;
                }
                new_bounds.push(k);
                if let Some(cap) = self.cfg.budget {
                    while new_bounds.len() > cap {
                        merge_cheapest_pair(self.lat, &mut new_bounds)?;
                    }
                }
            }
        }
        new_bounds.sort();
        self.state.bounds = new_bounds;
        if self.cfg.stop_mode == StopMode::FirstFixedPoint && !self.state.fixed_points.is_empty() {
            self.state.stopped_early = true;
        }
        self.after_iteration()?;
        Ok(!self.state.is_done() && !self.outer_cap_reached())
    }

    /// Steps until done and returns the final state.
    pub fn run(mut self) -> Result<SearchState> {
        while self.step()? {}
        Ok(self.state)
    }

    fn outer_cap_reached(&self) -> bool {
        self.cfg
            .outer_cap
            .is_some_and(|t| self.state.outer_iterations >= t)
    }

    fn expand(&self, b: &Interval<AtomSet>) -> Result<Expansion> {
        let mut out = Expansion::default();
        let ranking = self.cfg.policy.ranking(b);
        let Some(&first) = ranking.first() else {
            out.finalize = Some((b.clone(), false));
            return Ok(out);
        };
        let tries: &[usize] = if self.cfg.resplit_on_stall {
            &ranking
        } else {
            std::slice::from_ref(&first)
        };
        for &a in tries {
            let (b1, b2) = split_on(b, a);
            let mut keep = Vec::with_capacity(2);
            for child in [b1, b2] {
                out.ir_calls += 1;
                let phi = phi_check(self.lat, self.op, &child, &self.cfg.ir)?;
                if phi.sound_so_far {
                    keep.push(phi.outcome.result);
                }
            }
            if keep.len() == 2 && adjacency_check(self.lat, &keep[0], &keep[1])? {
                keep = vec![hull(self.lat, &keep[0], &keep[1])?];
            }
            if keep.len() == 1 && keep[0] == *b {
                continue;
            }
            out.keep = keep;
            return Ok(out);
        }
        out.finalize = Some((b.clone(), true));
        Ok(out)
    }

    fn note_endpoints(&mut self, b: &Interval<AtomSet>) {
        for x in [&b.lo, &b.hi] {
            if self.op.apply(x) == *x {
                if let Err(pos) = self.state.fixed_points.binary_search(x) {
                    self.state.fixed_points.insert(pos, x.clone());
                }
            }
        }
    }

    fn finalize(&mut self, b: Interval<AtomSet>, stalled: bool) {
        if b.is_singleton() && self.cfg.discard_nonfixed_singletons && self.op.apply(&b.lo) != b.lo
        {
            return;
        }
        if stalled {
            if let Err(pos) = self.state.stalled.binary_search(&b) {
                self.state.stalled.insert(pos, b.clone());
            }
        }
        if let Err(pos) = self.state.final_bounds.binary_search(&b) {
            self.state.final_bounds.insert(pos, b);
        }
    }

    fn after_iteration(&self) -> Result<()> {
        if self.cfg.check_invariants {
            self.check_invariants()
        } else {
            Ok(())
        }
    }

    /// Verifies the structural guarantees of the search on the current state.
    pub fn check_invariants(&self) -> Result<()> {
        let lat = self.lat;
        let s = &self.state;
        let fail = |m: String| Err(Error::Internal(m));
        let Some(root) = &s.root else {
            if s.bounds.is_empty() && s.final_bounds.is_empty() {
                return Ok(());
            }
            return fail("refuted root but non-empty state".into());
        };
        for b in s.coverage() {
            if !valid(lat, b) {
                return fail(format!("invalid interval {}", lat.format_interval(b)));
            }
            if !interval_subset(lat, b, root) {
                return fail(format!("{} escapes IR(B_I)", lat.format_interval(b)));
            }
        }
        for x in &s.fixed_points {
            if self.op.apply(x) != *x {
                return fail(format!("recorded non-fixed point {}", lat.format_set(x)));
            }
        }
        match self.cfg.budget {
            None => {
                let height = lat.height(&self.input)?;
                if s.outer_iterations > height {
                    return fail(format!(
                        "{} outer iterations exceed the height {height} of B_I",
                        s.outer_iterations
                    ));
                }
                let covered = total_cardinality(lat, s.coverage())?;
                if covered > lat.cardinality(root)? {
                    return fail("interval cardinalities exceed |IR(B_I)|".into());
                }
            }
            Some(k) => {
                if s.bounds.len() > k {
                    return fail(format!(
                        "{} active intervals exceed budget {k}",
                        s.bounds.len()
                    ));
                }
                if !self.cfg.resplit_on_stall {
                    let limit = 2 * k * s.outer_iterations + 1;
                    if s.ir_calls > limit {
                        return fail(format!("{} IR calls exceed 2KT+1 = {limit}", s.ir_calls));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Runs the search to completion (or to the configured caps).
pub fn bnb_run(
    lat: &Powerset,
    op: &OperatorSpec<AtomSet>,
    b_i: &Interval<AtomSet>,
    cfg: &BnbConfig,
) -> Result<SearchState> {
    BnbSearch::new(lat, op, b_i, cfg.clone())?.run()
}

fn merge_cheapest_pair(lat: &Powerset, set: &mut Vec<Interval<AtomSet>>) -> Result<()> {
    set.sort();
    let mut best: Option<(BigInt, usize, usize)> = None;
    for i in 0..set.len() {
        for j in i + 1..set.len() {
            let h = hull(lat, &set[i], &set[j])?;
            let parts = lat.cardinality(&set[i])? + lat.cardinality(&set[j])?;
            // Negative when the pair overlaps.
            let delta = BigInt::from(lat.cardinality(&h)?) - BigInt::from(parts);
            let better = match &best {
                None => true,
                Some((d, _, _)) => delta < *d,
            };
            if better {
                best = Some((delta, i, j));
            }
        }
    }
    if let Some((_, i, j)) = best {
        let h = hull(lat, &set[i], &set[j])?;
        set.remove(j);
        set.remove(i);
        set.push(h);
        set.sort();
    }
    Ok(())
}

/// Hull-merges the cheapest pairs until at most `k` intervals remain.
pub fn budget_enforce(
    lat: &Powerset,
    set: &[Interval<AtomSet>],
    k: usize,
) -> Result<Vec<Interval<AtomSet>>> {
    if k == 0 {
        return Err(Error::usage("budget must be at least 1"));
    }
    let mut out = set.to_vec();
    out.sort();
    out.dedup();
    while out.len() > k {
        merge_cheapest_pair(lat, &mut out)?;
    }
    Ok(out)
}

/// Replaces adjacent pairs by their union until no two are adjacent.
pub fn merge_adjacent(
    lat: &Powerset,
    bounds: &[Interval<AtomSet>],
) -> Result<Vec<Interval<AtomSet>>> {
    let mut out = bounds.to_vec();
    out.sort();
    out.dedup();
    'outer: loop {
        for i in 0..out.len() {
            for j in i + 1..out.len() {
                if adjacency_check(lat, &out[i], &out[j])? {
                    let h = hull(lat, &out[i], &out[j])?;
                    out.remove(j);
                    out.remove(i);
                    out.push(h);
                    out.sort();
                    continue 'outer;
                }
            }
        }
        return Ok(out);
    }
}

/// All fixed points inside the final intervals, found by enumeration.
///
/// Only meaningful once the search is done; singleton finals cost nothing,
/// stalled ones are scanned up to `cap` points each.
pub fn exact_fixed_points(
    lat: &Powerset,
    op: &OperatorSpec<AtomSet>,
    state: &SearchState,
    cap: u64,
) -> Result<Vec<AtomSet>> {
    let mut out = Vec::new();
    for b in state.coverage() {
        for x in lat.enumerate(b, cap)? {
            if op.apply(&x) == x {
                out.push(x);
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// `IR` of the whole lattice; the starting point of every search.
pub fn converged_root(
    lat: &Powerset,
    op: &OperatorSpec<AtomSet>,
    cfg: &RefineConfig,
) -> Result<Interval<AtomSet>> {
    Ok(iterate_refine(lat, op, &crate::lattice::full_interval(lat), cfg)?.result)
}
