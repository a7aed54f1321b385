mod common;

use common::{in_interval, program_corpus, random_general_op, rng, small_corpus};
use fixbound::bnb::{BnbConfig, BnbSearch, SearchState};
use fixbound::lattice::{
    adjacency_check, full_interval, interval_cardinality, total_cardinality, AtomSet, Interval,
    Powerset,
};
use fixbound::refine::OperatorSpec;
use rand::Rng;

fn covered(state: &SearchState, models: &[AtomSet]) -> bool {
    models
        .iter()
        .all(|m| state.coverage().any(|b| in_interval(b, m)))
}

#[test]
fn unbudgeted_search_terminates_within_the_height() {
    for (text, p) in program_corpus(200, 31) {
        let lat = p.lattice();
        let op = p.gl_operator();
        let mut s = BnbSearch::new(&lat, &op, &full_interval(&lat), BnbConfig::default()).unwrap();
        while s.step().unwrap() {}
        assert!(s.state().bounds.is_empty(), "{text}");
        assert!(s.state().outer_iterations <= p.width(), "{text}");
    }
}

#[test]
fn interrupting_after_any_iteration_keeps_every_model() {
    for (text, p) in program_corpus(200, 32) {
        let lat = p.lattice();
        let op = p.gl_operator();
        let models = p.oracle_stable_models(1 << 16).unwrap();
        let mut s = BnbSearch::new(&lat, &op, &full_interval(&lat), BnbConfig::default()).unwrap();
        loop {
            assert!(covered(s.state(), &models), "{text}");
            if !s.step().unwrap() {
                break;
            }
        }
        assert!(covered(s.state(), &models), "{text}");
    }
}

#[test]
fn covered_points_never_exceed_the_refined_root() {
    for (text, p) in program_corpus(200, 33) {
        let lat = p.lattice();
        let op = p.gl_operator();
        let mut s = BnbSearch::new(&lat, &op, &full_interval(&lat), BnbConfig::default()).unwrap();
        loop {
            let st = s.state();
            if let Some(root) = &st.root {
                let sum = total_cardinality(&lat, st.coverage()).unwrap();
                assert!(sum <= interval_cardinality(&lat, root).unwrap(), "{text}");
            }
            s.check_invariants().unwrap();
            if !s.step().unwrap() {
                break;
            }
        }
    }
}

#[test]
fn budget_caps_active_intervals_and_refinement_runs() {
    for (text, p) in program_corpus(120, 34) {
        let lat = p.lattice();
        let op = p.gl_operator();
        let models = p.oracle_stable_models(1 << 16).unwrap();
        for k in [2usize, 4, 8] {
            for t in [4usize, 16] {
                let cfg = BnbConfig {
                    budget: Some(k),
                    outer_cap: Some(t),
                    ..BnbConfig::default()
                };
                let mut s = BnbSearch::new(&lat, &op, &full_interval(&lat), cfg).unwrap();
                loop {
                    let st = s.state();
                    assert!(st.bounds.len() <= k, "{text}");
                    assert!(st.outer_iterations <= t);
                    assert!(st.ir_calls <= 2 * k * t + 1, "{text}");
                    assert!(covered(st, &models), "{text}");
                    if !s.step().unwrap() {
                        break;
                    }
                }
            }
        }
    }
}

/// Pairwise non-adjacency of active intervals is not checked by the search
/// itself (children of non-adjacent intervals could in principle be
/// adjacent); here it is checked on programs and random tables.
#[test]
fn active_intervals_are_not_adjacent_on_the_corpus() {
    let (mut iterations, mut adjacent) = (0usize, 0usize);
    let mut r = rng(35);
    let mut ops: Vec<(Powerset, OperatorSpec<AtomSet>)> = small_corpus(200, 35, 10)
        .into_iter()
        .map(|p| (p.lattice(), p.gl_operator()))
        .collect();
    for _ in 0..200 {
        let n = r.gen_range(2..=8);
        ops.push((Powerset::anonymous(n), random_general_op(&mut r, n)));
    }
    for (lat, op) in &ops {
        let mut s = BnbSearch::new(lat, op, &full_interval(lat), BnbConfig::default()).unwrap();
        loop {
            let b: &[Interval<AtomSet>] = &s.state().bounds;
            iterations += 1;
            let any = (0..b.len())
                .any(|i| (i + 1..b.len()).any(|j| adjacency_check(lat, &b[i], &b[j]).unwrap()));
            adjacent += usize::from(any);
            s.check_invariants().unwrap();
            if !s.step().unwrap() {
                break;
            }
        }
    }
    assert_eq!(adjacent, 0, "of {iterations} iterations");
    assert!(iterations > 400);
}

#[test]
fn parallel_search_matches_sequential() {
    for (text, p) in program_corpus(60, 36) {
        let lat = p.lattice();
        let op = p.gl_operator();
        let run = |parallel| {
            let cfg = BnbConfig {
                parallel,
                budget: Some(3),
                ..BnbConfig::default()
            };
            let mut s = BnbSearch::new(&lat, &op, &full_interval(&lat), cfg).unwrap();
            while s.step().unwrap() {}
            s.into_state()
        };
        assert_eq!(run(false), run(true), "{text}");
    }
}
