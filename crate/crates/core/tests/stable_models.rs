mod common;

use common::{in_interval, program_corpus};
use fixbound::asp::GroundProgram;
use fixbound::bnb::{bnb_run, converged_root, BnbConfig};
use fixbound::lattice::{full_interval, AtomSet};

#[test]
fn search_finds_exactly_the_brute_force_models() {
    let mut all_singletons = 0;
    for (text, p) in program_corpus(220, 11) {
        let lat = p.lattice();
        let oracle = p.brute_force_stable_models(1 << 16).unwrap();
        let state = bnb_run(
            &lat,
            &p.gl_operator(),
            &full_interval(&lat),
            &BnbConfig::default(),
        )
        .unwrap();
        assert!(state.bounds.is_empty());
        for m in &oracle {
            let hits = state
                .final_bounds
                .iter()
                .filter(|b| in_interval(b, m))
                .count();
            assert_eq!(
                hits,
                1,
                "model {} in {hits} finals\n{text}",
                lat.format_set(m)
            );
        }
        if state.final_bounds.iter().all(|b| b.is_singleton()) {
            all_singletons += 1;
            let mut found: Vec<_> = state.final_bounds.iter().map(|b| b.lo.clone()).collect();
            found.sort();
            assert_eq!(found, oracle, "{text}");
        }
        let report = p.stable_models(&BnbConfig::default(), 1 << 16).unwrap();
        assert!(report.complete);
        assert_eq!(report.models, oracle, "{text}");
    }
    assert!(all_singletons > 100);
}

#[test]
fn pruned_oracle_agrees_with_plain_enumeration() {
    for (text, p) in program_corpus(200, 12) {
        assert_eq!(
            p.oracle_stable_models(1 << 16).unwrap(),
            p.brute_force_stable_models(1 << 16).unwrap(),
            "{text}"
        );
    }
}

#[test]
fn well_founded_bound_brackets_every_model() {
    for (text, p) in program_corpus(200, 13) {
        let lat = p.lattice();
        let wf = p.well_founded_bound();
        let root = converged_root(&lat, &p.gl_operator(), &Default::default()).unwrap();
        assert_eq!(root, wf, "{text}");
        for m in p.brute_force_stable_models(1 << 16).unwrap() {
            assert!(in_interval(&wf, &m), "{text}");
        }
    }
}

fn is_model(p: &GroundProgram, m: &AtomSet) -> bool {
    p.rules()
        .iter()
        .all(|r| !(r.pos.is_subset(m) && r.neg.is_disjoint(m)) || m.contains(r.head))
}

#[test]
fn stable_models_are_minimal_models() {
    for (text, p) in program_corpus(150, 14) {
        for m in p.brute_force_stable_models(1 << 16).unwrap() {
            assert!(is_model(&p, &m), "{text}");
            let members: Vec<usize> = m.iter().collect();
            for bits in 0..(1u64 << members.len()) - 1 {
                let sub = AtomSet::from_indices(
                    p.width(),
                    (0..members.len())
                        .filter(|i| bits >> i & 1 == 1)
                        .map(|i| members[i]),
                );
                assert!(!is_model(&p, &sub), "{text}");
            }
            assert_eq!(p.gl_reduct(&m).unwrap().minimal_model().unwrap(), m);
        }
    }
}
