mod common;

use common::{
    all_intervals, brute_fixed_points, in_interval, random_general_op, rng, small_corpus,
};
use fixbound::lattice::{full_interval, interval_subset, valid, AtomSet, Interval, Powerset};
use fixbound::refine::{
    envelope, iterate_refine, jump_start, refine_step, Monotonicity, OperatorSpec, RefineConfig,
    Side,
};
use rand::Rng;

/// `(lattice, operator, fixed points)` drawn from ground programs and from
/// random tables.
fn operators() -> Vec<(Powerset, OperatorSpec<AtomSet>, Vec<AtomSet>)> {
    let mut out = Vec::new();
    for p in small_corpus(60, 21, 8) {
        let lat = p.lattice();
        let op = p.gl_operator();
        let fps = brute_fixed_points(&lat, &op, p.width());
        out.push((lat, op, fps));
    }
    let mut r = rng(22);
    for _ in 0..40 {
        let n = r.gen_range(1..=6);
        let lat = Powerset::anonymous(n);
        let op = random_general_op(&mut r, n);
        let fps = brute_fixed_points(&lat, &op, n);
        out.push((lat, op, fps));
    }
    out
}

#[test]
fn every_iterate_keeps_every_fixed_point() {
    let cfg = RefineConfig::default();
    for (lat, op, fps) in operators() {
        for mu in &fps {
            let mut b = full_interval(&lat);
            for _ in 0..64 {
                assert!(in_interval(&b, mu));
                let next = refine_step(&lat, &op, &b, &cfg).unwrap();
                if next == b {
                    break;
                }
                b = next;
            }
        }
    }
}

#[test]
fn refining_a_sound_bound_stays_valid_and_inside() {
    let cfg = RefineConfig::default();
    for (lat, op, fps) in operators() {
        for b in all_intervals(lat.width()).into_iter().step_by(3) {
            if !fps.iter().any(|m| in_interval(&b, m)) {
                continue;
            }
            let f = refine_step(&lat, &op, &b, &cfg).unwrap();
            assert!(valid(&lat, &f));
            assert!(interval_subset(&lat, &f, &b));
        }
    }
}

#[test]
fn refinement_is_monotone_on_sound_bounds() {
    let cfg = RefineConfig::default();
    let mut r = rng(23);
    for (lat, op, fps) in operators() {
        let n = lat.width();
        for mu in &fps {
            for _ in 0..20 {
                // B1 ⊆ B2, both around the fixed point.
                let mask = (1u64 << n) - 1;
                let m = mu.to_bits();
                let lo2 = m & r.gen::<u64>();
                let hi2 = (m | r.gen::<u64>()) & mask;
                let lo1 = lo2 | (m & r.gen::<u64>());
                let hi1 = hi2 & (m | r.gen::<u64>());
                let b1 = Interval::new(AtomSet::from_bits(n, lo1), AtomSet::from_bits(n, hi1));
                let b2 = Interval::new(AtomSet::from_bits(n, lo2), AtomSet::from_bits(n, hi2));
                let f1 = refine_step(&lat, &op, &b1, &cfg).unwrap();
                let f2 = refine_step(&lat, &op, &b2, &cfg).unwrap();
                assert!(interval_subset(&lat, &f1, &f2));
            }
        }
    }
}

#[test]
fn a_valid_image_lies_inside_its_argument() {
    let cfg = RefineConfig::default();
    for (lat, op, _) in operators() {
        for b in all_intervals(lat.width()).into_iter().step_by(2) {
            let f = refine_step(&lat, &op, &b, &cfg).unwrap();
            if valid(&lat, &f) {
                assert!(interval_subset(&lat, &f, &b));
            }
        }
    }
}

#[test]
fn jump_start_is_at_least_as_tight_as_a_restart() {
    let cfg = RefineConfig::default();
    let mut r = rng(24);
    for (lat, op, fps) in operators() {
        let from_root = iterate_refine(&lat, &op, &full_interval(&lat), &cfg).unwrap();
        if !valid(&lat, &from_root.result) {
            continue;
        }
        for mu in &fps {
            // A sound bound inside the current result.
            let lo = from_root
                .result
                .lo
                .union(&mu.intersection(&AtomSet::from_bits(
                    lat.width(),
                    r.gen::<u64>() & ((1u64 << lat.width()) - 1),
                )));
            let injected = Interval::new(lo, from_root.result.hi.clone());
            let resumed = jump_start(&lat, &op, &from_root, &injected, &cfg).unwrap();
            assert!(valid(&lat, &resumed.result));
            assert!(interval_subset(&lat, &resumed.result, &from_root.result));
            assert!(in_interval(&resumed.result, mu));
        }
    }
}

#[test]
fn antimonotone_shortcut_matches_enumeration() {
    let fast = RefineConfig::default();
    let slow = RefineConfig {
        one_shot_antimonotone: false,
        ..RefineConfig::default()
    };
    let mut programs = 0;
    for p in small_corpus(40, 25, 8) {
        let lat = p.lattice();
        let op = p.gl_operator();
        let general = op.retagged(Monotonicity::General);
        let n = lat.width();
        programs += 1;
        for b in all_intervals(n) {
            for x in [&b.lo, &b.hi] {
                for side in [Side::Lower, Side::Upper] {
                    assert_eq!(
                        envelope(&lat, &op, &b, x, side, &fast).unwrap(),
                        envelope(&lat, &general, &b, x, side, &fast).unwrap()
                    );
                }
            }
            // The closed form and the Kleene runs agree exactly on valid
            // results. Past an invalid lower endpoint the Kleene run sees an
            // empty range and jumps to ⊤, so there only validity is compared.
            let one_shot = refine_step(&lat, &op, &b, &fast).unwrap();
            for other in [
                refine_step(&lat, &op, &b, &slow).unwrap(),
                refine_step(&lat, &general, &b, &fast).unwrap(),
            ] {
                if valid(&lat, &one_shot) {
                    assert_eq!(one_shot, other);
                } else {
                    assert!(!valid(&lat, &other));
                }
            }
        }
    }
    assert_eq!(programs, 40);
}
