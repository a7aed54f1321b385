//! Random corpora and brute-force references shared by the integration tests.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::sync::Arc;

use fixbound::asp::GroundProgram;
use fixbound::lattice::{AtomSet, Interval, Lattice};
use fixbound::refine::{Monotonicity, OperatorSpec};
use fixbound::specanalysis::{parse_mini, MiniProgram};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A normal program over `a0..a{atoms-1}` with mixed negation. About one
/// rule in twelve is an integrity constraint.
pub fn random_program_text(rng: &mut ChaCha8Rng, atoms: usize, rules: usize) -> String {
    let mut out = String::new();
    for _ in 0..rules {
        let mut body: Vec<String> = Vec::new();
        for a in 0..atoms {
            match rng.gen_range(0..10) {
                0 => body.push(format!("a{a}")),
                1 | 2 => body.push(format!("not a{a}")),
                _ => {}
            }
        }
        body.truncate(3);
        body.shuffle(rng);
        let head = if rng.gen_ratio(1, 12) && !body.is_empty() {
            String::new()
        } else {
            format!("a{}", rng.gen_range(0..atoms))
        };
        if body.is_empty() {
            let _ = writeln!(out, "{head}.");
        } else {
            let _ = writeln!(out, "{head} :- {}.", body.join(", "));
        }
    }
    out
}

/// Programs with at most 10 atoms and 25 rules.
pub fn program_corpus(count: usize, seed: u64) -> Vec<(String, GroundProgram)> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let atoms = r.gen_range(1..=10);
            let rules = r.gen_range(1..=25);
            let text = random_program_text(&mut r, atoms, rules);
            let p = GroundProgram::from_text(&text).expect("generated programs are well formed");
            (text, p)
        })
        .collect()
}

/// Like [`program_corpus`] but every ground universe has at most `max_width`
/// atoms, hidden ones included.
pub fn small_corpus(count: usize, seed: u64, max_width: usize) -> Vec<GroundProgram> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let atoms = r.gen_range(1..=max_width.min(10));
        let rules = r.gen_range(1..=25);
        let text = random_program_text(&mut r, atoms, rules);
        let p = GroundProgram::from_text(&text).unwrap();
        if p.width() <= max_width {
            out.push(p);
        }
    }
    out
}

pub fn all_sets(width: usize) -> Vec<AtomSet> {
    assert!(width <= 16);
    (0..1u64 << width)
        .map(|b| AtomSet::from_bits(width, b))
        .collect()
}

pub fn all_intervals(width: usize) -> Vec<Interval<AtomSet>> {
    let sets = all_sets(width);
    let mut out = Vec::new();
    for lo in &sets {
        for hi in &sets {
            if lo.is_subset(hi) {
                out.push(Interval::new(lo.clone(), hi.clone()));
            }
        }
    }
    out
}

pub fn random_interval(rng: &mut ChaCha8Rng, width: usize) -> Interval<AtomSet> {
    let mask = if width == 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    };
    let lo = rng.gen::<u64>() & mask & rng.gen::<u64>();
    let hi = lo | (rng.gen::<u64>() & mask);
    Interval::new(AtomSet::from_bits(width, lo), AtomSet::from_bits(width, hi))
}

pub fn brute_fixed_points<L: Lattice<Elem = AtomSet>>(
    _lat: &L,
    op: &OperatorSpec<AtomSet>,
    width: usize,
) -> Vec<AtomSet> {
    let mut v: Vec<AtomSet> = all_sets(width)
        .into_iter()
        .filter(|x| op.apply(x) == *x)
        .collect();
    v.sort();
    v
}

pub fn in_interval(b: &Interval<AtomSet>, x: &AtomSet) -> bool {
    b.lo.is_subset(x) && x.is_subset(&b.hi)
}

const VARS: [&str; 3] = ["x", "y", "z"];

fn operand(rng: &mut ChaCha8Rng) -> String {
    if rng.gen_ratio(1, 4) {
        rng.gen_range(-2..=2).to_string()
    } else {
        VARS.choose(rng).unwrap().to_string()
    }
}

/// A random mini-IR program with up to `max_assumptions` distinct
/// assumptions. The entry never has predecessors.
pub fn random_mini_text(rng: &mut ChaCha8Rng, max_assumptions: usize) -> String {
    let blocks = rng.gen_range(2..=6);
    let name = |i: usize| format!("l{i}");
    let mut out = String::new();
    for b in 0..blocks {
        let _ = writeln!(out, "loc {}:", name(b));
        for _ in 0..rng.gen_range(0..=3) {
            let target = VARS.choose(rng).unwrap();
            let expr = match rng.gen_range(0..5) {
                0 => rng.gen_range(-3..=3).to_string(),
                1 => format!("-{}", VARS.choose(rng).unwrap()),
                2 => format!("{} + {}", operand(rng), operand(rng)),
                3 => format!("{} * {}", operand(rng), operand(rng)),
                _ => format!("{} - {}", operand(rng), operand(rng)),
            };
            let _ = writeln!(out, "  {target} := {expr}");
        }
        let target = |rng: &mut ChaCha8Rng| name(rng.gen_range(1..blocks));
        match rng.gen_range(0..4) {
            0 => {
                let _ = writeln!(out, "  goto {}", target(rng));
            }
            1 | 2 => {
                let op = ["<", "<=", ">", ">=", "=", "!="].choose(rng).unwrap();
                let v = VARS.choose(rng).unwrap();
                let (t, e) = (target(rng), target(rng));
                let _ = writeln!(out, "  if {v} {op} 0 goto {t} else {e}");
            }
            _ => {}
        }
    }
    let mut seen = Vec::new();
    for _ in 0..rng.gen_range(0..=max_assumptions) {
        let l = name(rng.gen_range(0..blocks));
        let v = VARS.choose(rng).unwrap();
        let s = ["+", "-", "0"].choose(rng).unwrap();
        let line = format!("assume {l} {v} {s}");
        if !seen.contains(&line) {
            seen.push(line);
        }
    }
    for l in seen {
        let _ = writeln!(out, "{l}");
    }
    // Variables mentioned only in assumptions must exist.
    let declare: String = VARS.iter().map(|v| format!("  {v} := {v}\n")).collect();
    out.replacen("loc l0:\n", &format!("loc l0:\n{declare}"), 1)
}

pub fn mini_corpus(count: usize, seed: u64, max_assumptions: usize) -> Vec<Arc<MiniProgram>> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let text = random_mini_text(&mut r, max_assumptions);
            Arc::new(parse_mini(&text).unwrap_or_else(|e| panic!("{e}\n{text}")))
        })
        .collect()
}

/// A random map on `2^width` given by its table, tagged general.
pub fn random_general_op(rng: &mut ChaCha8Rng, width: usize) -> OperatorSpec<AtomSet> {
    let mask = (1u64 << width) - 1;
    // Bias towards images near the input so fixed points actually occur.
    let table: Vec<u64> = (0..1u64 << width)
        .map(|x| {
            if rng.gen_ratio(1, 4) {
                x
            } else {
                rng.gen::<u64>() & mask
            }
        })
        .collect();
    OperatorSpec::new("table", Monotonicity::General, move |x: &AtomSet| {
        AtomSet::from_bits(width, table[x.to_bits() as usize])
    })
}
