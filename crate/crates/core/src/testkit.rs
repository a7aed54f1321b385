//! Operators shared by unit tests.

use std::sync::Arc;

use crate::lattice::{AtomSet, AtomUniverse, Powerset};
use crate::refine::{Monotonicity, OperatorSpec};

/// `p :- not q. q :- not p. r :- p. s :- q.` written out by hand.
pub fn pqrs_sp() -> (Powerset, OperatorSpec<AtomSet>) {
    let l = Powerset::new(Arc::new(AtomUniverse::new(["p", "q", "r", "s"]).unwrap()));
    let op = OperatorSpec::new("S_P", Monotonicity::Antimonotone, |m: &AtomSet| {
        let mut out = AtomSet::empty(4);
        if !m.contains(1) {
            out.insert(0);
            out.insert(2);
        }
        if !m.contains(0) {
            out.insert(1);
            out.insert(3);
        }
        out
    });
    (l, op)
}

/// Arbitrary map given by its value table (indexed by bit mask).
pub fn general_table(n: usize, table: &[u64]) -> (Powerset, OperatorSpec<AtomSet>) {
    let t: Vec<u64> = table.iter().map(|v| v & ((1u64 << n) - 1)).collect();
    let op = OperatorSpec::new("table", Monotonicity::General, move |x: &AtomSet| {
        AtomSet::from_bits(n, t[x.to_bits() as usize])
    });
    (Powerset::anonymous(n), op)
}

/// `f(x) = ∪ { rhs : lhs ∩ x = ∅ }`, anti-monotone by construction.
pub fn antimonotone_rules(n: usize, rules: &[(u64, u64)]) -> (Powerset, OperatorSpec<AtomSet>) {
    let mask = (1u64 << n) - 1;
    let r: Vec<(u64, u64)> = rules.iter().map(|(a, b)| (a & mask, b & mask)).collect();
    let op = OperatorSpec::new("anti", Monotonicity::Antimonotone, move |x: &AtomSet| {
        let bits = x.to_bits();
        AtomSet::from_bits(
            n,
            r.iter()
                .filter(|(lhs, _)| lhs & bits == 0)
                .fold(0, |acc, (_, rhs)| acc | rhs),
        )
    });
    (Powerset::anonymous(n), op)
}
