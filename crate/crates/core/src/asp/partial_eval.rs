//! Specializing a ground program to a bound, and emitting the bound as
//! solver assumptions.

use std::collections::HashSet;
use std::sync::Arc;

use super::program::{GroundProgram, GroundRule};
use crate::error::{Error, Result};
use crate::lattice::{interval_subset, valid, AtomSet, AtomUniverse, Interval, Lattice};

impl GroundProgram {
    fn check_bound(&self, b: &Interval<AtomSet>) -> Result<()> {
        let lat = self.lattice();
        lat.check(&b.lo)?;
        lat.check(&b.hi)?;
        if !valid(&lat, b) {
            return Err(Error::usage("partial evaluation needs a valid bound"));
        }
        Ok(())
    }

    /// Simplifies the program under the bound `[lo, hi]`.
    ///
    /// The result has the same universe and its stable models are exactly the
    /// stable models of `self` that lie inside the bound:
    ///
    /// * atoms of `lo` that `S_P(hi)` derives become facts and are removed
    ///   from positive bodies;
    /// * the remaining atoms of `lo` keep their rules and get `:- not a`;
    /// * rules with a positive literal outside `hi` or a negative literal in
    ///   `lo` are dropped, and `not x` for `x ∉ hi` is deleted;
    /// * a rule whose head is outside `hi` becomes a constraint.
    pub fn partial_eval(&self, bound: &Interval<AtomSet>) -> Result<GroundProgram> {
        self.check_bound(bound)?;
        let (lo, hi) = (&bound.lo, &bound.hi);
        let n = self.width();
        let outside = hi.complement();
        let facts = lo.intersection(&self.sp(hi));
        let pending = lo.difference(&facts);
        let empty = AtomSet::empty(n);

        let mut rules: Vec<GroundRule> = facts
            .iter()
            .map(|a| GroundRule {
                head: a,
                pos: empty.clone(),
                neg: empty.clone(),
            })
            .collect();
        for r in self.rules() {
            if facts.contains(r.head) || !r.pos.is_disjoint(&outside) || !r.neg.is_disjoint(lo) {
                continue;
            }
            let mut neg = r.neg.intersection(hi);
            if !hi.contains(r.head) {
                neg.insert(r.head);
            }
            rules.push(GroundRule {
                head: r.head,
                pos: r.pos.difference(&facts),
                neg,
            });
        }
        rules.extend(pending.iter().map(|a| GroundRule {
            head: a,
            pos: empty.clone(),
            neg: AtomSet::from_indices(n, [a]),
        }));
        let mut seen = HashSet::new();
        rules.retain(|r| seen.insert(r.clone()));
        GroundProgram::new(Arc::clone(self.universe()), rules)
    }

    /// Partially evaluates a program that was already specialized to
    /// `bound1` under the tighter `bound2`.
    pub fn compose_partial_eval(
        &self,
        bound1: &Interval<AtomSet>,
        bound2: &Interval<AtomSet>,
    ) -> Result<GroundProgram> {
        self.check_bound(bound1)?;
        self.check_bound(bound2)?;
        if !interval_subset(&self.lattice(), bound2, bound1) {
            return Err(Error::usage("the new bound must lie inside the cached one"));
        }
        self.partial_eval(bound2)
    }
}

/// One literal per line: the atoms of `lo`, then `-x` for every `x ∉ hi`,
/// each group in universe order. Hidden atoms are skipped.
pub fn emit_assumptions(bound: &Interval<AtomSet>, universe: &AtomUniverse) -> Result<String> {
    let n = universe.len();
    if bound.lo.width() != n || bound.hi.width() != n {
        return Err(Error::usage("bound over a different universe"));
    }
    if !bound.lo.is_subset(&bound.hi) {
        return Err(Error::usage("cannot emit assumptions for an invalid bound"));
    }
    let mut out = String::new();
    for a in bound.lo.iter().filter(|&a| !universe.is_hidden(a)) {
        out.push_str(universe.name(a));
        out.push('\n');
    }
    for a in bound
        .hi
        .complement()
        .iter()
        .filter(|&a| !universe.is_hidden(a))
    {
        out.push('-');
        out.push_str(universe.name(a));
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asp::{CHOICE_PROGRAM, THREE_COLORING};
    use crate::lattice::{contains_point, full_interval};

    fn models_in(p: &GroundProgram, b: &Interval<AtomSet>) -> Vec<AtomSet> {
        let lat = p.lattice();
        p.oracle_stable_models(1 << 20)
            .unwrap()
            .into_iter()
            .filter(|m| contains_point(&lat, b, m))
            .collect()
    }

    #[test]
    fn full_bound_changes_nothing() {
        let p = GroundProgram::from_text(THREE_COLORING).unwrap();
        let pe = p.partial_eval(&full_interval(&p.lattice())).unwrap();
        assert_eq!(pe, p);
    }

    #[test]
    fn coloring_under_the_figure_bound() {
        let p = GroundProgram::from_text(THREE_COLORING).unwrap();
        let lat = p.lattice();
        let lo = lat.set(["red(1)", "green(4)"]).unwrap();
        let hi = lat
            .top()
            .without(lat.universe().position("blue(2)").unwrap());
        let b = Interval::new(lo, hi);
        let pe = p.partial_eval(&b).unwrap();
        let want = models_in(&p, &b);
        assert!(!want.is_empty());
        assert_eq!(pe.oracle_stable_models(1 << 20).unwrap(), want);
        assert!(pe.rules().len() < p.rules().len());
        assert_eq!(
            emit_assumptions(&b, lat.universe()).unwrap(),
            "red(1)\ngreen(4)\n-blue(2)\n"
        );
    }

    #[test]
    fn unsupported_lower_atoms_are_not_made_facts() {
        // `a` only follows from `x`, which the constraint rules out.
        let p = GroundProgram::from_text("a :- b. b :- a. b :- x. x :- not y. y :- not x. :- x.")
            .unwrap();
        let lat = p.lattice();
        let b = Interval::new(lat.set(["a"]).unwrap(), lat.top());
        let pe = p.partial_eval(&b).unwrap();
        assert!(pe.oracle_stable_models(1 << 10).unwrap().is_empty());
    }

    #[test]
    fn rules_outside_the_bound_go_away() {
        let p = GroundProgram::from_text("x :- not y. y :- not x. z :- x.").unwrap();
        let lat = p.lattice();
        let b = Interval::new(lat.bottom(), lat.set(["y", "z"]).unwrap());
        let pe = p.partial_eval(&b).unwrap();
        assert!(!pe.to_text().contains("z :- x"));
        assert_eq!(pe.oracle_stable_models(64).unwrap(), models_in(&p, &b));
    }

    #[test]
    fn compose_matches_direct() {
        let p = GroundProgram::from_text(THREE_COLORING).unwrap();
        let lat = p.lattice();
        let idx = |n: &str| lat.universe().position(n).unwrap();
        let b1 = Interval::new(lat.set(["red(1)"]).unwrap(), lat.top());
        let b2 = Interval::new(
            lat.set(["red(1)", "green(4)"]).unwrap(),
            lat.top().without(idx("blue(2)")),
        );
        let cached = p.partial_eval(&b1).unwrap();
        let composed = cached.compose_partial_eval(&b1, &b2).unwrap();
        let direct = p.partial_eval(&b2).unwrap();
        assert_eq!(composed.canonical(), direct.canonical());
        let full = full_interval(&lat);
        assert_eq!(p.compose_partial_eval(&full, &b2).unwrap(), direct);
        assert!(matches!(
            cached.compose_partial_eval(&b2, &b1),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn assumption_examples() {
        let p = GroundProgram::from_text(CHOICE_PROGRAM).unwrap();
        let lat = p.lattice();
        let b = Interval::new(lat.set(["p"]).unwrap(), lat.set(["p", "r"]).unwrap());
        assert_eq!(emit_assumptions(&b, lat.universe()).unwrap(), "p\n-q\n-s\n");
        assert_eq!(
            emit_assumptions(&full_interval(&lat), lat.universe()).unwrap(),
            ""
        );
    }

    #[test]
    fn invalid_bounds_are_rejected() {
        let p = GroundProgram::from_text(CHOICE_PROGRAM).unwrap();
        let lat = p.lattice();
        let bad = Interval::new(lat.top(), lat.bottom());
        assert!(p.partial_eval(&bad).is_err());
        assert!(emit_assumptions(&bad, lat.universe()).is_err());
    }
}
