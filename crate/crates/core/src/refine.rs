//! Monotone envelopes and the interval refinement operator.
//!
//! For an operator `f` and a valid bound `B = [lo, hi]`, the lower envelope
//! `f^ℓ_B(x)` is the infimum of `f` over `[x, hi]` and the upper envelope
//! `f^u_B(x)` is the supremum over `[lo, x]`. Both are monotone in `x`, so
//!
//! ```text
//! F(B) = [ lfp(x ↦ lo ⊔ f^ℓ_B(x)), gfp(x ↦ hi ⊓ f^u_B(x)) ]
//! ```
//!
//! is computable by Kleene iteration. Every fixed point of `f` inside `B` is
//! inside `F(B)`, so an invalid `F(B)` proves that `B` holds no fixed point.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::lattice::{enumerate_interval, interval_subset, valid, Interval, Lattice};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Monotone,
    Antimonotone,
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Lower,
    Upper,
}

pub type ApplyFn<E> = Arc<dyn Fn(&E) -> E + Send + Sync>;

/// Closed-form envelope: `(B, x, side) ↦ f^side_B(x)`.
pub type EnvelopeFn<E> = Arc<dyn Fn(&Interval<E>, &E, Side) -> E + Send + Sync>;

/// A lattice self-map with a monotonicity tag.
///
/// The tag is trusted: it selects the envelope shortcut. An operator may also
/// carry a closed-form envelope, which then takes precedence over everything
/// else (needed on lattices that cannot be enumerated).
pub struct OperatorSpec<E> {
    pub name: String,
    pub monotonicity: Monotonicity,
    apply: ApplyFn<E>,
    envelope: Option<EnvelopeFn<E>>,
}

impl<E> Clone for OperatorSpec<E> {
    fn clone(&self) -> Self {
        OperatorSpec {
            name: self.name.clone(),
            monotonicity: self.monotonicity,
            apply: Arc::clone(&self.apply),
            envelope: self.envelope.clone(),
        }
    }
}

impl<E> fmt::Debug for OperatorSpec<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorSpec")
            .field("name", &self.name)
            .field("monotonicity", &self.monotonicity)
            .field("closed_form_envelope", &self.envelope.is_some())
            .finish()
    }
}

impl<E> OperatorSpec<E> {
    pub fn new(
        name: impl Into<String>,
        monotonicity: Monotonicity,
        apply: impl Fn(&E) -> E + Send + Sync + 'static,
    ) -> Self {
        OperatorSpec {
            name: name.into(),
            monotonicity,
            apply: Arc::new(apply),
            envelope: None,
        }
    }

    pub fn with_envelope(
        mut self,
        envelope: impl Fn(&Interval<E>, &E, Side) -> E + Send + Sync + 'static,
    ) -> Self {
        self.envelope = Some(Arc::new(envelope));
        self
    }

    /// The same map under a different tag, e.g. to force the enumeration path.
    pub fn retagged(&self, monotonicity: Monotonicity) -> Self {
        OperatorSpec {
            monotonicity,
            ..self.clone()
        }
    }

    pub fn apply(&self, x: &E) -> E {
        (self.apply)(x)
    }

    pub fn apply_fn(&self) -> ApplyFn<E> {
        Arc::clone(&self.apply)
    }

    pub fn has_closed_form_envelope(&self) -> bool {
        self.envelope.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefineConfig {
    /// Cap on F applications inside one IR run. `None` runs to a fixed point.
    pub max_f_steps: Option<usize>,
    /// Cap on Kleene iterations per endpoint.
    pub max_kleene_steps: Option<usize>,
    pub trace: bool,
    /// Use `[lo ⊔ f(hi), hi ⊓ f(lo)]` for anti-monotone operators.
    pub one_shot_antimonotone: bool,
    /// Largest range the enumeration-based envelope will scan.
    pub enum_cap: u64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            max_f_steps: None,
            max_kleene_steps: None,
            trace: false,
            one_shot_antimonotone: true,
            enum_cap: 1 << 20,
        }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_f_steps == Some(0) || self.max_kleene_steps == Some(0) {
            return Err(Error::usage("step caps must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnsoundEvidence {
    /// The refined pair is not an interval.
    Invalid,
    /// The refined interval is not inside its predecessor.
    EscapedParent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefineOutcome<E> {
    pub result: Interval<E>,
    pub converged: bool,
    pub steps_used: usize,
    pub unsound_evidence: Option<UnsoundEvidence>,
    /// One JSON object per F step when tracing is on.
    pub trace: Vec<serde_json::Value>,
}

impl<E> RefineOutcome<E> {
    pub fn is_sound_so_far(&self) -> bool {
        self.unsound_evidence.is_none()
    }
}

/// `f^side_B(x)`.
pub fn envelope<L: Lattice>(
    lat: &L,
    op: &OperatorSpec<L::Elem>,
    b: &Interval<L::Elem>,
    x: &L::Elem,
    side: Side,
    cfg: &RefineConfig,
) -> Result<L::Elem> {
    if let Some(env) = &op.envelope {
        return Ok(env(b, x, side));
    }
    let range = match side {
        Side::Lower => Interval::new(x.clone(), b.hi.clone()),
        Side::Upper => Interval::new(b.lo.clone(), x.clone()),
    };
    if !valid(lat, &range) {
        return Ok(match side {
            Side::Lower => lat.top(),
            Side::Upper => lat.bottom(),
        });
    }
    match (op.monotonicity, side) {
        (Monotonicity::Antimonotone, Side::Lower) => Ok(op.apply(&range.hi)),
        (Monotonicity::Antimonotone, Side::Upper) => Ok(op.apply(&range.lo)),
        (Monotonicity::Monotone, _) => Ok(op.apply(x)),
        (Monotonicity::General, _) => {
            let points = enumerate_interval(lat, &range, cfg.enum_cap)?;
            let images: Vec<L::Elem> = points.iter().map(|y| op.apply(y)).collect();
            Ok(match side {
                Side::Lower => lat.meet_all(images.iter()),
                Side::Upper => lat.join_all(images.iter()),
            })
        }
    }
}

/// One application of F together with whether both Kleene runs converged.
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport<E> {
    pub result: Interval<E>,
    pub converged: bool,
}

fn kleene<L: Lattice>(
    lat: &L,
    start: L::Elem,
    cap: Option<usize>,
    mut next: impl FnMut(&L::Elem) -> Result<L::Elem>,
) -> Result<(L::Elem, bool)> {
    let mut cur = start;
    let mut steps = 0usize;
    loop {
        if cap.is_some_and(|c| steps >= c) {
            return Ok((cur, false));
        }
        let n = next(&cur)?;
        steps += 1;
        if n == cur {
            return Ok((cur, true));
        }
        debug_assert!(
            lat.leq(&cur, &n) || lat.leq(&n, &cur),
            "Kleene chain lost direction"
        );
        cur = n;
    }
}

/// F(B) using separate operators for the two endpoints. The lower endpoint
/// only looks at `lower_op`, the upper only at `upper_op`.
pub fn refine_step_split<L: Lattice>(
    lat: &L,
    lower_op: &OperatorSpec<L::Elem>,
    upper_op: &OperatorSpec<L::Elem>,
    b: &Interval<L::Elem>,
    cfg: &RefineConfig,
) -> Result<StepReport<L::Elem>> {
    lat.check(&b.lo)?;
    lat.check(&b.hi)?;
    if !valid(lat, b) {
        return Err(Error::usage("refinement needs a valid interval"));
    }
    let one_shot = |op: &OperatorSpec<L::Elem>| {
        cfg.one_shot_antimonotone
            && op.monotonicity == Monotonicity::Antimonotone
            && op.envelope.is_none()
    };
    let (lo, lo_conv) = if one_shot(lower_op) {
        (lat.join(&b.lo, &lower_op.apply(&b.hi)), true)
    } else {
        kleene(lat, b.lo.clone(), cfg.max_kleene_steps, |x| {
            Ok(lat.join(&b.lo, &envelope(lat, lower_op, b, x, Side::Lower, cfg)?))
        })?
    };
    let (hi, hi_conv) = if one_shot(upper_op) {
        (lat.meet(&b.hi, &upper_op.apply(&b.lo)), true)
    } else {
        kleene(lat, b.hi.clone(), cfg.max_kleene_steps, |y| {
            Ok(lat.meet(&b.hi, &envelope(lat, upper_op, b, y, Side::Upper, cfg)?))
        })?
    };
    Ok(StepReport {
        result: Interval::new(lo, hi),
        converged: lo_conv && hi_conv,
    })
}

pub fn refine_step_report<L: Lattice>(
    lat: &L,
    op: &OperatorSpec<L::Elem>,
    b: &Interval<L::Elem>,
    cfg: &RefineConfig,
) -> Result<StepReport<L::Elem>> {
    refine_step_split(lat, op, op, b, cfg)
}

/// F(B). The result may be invalid; that is evidence, not an error.
pub fn refine_step<L: Lattice>(
    lat: &L,
    op: &OperatorSpec<L::Elem>,
    b: &Interval<L::Elem>,
    cfg: &RefineConfig,
) -> Result<Interval<L::Elem>> {
    Ok(refine_step_report(lat, op, b, cfg)?.result)
}

fn trace_line<L: Lattice>(lat: &L, step: usize, iv: &Interval<L::Elem>) -> serde_json::Value {
    json!({
        "step": step,
        "lower": lat.render(&iv.lo),
        "upper": lat.render(&iv.hi),
        "valid": valid(lat, iv),
    })
}

/// IR with separate endpoint operators; see [`refine_step_split`].
pub fn iterate_refine_split<L: Lattice>(
    lat: &L,
    lower_op: &OperatorSpec<L::Elem>,
    upper_op: &OperatorSpec<L::Elem>,
    b: &Interval<L::Elem>,
    cfg: &RefineConfig,
) -> Result<RefineOutcome<L::Elem>> {
    cfg.validate()?;
    let mut cur = b.clone();
    let mut out = RefineOutcome {
        result: b.clone(),
        converged: false,
        steps_used: 0,
        unsound_evidence: None,
        trace: Vec::new(),
    };
    loop {
        if cfg.max_f_steps.is_some_and(|m| out.steps_used >= m) {
            out.result = cur;
            return Ok(out);
        }
        let step = refine_step_split(lat, lower_op, upper_op, &cur, cfg)?;
        out.steps_used += 1;
        if cfg.trace {
            out.trace
                .push(trace_line(lat, out.steps_used, &step.result));
        }
        let next = step.result;
        if !valid(lat, &next) {
            out.unsound_evidence = Some(UnsoundEvidence::Invalid);
            out.result = next;
            return Ok(out);
        }
        if !interval_subset(lat, &next, &cur) {
            out.unsound_evidence = Some(UnsoundEvidence::EscapedParent);
            out.result = next;
            return Ok(out);
        }
        if next == cur {
            out.converged = step.converged;
            out.result = next;
            return Ok(out);
        }
        cur = next;
    }
}

/// IR: apply F until it stops changing, fails, or hits the step cap.
pub fn iterate_refine<L: Lattice>(
    lat: &L,
    op: &OperatorSpec<L::Elem>,
    b: &Interval<L::Elem>,
    cfg: &RefineConfig,
) -> Result<RefineOutcome<L::Elem>> {
    iterate_refine_split(lat, op, op, b, cfg)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhiReport<E> {
    /// `false` proves that `B` contains no fixed point.
    pub sound_so_far: bool,
    pub outcome: RefineOutcome<E>,
}

/// `IR(B)` is a valid interval inside `B`.
pub fn phi_check<L: Lattice>(
    lat: &L,
    op: &OperatorSpec<L::Elem>,
    b: &Interval<L::Elem>,
    cfg: &RefineConfig,
) -> Result<PhiReport<L::Elem>> {
    let outcome = iterate_refine(lat, op, b, cfg)?;
    let sound_so_far = outcome.unsound_evidence.is_none()
        && valid(lat, &outcome.result)
        && interval_subset(lat, &outcome.result, b);
    Ok(PhiReport {
        sound_so_far,
        outcome,
    })
}

/// `(μ, ν)` with `μ = lfp(f∘f)` and `ν = f(μ)`. Every fixed point of `f`
/// lies in `[μ, ν]`.
pub fn oscillating_pair<L: Lattice>(
    lat: &L,
    op: &OperatorSpec<L::Elem>,
) -> Result<(L::Elem, L::Elem)> {
    if op.monotonicity != Monotonicity::Antimonotone {
        return Err(Error::usage(format!(
            "oscillating pair needs an anti-monotone operator, `{}` is tagged {:?}",
            op.name, op.monotonicity
        )));
    }
    let (mu, _) = kleene(lat, lat.bottom(), None, |x| Ok(op.apply(&op.apply(x))))?;
    let nu = op.apply(&mu);
    Ok((mu, nu))
}

/// Resume IR from an externally supplied tighter bound.
///
/// The caller vouches for the soundness of `injected`; only containment in the
/// current result is checked.
pub fn jump_start<L: Lattice>(
    lat: &L,
    op: &OperatorSpec<L::Elem>,
    current: &RefineOutcome<L::Elem>,
    injected: &Interval<L::Elem>,
    cfg: &RefineConfig,
) -> Result<RefineOutcome<L::Elem>> {
    lat.check(&injected.lo)?;
    lat.check(&injected.hi)?;
    if !valid(lat, injected) || !interval_subset(lat, injected, &current.result) {
        return Err(Error::usage(
            "injected bound must be a valid interval inside the current result",
        ));
    }
    iterate_refine(lat, op, injected, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{contains_point, full_interval, AtomSet, Powerset};
    use crate::testkit::{antimonotone_rules, general_table, pqrs_sp};
    use proptest::prelude::*;

    fn set(l: &Powerset, names: &[&str]) -> AtomSet {
        l.set(names.iter().copied()).unwrap()
    }

    fn iv(l: &Powerset, lo: &[&str], hi: &[&str]) -> Interval<AtomSet> {
        Interval::new(set(l, lo), set(l, hi))
    }

    #[test]
    fn envelope_examples() {
        let (l, sp) = pqrs_sp();
        let cfg = RefineConfig::default();
        let b = full_interval(&l);
        for x in l.enumerate(&b, 64).unwrap() {
            assert_eq!(
                envelope(&l, &sp, &b, &x, Side::Upper, &cfg).unwrap(),
                l.top()
            );
            assert_eq!(
                envelope(&l, &sp, &b, &x, Side::Lower, &cfg).unwrap(),
                l.bottom()
            );
        }
        let id = OperatorSpec::new("id", Monotonicity::Monotone, |x: &AtomSet| x.clone());
        let b = iv(&l, &["p"], &["p", "q", "r"]);
        let x = set(&l, &["p", "q"]);
        assert_eq!(envelope(&l, &id, &b, &x, Side::Lower, &cfg).unwrap(), x);
        assert_eq!(envelope(&l, &id, &b, &x, Side::Upper, &cfg).unwrap(), x);
    }

    #[test]
    fn empty_range_conventions() {
        let (l, sp) = pqrs_sp();
        let cfg = RefineConfig::default();
        let b = iv(&l, &["p"], &["p", "r"]);
        let outside = set(&l, &["q"]);
        assert_eq!(
            envelope(&l, &sp, &b, &outside, Side::Lower, &cfg).unwrap(),
            l.top()
        );
        assert_eq!(
            envelope(&l, &sp, &b, &outside, Side::Upper, &cfg).unwrap(),
            l.bottom()
        );
    }

    #[test]
    fn refine_examples() {
        let (l, sp) = pqrs_sp();
        let cfg = RefineConfig::default();
        assert_eq!(
            refine_step(&l, &sp, &iv(&l, &[], &["q", "r", "s"]), &cfg).unwrap(),
            iv(&l, &["q", "s"], &["q", "r", "s"])
        );
        assert_eq!(
            refine_step(&l, &sp, &iv(&l, &["p"], &["p", "q", "r", "s"]), &cfg).unwrap(),
            iv(&l, &["p"], &["p", "r"])
        );
    }

    #[test]
    fn ir_examples() {
        let (l, sp) = pqrs_sp();
        let cfg = RefineConfig::default();
        let stuck = iterate_refine(&l, &sp, &full_interval(&l), &cfg).unwrap();
        assert_eq!(stuck.result, full_interval(&l));
        assert!(stuck.converged);
        let out = iterate_refine(&l, &sp, &iv(&l, &["p"], &["p", "q", "r", "s"]), &cfg).unwrap();
        assert_eq!(out.result, iv(&l, &["p", "r"], &["p", "r"]));
        assert!(out.converged);
    }

    #[test]
    fn phi_examples() {
        let (l, sp) = pqrs_sp();
        let cfg = RefineConfig::default();
        assert!(
            phi_check(&l, &sp, &iv(&l, &[], &["q", "r", "s"]), &cfg)
                .unwrap()
                .sound_so_far
        );
        let r = phi_check(&l, &sp, &iv(&l, &["p"], &["p"]), &cfg).unwrap();
        assert!(!r.sound_so_far);
        assert_eq!(r.outcome.result, iv(&l, &["p", "r"], &["p"]));
        assert_eq!(r.outcome.unsound_evidence, Some(UnsoundEvidence::Invalid));
    }

    #[test]
    fn oscillating_pair_examples() {
        let (l, sp) = pqrs_sp();
        assert_eq!(oscillating_pair(&l, &sp).unwrap(), (l.bottom(), l.top()));
        let c = Powerset::anonymous(1);
        let top = c.top();
        let constant = OperatorSpec::new("p.", Monotonicity::Antimonotone, move |_: &AtomSet| {
            top.clone()
        });
        assert_eq!(oscillating_pair(&c, &constant).unwrap(), (c.top(), c.top()));
        let mono = OperatorSpec::new("id", Monotonicity::Monotone, |x: &AtomSet| x.clone());
        assert!(matches!(oscillating_pair(&c, &mono), Err(Error::Usage(_))));
    }

    #[test]
    fn jump_start_examples() {
        let (l, sp) = pqrs_sp();
        let cfg = RefineConfig::default();
        let stuck = iterate_refine(&l, &sp, &full_interval(&l), &cfg).unwrap();
        let resumed = jump_start(
            &l,
            &sp,
            &stuck,
            &iv(&l, &["p"], &["p", "q", "r", "s"]),
            &cfg,
        )
        .unwrap();
        assert_eq!(resumed.result, iv(&l, &["p", "r"], &["p", "r"]));
        let same = jump_start(&l, &sp, &stuck, &stuck.result, &cfg).unwrap();
        assert_eq!(same, stuck);
        let narrow = iterate_refine(&l, &sp, &iv(&l, &["p"], &["p", "q", "r", "s"]), &cfg).unwrap();
        assert!(matches!(
            jump_start(&l, &sp, &narrow, &iv(&l, &[], &["q"]), &cfg),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn trace_lines_have_schema() {
        let (l, sp) = pqrs_sp();
        let cfg = RefineConfig {
            trace: true,
            ..RefineConfig::default()
        };
        let out = iterate_refine(&l, &sp, &iv(&l, &["p"], &["p", "q", "r", "s"]), &cfg).unwrap();
        assert_eq!(out.trace.len(), out.steps_used);
        assert_eq!(
            out.trace[0],
            json!({"step": 1, "lower": ["p"], "upper": ["p", "r"], "valid": true})
        );
    }

    #[test]
    fn step_caps_leave_sound_iterates() {
        let (l, sp) = pqrs_sp();
        let cfg = RefineConfig {
            max_f_steps: Some(1),
            ..RefineConfig::default()
        };
        let out = iterate_refine(&l, &sp, &iv(&l, &["p"], &["p", "q", "r", "s"]), &cfg).unwrap();
        assert!(!out.converged);
        assert_eq!(out.steps_used, 1);
        assert!(contains_point(&l, &out.result, &set(&l, &["p", "r"])));
        assert!(RefineConfig {
            max_f_steps: Some(0),
            ..cfg
        }
        .validate()
        .is_err());
    }

    /// Restricted lfp/gfp by their lattice-theoretic definitions.
    fn knaster_tarski(
        l: &Powerset,
        op: &OperatorSpec<AtomSet>,
        b: &Interval<AtomSet>,
    ) -> Interval<AtomSet> {
        let cfg = RefineConfig::default();
        let all = l.enumerate(&full_interval(l), 1 << 10).unwrap();
        let phi_lo =
            |x: &AtomSet| l.join(&b.lo, &envelope(l, op, b, x, Side::Lower, &cfg).unwrap());
        let phi_hi =
            |x: &AtomSet| l.meet(&b.hi, &envelope(l, op, b, x, Side::Upper, &cfg).unwrap());
        let pre: Vec<AtomSet> = all
            .iter()
            .filter(|x| l.leq(&phi_lo(x), x))
            .cloned()
            .collect();
        let post: Vec<AtomSet> = all
            .iter()
            .filter(|x| l.leq(x, &phi_hi(x)))
            .cloned()
            .collect();
        Interval::new(l.meet_all(pre.iter()), l.join_all(post.iter()))
    }

    fn interval_strategy(n: usize) -> impl Strategy<Value = Interval<AtomSet>> {
        (any::<u64>(), any::<u64>()).prop_map(move |(a, b)| {
            let lo = AtomSet::from_bits(n, a & b);
            Interval::new(lo, AtomSet::from_bits(n, a))
        })
    }

    proptest! {
        #[test]
        fn kleene_matches_definitions(table in prop::collection::vec(any::<u64>(), 64),
                                      b in interval_strategy(6)) {
            let (l, op) = general_table(6, &table);
            let cfg = RefineConfig::default();
            prop_assert_eq!(refine_step(&l, &op, &b, &cfg).unwrap(), knaster_tarski(&l, &op, &b));
        }

        #[test]
        fn antimonotone_fast_path_matches_enumeration(
            rules in prop::collection::vec((any::<u64>(), any::<u64>()), 0..8),
            b in interval_strategy(6),
        ) {
            let (l, op) = antimonotone_rules(6, &rules);
            let slow = op.retagged(Monotonicity::General);
            let cfg = RefineConfig::default();
            for x in l.enumerate(&full_interval(&l), 64).unwrap() {
                for side in [Side::Lower, Side::Upper] {
                    prop_assert_eq!(
                        envelope(&l, &op, &b, &x, side, &cfg).unwrap(),
                        envelope(&l, &slow, &b, &x, side, &cfg).unwrap()
                    );
                }
            }
            let fast = refine_step(&l, &op, &b, &cfg).unwrap();
            let exact = refine_step(&l, &slow, &b, &cfg).unwrap();
            if valid(&l, &fast) || valid(&l, &exact) {
                prop_assert_eq!(fast, exact);
            }
        }

        #[test]
        fn fixed_points_survive_refinement(table in prop::collection::vec(any::<u64>(), 32),
                                           b in interval_strategy(5)) {
            let (l, op) = general_table(5, &table);
            let cfg = RefineConfig::default();
            let out = iterate_refine(&l, &op, &b, &cfg).unwrap();
            for x in l.enumerate(&b, 64).unwrap() {
                if op.apply(&x) == x {
                    prop_assert!(out.is_sound_so_far());
                    prop_assert!(contains_point(&l, &out.result, &x));
                }
            }
        }
    }
}
