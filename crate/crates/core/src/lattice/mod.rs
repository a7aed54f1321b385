//! Lattices and intervals over them.
//!
//! A [`Lattice`] is a value describing a complete lattice; its elements are
//! plain data ([`Lattice::Elem`]). Everything here is pure. Intervals are
//! ordered pairs `[lo, hi]` and are allowed to be invalid (`lo ≰ hi`): the
//! refinement operator reports unsoundness by producing such intervals, so
//! they are never normalized away.

pub(crate) mod powerset;

pub use powerset::{AtomSet, AtomUniverse, DecomposePolicy, IntervalJson, Powerset};

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Capabilities of a complete lattice.
///
/// `leq`, `join`, `meet`, `bottom` and `top` are mandatory. Height,
/// enumeration and exact cardinality of intervals are optional and report
/// [`Error::Unsupported`] by default.
pub trait Lattice {
    type Elem: Clone + PartialEq + fmt::Debug;

    fn bottom(&self) -> Self::Elem;
    fn top(&self) -> Self::Elem;
    fn leq(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
    fn join(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn meet(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    /// Checks that `e` belongs to this lattice (e.g. same universe width).
    fn check(&self, _e: &Self::Elem) -> Result<()> {
        Ok(())
    }

    /// Length of the longest chain inside a valid interval.
    fn height(&self, _iv: &Interval<Self::Elem>) -> Result<usize> {
        Err(Error::Unsupported("interval height"))
    }

    /// Number of elements of the interval; zero when it is invalid.
    fn cardinality(&self, _iv: &Interval<Self::Elem>) -> Result<BigUint> {
        Err(Error::Unsupported("interval cardinality"))
    }

    /// All elements of a valid interval in a deterministic order.
    fn enumerate(&self, _iv: &Interval<Self::Elem>, _cap: u64) -> Result<Vec<Self::Elem>> {
        Err(Error::Unsupported("interval enumeration"))
    }

    /// JSON rendering of an element, used by traces.
    fn render(&self, e: &Self::Elem) -> serde_json::Value;

    /// Join of a (possibly empty) family. `join ∅ = ⊥`.
    fn join_all<'a, I>(&self, items: I) -> Self::Elem
    where
        I: IntoIterator<Item = &'a Self::Elem>,
        Self::Elem: 'a,
    {
        items
            .into_iter()
            .fold(self.bottom(), |acc, e| self.join(&acc, e))
    }

    /// Meet of a (possibly empty) family. `meet ∅ = ⊤`.
    fn meet_all<'a, I>(&self, items: I) -> Self::Elem
    where
        I: IntoIterator<Item = &'a Self::Elem>,
        Self::Elem: 'a,
    {
        items
            .into_iter()
            .fold(self.top(), |acc, e| self.meet(&acc, e))
    }
}

/// An ordered pair of lattice elements. May be invalid.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interval<E> {
    pub lo: E,
    pub hi: E,
}

impl<E> Interval<E> {
    pub fn new(lo: E, hi: E) -> Self {
        Interval { lo, hi }
    }
}

impl<E: Clone> Interval<E> {
    pub fn singleton(x: E) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }
}

impl<E: PartialEq> Interval<E> {
    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }
}

/// `[⊥, ⊤]`.
pub fn full_interval<L: Lattice>(lat: &L) -> Interval<L::Elem> {
    Interval::new(lat.bottom(), lat.top())
}

pub fn is_valid_interval<L: Lattice>(lat: &L, lo: &L::Elem, hi: &L::Elem) -> Result<bool> {
    lat.check(lo)?;
    lat.check(hi)?;
    Ok(lat.leq(lo, hi))
}

/// Validity without the universe check, for hot paths on trusted values.
pub fn valid<L: Lattice>(lat: &L, iv: &Interval<L::Elem>) -> bool {
    lat.leq(&iv.lo, &iv.hi)
}

pub fn contains_point<L: Lattice>(lat: &L, iv: &Interval<L::Elem>, x: &L::Elem) -> bool {
    lat.leq(&iv.lo, x) && lat.leq(x, &iv.hi)
}

/// Point-set inclusion `inner ⊆ outer`. An invalid `inner` is empty and
/// therefore contained in everything; an invalid `outer` contains only
/// empty intervals.
pub fn interval_subset<L: Lattice>(
    lat: &L,
    inner: &Interval<L::Elem>,
    outer: &Interval<L::Elem>,
) -> bool {
    if !valid(lat, inner) {
        return true;
    }
    lat.leq(&outer.lo, &inner.lo) && lat.leq(&inner.hi, &outer.hi)
}

/// Precision order on pairs: `(x1, y1) ≤p (x2, y2)` iff `x2 ≤ x1` and
/// `y1 ≤ y2`. Coincides with inclusion on valid intervals and is defined on
/// every pair.
pub fn precision_leq<L: Lattice>(lat: &L, a: &Interval<L::Elem>, b: &Interval<L::Elem>) -> bool {
    lat.leq(&b.lo, &a.lo) && lat.leq(&a.hi, &b.hi)
}

/// `[lo1 ⊓ lo2, hi1 ⊔ hi2]`, the join under the precision order.
pub fn hull<L: Lattice>(
    lat: &L,
    a: &Interval<L::Elem>,
    b: &Interval<L::Elem>,
) -> Result<Interval<L::Elem>> {
    for e in [&a.lo, &a.hi, &b.lo, &b.hi] {
        lat.check(e)?;
    }
    Ok(Interval::new(
        lat.meet(&a.lo, &b.lo),
        lat.join(&a.hi, &b.hi),
    ))
}

/// `[lo1 ⊔ lo2, hi1 ⊓ hi2]`: the point-set intersection (invalid if empty).
pub fn intersect<L: Lattice>(
    lat: &L,
    a: &Interval<L::Elem>,
    b: &Interval<L::Elem>,
) -> Interval<L::Elem> {
    Interval::new(lat.join(&a.lo, &b.lo), lat.meet(&a.hi, &b.hi))
}

pub fn interval_cardinality<L: Lattice>(lat: &L, iv: &Interval<L::Elem>) -> Result<BigUint> {
    lat.check(&iv.lo)?;
    lat.check(&iv.hi)?;
    lat.cardinality(iv)
}

/// Whether the point-set union of two intervals is itself an interval.
///
/// Exact via `|hull| = |a| + |b| - |a ∩ b|`: the hull always contains the
/// union, so equality of sizes means it is the union.
pub fn adjacency_check<L: Lattice>(
    lat: &L,
    a: &Interval<L::Elem>,
    b: &Interval<L::Elem>,
) -> Result<bool> {
    let h = hull(lat, a, b)?;
    let union = lat.cardinality(a)? + lat.cardinality(b)?;
    let common = lat.cardinality(&intersect(lat, a, b))?;
    Ok(lat.cardinality(&h)? + common == union)
}

/// All elements of a valid interval, refusing intervals larger than `cap`.
pub fn enumerate_interval<L: Lattice>(
    lat: &L,
    iv: &Interval<L::Elem>,
    cap: u64,
) -> Result<Vec<L::Elem>> {
    lat.check(&iv.lo)?;
    lat.check(&iv.hi)?;
    if !valid(lat, iv) {
        return Ok(Vec::new());
    }
    lat.enumerate(iv, cap)
}

/// Sum of exact cardinalities, used by the search-space accounting.
pub fn total_cardinality<'a, L: Lattice>(
    lat: &L,
    ivs: impl IntoIterator<Item = &'a Interval<L::Elem>>,
) -> Result<BigUint>
where
    L::Elem: 'a,
{
    let mut sum = BigUint::zero();
    for iv in ivs {
        sum += lat.cardinality(iv)?;
    }
    Ok(sum)
}
