use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{valid, Interval, Lattice};
use crate::error::{Error, Result};

/// Ordered, duplicate-free list of atom names.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AtomUniverse {
    names: Vec<String>,
    index: HashMap<String, usize>,
    hidden: Vec<bool>,
}

impl AtomUniverse {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut u = AtomUniverse::default();
        for n in names {
            let n = n.into();
            if u.index.contains_key(&n) {
                return Err(Error::usage(format!("duplicate atom `{n}`")));
            }
            u.push(n, false);
        }
        Ok(u)
    }

    /// Appends an atom, returning its position. Existing names are reused.
    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        self.push(name.to_string(), false)
    }

    /// Appends an auxiliary atom that reports leave out.
    pub fn push_hidden(&mut self, name: String) -> usize {
        debug_assert!(!self.index.contains_key(&name));
        self.push(name, true)
    }

    fn push(&mut self, name: String, hidden: bool) -> usize {
        let i = self.names.len();
        self.index.insert(name.clone(), i);
        self.names.push(name);
        self.hidden.push(hidden);
        i
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn is_hidden(&self, i: usize) -> bool {
        self.hidden[i]
    }

    pub fn hidden_set(&self) -> AtomSet {
        AtomSet::from_indices(self.len(), (0..self.len()).filter(|&i| self.hidden[i]))
    }
}

const WORD: usize = 64;

/// A subset of a universe of `width` atoms, stored as a bit-vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AtomSet {
    width: usize,
    words: Vec<u64>,
}

impl AtomSet {
    pub fn empty(width: usize) -> Self {
        AtomSet {
            width,
            words: vec![0; width.div_ceil(WORD)],
        }
    }

    pub fn full(width: usize) -> Self {
        let mut s = AtomSet::empty(width);
        for w in s.words.iter_mut() {
            *w = !0;
        }
        s.trim();
        s
    }

    pub fn from_indices(width: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut s = AtomSet::empty(width);
        for i in idx {
            s.insert(i);
        }
        s
    }

    /// Builds a set from the low `width` bits of `bits`. `width ≤ 64`.
    pub fn from_bits(width: usize, bits: u64) -> Self {
        assert!(width <= WORD);
        let mut s = AtomSet::empty(width);
        if width > 0 {
            s.words[0] = bits;
            s.trim();
        }
        s
    }

    /// The low 64 members as a bit mask. `width ≤ 64`.
    pub fn to_bits(&self) -> u64 {
        assert!(self.width <= WORD);
        self.words.first().copied().unwrap_or(0)
    }

    fn trim(&mut self) {
        let extra = self.words.len() * WORD - self.width;
        if extra > 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= !0u64 >> extra;
            }
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.width && self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        assert!(
            i < self.width,
            "atom {i} outside universe of {}",
            self.width
        );
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    pub fn remove(&mut self, i: usize) {
        if i < self.width {
            self.words[i / WORD] &= !(1 << (i % WORD));
        }
    }

    pub fn with(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.insert(i);
        s
    }

    pub fn without(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.remove(i);
        s
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_subset(&self, other: &AtomSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &AtomSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    fn zip_with(&self, other: &AtomSet, f: impl Fn(u64, u64) -> u64) -> AtomSet {
        debug_assert_eq!(self.width, other.width);
        let mut s = AtomSet {
            width: self.width,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        };
        s.trim();
        s
    }

    pub fn union(&self, other: &AtomSet) -> AtomSet {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &AtomSet) -> AtomSet {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &AtomSet) -> AtomSet {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> AtomSet {
        let mut s = AtomSet {
            width: self.width,
            words: self.words.iter().map(|w| !w).collect(),
        };
        s.trim();
        s
    }

    pub fn union_with(&mut self, other: &AtomSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// Member indices in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + b)
            })
        })
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }
}

impl fmt::Debug for AtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Width first, then the member index lists lexicographically.
impl Ord for AtomSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.width
            .cmp(&other.width)
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

impl PartialOrd for AtomSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Atom-selection policy for splitting powerset intervals.
#[derive(Clone, Debug, Default)]
pub enum DecomposePolicy {
    /// Lowest universe index first.
    #[default]
    LowestIndex,
    /// Highest weight first, ties by lowest index. Weights are per atom.
    HighestWeight(Arc<Vec<u64>>),
    /// Pseudo-random, reproducible from the seed and the interval.
    Seeded(u64),
}

impl DecomposePolicy {
    /// Candidate split atoms of `iv`, best first.
    pub fn ranking(&self, iv: &Interval<AtomSet>) -> Vec<usize> {
        let mut free: Vec<usize> = iv.hi.difference(&iv.lo).iter().collect();
        match self {
            DecomposePolicy::LowestIndex => {}
            DecomposePolicy::HighestWeight(w) => {
                free.sort_by_key(|&a| (std::cmp::Reverse(w.get(a).copied().unwrap_or(0)), a));
            }
            DecomposePolicy::Seeded(seed) => {
                let mix = iv.lo.words.iter().chain(&iv.hi.words).fold(*seed, |h, &w| {
                    (h.rotate_left(17) ^ w).wrapping_mul(0x9E37_79B9_7F4A_7C15)
                });
                free.shuffle(&mut ChaCha8Rng::seed_from_u64(mix));
            }
        }
        free
    }
}

/// The powerset lattice `2^U` of an [`AtomUniverse`].
#[derive(Clone, Debug)]
pub struct Powerset {
    universe: Arc<AtomUniverse>,
}

impl Powerset {
    pub fn new(universe: Arc<AtomUniverse>) -> Self {
        Powerset { universe }
    }

    /// Lattice over anonymous atoms `a0 .. a{n-1}`.
    pub fn anonymous(n: usize) -> Self {
        let u = AtomUniverse::new((0..n).map(|i| format!("a{i}"))).expect("distinct names");
        Powerset::new(Arc::new(u))
    }

    pub fn universe(&self) -> &Arc<AtomUniverse> {
        &self.universe
    }

    pub fn width(&self) -> usize {
        self.universe.len()
    }

    pub fn set<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Result<AtomSet> {
        let mut s = AtomSet::empty(self.width());
        for n in names {
            let i = self
                .universe
                .position(n)
                .ok_or_else(|| Error::UnknownAtom(n.to_string()))?;
            s.insert(i);
        }
        Ok(s)
    }

    pub fn names_of(&self, s: &AtomSet) -> Vec<String> {
        s.iter()
            .map(|i| self.universe.name(i).to_string())
            .collect()
    }

    /// Names of the members that are not hidden.
    pub fn visible_names_of(&self, s: &AtomSet) -> Vec<String> {
        s.iter()
            .filter(|&i| !self.universe.is_hidden(i))
            .map(|i| self.universe.name(i).to_string())
            .collect()
    }

    /// `{p, r}` style rendering of the visible members.
    pub fn format_set(&self, s: &AtomSet) -> String {
        format!("{{{}}}", self.visible_names_of(s).join(", "))
    }

    pub fn format_interval(&self, iv: &Interval<AtomSet>) -> String {
        format!("[{}, {}]", self.format_set(&iv.lo), self.format_set(&iv.hi))
    }

    /// Splits a valid interval on the policy's preferred atom. Singletons are
    /// returned unchanged as `(B, B)`.
    pub fn decompose(
        &self,
        iv: &Interval<AtomSet>,
        policy: &DecomposePolicy,
    ) -> Result<(Interval<AtomSet>, Interval<AtomSet>)> {
        self.check(&iv.lo)?;
        self.check(&iv.hi)?;
        if !valid(self, iv) {
            return Err(Error::usage("cannot decompose an invalid interval"));
        }
        match policy.ranking(iv).first() {
            None => Ok((iv.clone(), iv.clone())),
            Some(&a) => Ok(split_on(iv, a)),
        }
    }

    pub fn interval_to_json(&self, iv: &Interval<AtomSet>) -> IntervalJson {
        IntervalJson {
            lower: self.names_of(&iv.lo),
            upper: self.names_of(&iv.hi),
            valid: valid(self, iv),
        }
    }

    /// Like [`Powerset::interval_to_json`] but leaving out hidden atoms.
    pub fn interval_to_visible_json(&self, iv: &Interval<AtomSet>) -> IntervalJson {
        IntervalJson {
            lower: self.visible_names_of(&iv.lo),
            upper: self.visible_names_of(&iv.hi),
            valid: valid(self, iv),
        }
    }

    pub fn interval_from_json(&self, j: &IntervalJson) -> Result<Interval<AtomSet>> {
        let iv = Interval::new(
            self.set(j.lower.iter().map(String::as_str))?,
            self.set(j.upper.iter().map(String::as_str))?,
        );
        if valid(self, &iv) != j.valid {
            return Err(Error::usage(
                "interval `valid` flag disagrees with its bounds",
            ));
        }
        Ok(iv)
    }
}

/// `([lo, hi∖{a}], [lo∪{a}, hi])`.
pub(crate) fn split_on(iv: &Interval<AtomSet>, a: usize) -> (Interval<AtomSet>, Interval<AtomSet>) {
    (
        Interval::new(iv.lo.clone(), iv.hi.without(a)),
        Interval::new(iv.lo.with(a), iv.hi.clone()),
    )
}

/// Interval serialization: atom lists sorted by universe index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalJson {
    pub lower: Vec<String>,
    pub upper: Vec<String>,
    pub valid: bool,
}

impl Lattice for Powerset {
    type Elem = AtomSet;

    fn bottom(&self) -> AtomSet {
        AtomSet::empty(self.width())
    }

    fn top(&self) -> AtomSet {
        AtomSet::full(self.width())
    }

    fn leq(&self, a: &AtomSet, b: &AtomSet) -> bool {
        a.is_subset(b)
    }

    fn join(&self, a: &AtomSet, b: &AtomSet) -> AtomSet {
        a.union(b)
    }

    fn meet(&self, a: &AtomSet, b: &AtomSet) -> AtomSet {
        a.intersection(b)
    }

    fn check(&self, e: &AtomSet) -> Result<()> {
        if e.width() != self.width() {
            return Err(Error::usage(format!(
                "element over {} atoms used with a universe of {}",
                e.width(),
                self.width()
            )));
        }
        Ok(())
    }

    fn height(&self, iv: &Interval<AtomSet>) -> Result<usize> {
        if !valid(self, iv) {
            return Err(Error::usage("height of an invalid interval"));
        }
        Ok(iv.hi.len() - iv.lo.len())
    }

    fn cardinality(&self, iv: &Interval<AtomSet>) -> Result<BigUint> {
        if !valid(self, iv) {
            return Ok(BigUint::zero());
        }
        Ok(BigUint::one() << (iv.hi.len() - iv.lo.len()))
    }

    fn enumerate(&self, iv: &Interval<AtomSet>, cap: u64) -> Result<Vec<AtomSet>> {
        let free: Vec<usize> = iv.hi.difference(&iv.lo).iter().collect();
        if free.len() >= 64 || (1u64 << free.len()) > cap {
            return Err(Error::cap(
                format!("enumerating an interval of 2^{} elements", free.len()),
                cap,
            ));
        }
        let count = 1u64 << free.len();
        let mut out = Vec::with_capacity(count as usize);
        for mask in 0..count {
            let mut s = iv.lo.clone();
            for (bit, &a) in free.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    s.insert(a);
                }
            }
            out.push(s);
        }
        Ok(out)
    }

    fn render(&self, e: &AtomSet) -> serde_json::Value {
        serde_json::Value::from(self.names_of(e))
    }
}
