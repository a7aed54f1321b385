//! The two-player best-response map on the unit square, refined with exact
//! rationals.
//!
//! `f(x1, x2) = (1 − x2², x1/2)` is antitone in `x2` and monotone in `x1`,
//! so neither shortcut applies; the envelopes are given in closed form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lattice::{valid, Interval, Lattice};
use crate::refine::{refine_step, Monotonicity, OperatorSpec, RefineConfig, Side};

/// Above this many steps the denominators (which square every step) get
/// unreasonably large.
pub const MAX_DEMO_STEPS: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalPair {
    pub x1: BigRational,
    pub x2: BigRational,
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl RationalPair {
    pub fn new(x1: BigRational, x2: BigRational) -> Self {
        RationalPair { x1, x2 }
    }

    pub fn from_ratios((n1, d1): (i64, i64), (n2, d2): (i64, i64)) -> Self {
        RationalPair::new(ratio(n1, d1), ratio(n2, d2))
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (
            self.x1.to_f64().unwrap_or(f64::NAN),
            self.x2.to_f64().unwrap_or(f64::NAN),
        )
    }
}

/// `n/d` even for integers.
pub fn render_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// `[0,1] × [0,1]`, ordered component-wise.
#[derive(Clone, Copy, Debug, Default)]
pub struct UnitSquare;

impl Lattice for UnitSquare {
    type Elem = RationalPair;

    fn bottom(&self) -> RationalPair {
        RationalPair::new(BigRational::zero(), BigRational::zero())
    }

    fn top(&self) -> RationalPair {
        RationalPair::new(BigRational::one(), BigRational::one())
    }

    fn leq(&self, a: &RationalPair, b: &RationalPair) -> bool {
        a.x1 <= b.x1 && a.x2 <= b.x2
    }

    fn join(&self, a: &RationalPair, b: &RationalPair) -> RationalPair {
        RationalPair::new(
            a.x1.clone().max(b.x1.clone()),
            a.x2.clone().max(b.x2.clone()),
        )
    }

    fn meet(&self, a: &RationalPair, b: &RationalPair) -> RationalPair {
        RationalPair::new(
            a.x1.clone().min(b.x1.clone()),
            a.x2.clone().min(b.x2.clone()),
        )
    }

    fn check(&self, e: &RationalPair) -> Result<()> {
        let unit = |r: &BigRational| *r >= BigRational::zero() && *r <= BigRational::one();
        if unit(&e.x1) && unit(&e.x2) {
            Ok(())
        } else {
            Err(Error::usage("point outside the unit square"))
        }
    }

    fn render(&self, e: &RationalPair) -> Value {
        json!([render_rational(&e.x1), render_rational(&e.x2)])
    }
}

pub fn best_response(p: &RationalPair) -> RationalPair {
    RationalPair::new(
        BigRational::one() - &p.x2 * &p.x2,
        &p.x1 / BigRational::from_integer(BigInt::from(2)),
    )
}

/// `f` with its envelopes over `B = [lo, hi]`:
/// the upper one is `(1 − lo2², x1/2)` for `x ≥ lo` (and `⊥` otherwise), the
/// lower one `(1 − hi2², x1/2)` for `x ≤ hi` (and `⊤` otherwise).
pub fn best_response_operator() -> OperatorSpec<RationalPair> {
    OperatorSpec::new("best-response", Monotonicity::General, best_response).with_envelope(
        |b: &Interval<RationalPair>, x: &RationalPair, side: Side| {
            let sq = UnitSquare;
            match side {
                Side::Upper if sq.leq(&b.lo, x) => {
                    best_response(&RationalPair::new(x.x1.clone(), b.lo.x2.clone()))
                }
                Side::Upper => sq.bottom(),
                Side::Lower if sq.leq(x, &b.hi) => {
                    best_response(&RationalPair::new(x.x1.clone(), b.hi.x2.clone()))
                }
                Side::Lower => sq.top(),
            }
        },
    )
}

/// The unique fixed point `(−2 + 2√2, −1 + √2)` in floating point, from the
/// quadratic `x1² + 4·x1 − 4 = 0`.
pub fn fixed_point_f64() -> (f64, f64) {
    let x1 = (-4.0 + (16.0f64 + 16.0).sqrt()) / 2.0;
    (x1, x1 / 2.0)
}

/// Whether `p` lies in `iv` up to `slack` per coordinate.
pub fn contains_approx(iv: &Interval<RationalPair>, p: (f64, f64), slack: f64) -> bool {
    let (lo, hi) = (iv.lo.to_f64(), iv.hi.to_f64());
    lo.0 - slack <= p.0 && p.0 <= hi.0 + slack && lo.1 - slack <= p.1 && p.1 <= hi.1 + slack
}

#[derive(Clone, Debug, PartialEq)]
pub struct DemoTrace {
    /// `F^k([⊥, ⊤])` for `k = 1, 2, ...`.
    pub steps: Vec<Interval<RationalPair>>,
    /// `F` stopped changing within the step budget (it never does here).
    pub converged: bool,
    /// An interval that contains no fixed point, and its image.
    pub empty_region: Interval<RationalPair>,
    pub empty_region_image: Interval<RationalPair>,
}

impl DemoTrace {
    /// One JSON object per line: the steps, then the empty-region check.
    pub fn to_json_lines(&self) -> Vec<Value> {
        let sq = UnitSquare;
        let iv = |i: &Interval<RationalPair>| json!({"lower": sq.render(&i.lo), "upper": sq.render(&i.hi)});
        let mut out: Vec<Value> = self
            .steps
            .iter()
            .enumerate()
            .map(|(k, s)| {
                json!({
                    "step": k + 1,
                    "lower": sq.render(&s.lo),
                    "upper": sq.render(&s.hi),
                    "valid": valid(&sq, s),
                })
            })
            .collect();
        out.push(json!({"converged": self.converged, "steps": self.steps.len()}));
        out.push(json!({
            "region": iv(&self.empty_region),
            "image": iv(&self.empty_region_image),
            "valid": valid(&sq, &self.empty_region_image),
        }));
        out
    }

    pub fn render_text(&self) -> String {
        let sq = UnitSquare;
        let pair =
            |p: &RationalPair| format!("({}, {})", render_rational(&p.x1), render_rational(&p.x2));
        let mut out = String::new();
        for (k, s) in self.steps.iter().enumerate() {
            out.push_str(&format!(
                "step {}: [{}, {}]\n",
                k + 1,
                pair(&s.lo),
                pair(&s.hi)
            ));
        }
        if !self.converged {
            out.push_str(&format!("not converged after {} steps\n", self.steps.len()));
        }
        out.push_str(&format!(
            "region [{}, {}] maps to [{}, {}] ({})\n",
            pair(&self.empty_region.lo),
            pair(&self.empty_region.hi),
            pair(&self.empty_region_image.lo),
            pair(&self.empty_region_image.hi),
            if valid(&sq, &self.empty_region_image) {
                "valid"
            } else {
                "invalid: no fixed point"
            },
        ));
        out
    }
}

pub fn run_demo(max_steps: usize) -> Result<DemoTrace> {
    if !(2..=MAX_DEMO_STEPS).contains(&max_steps) {
        return Err(Error::usage(format!(
            "demo steps must be between 2 and {MAX_DEMO_STEPS}"
        )));
    }
    let sq = UnitSquare;
    let op = best_response_operator();
    let cfg = RefineConfig::default();
    let mut cur = Interval::new(sq.bottom(), sq.top());
    let mut steps = Vec::new();
    let mut converged = false;
    for _ in 0..max_steps {
        let next = refine_step(&sq, &op, &cur, &cfg)?;
        steps.push(next.clone());
        if next == cur || !valid(&sq, &next) {
            converged = next == cur;
            break;
        }
        cur = next;
    }
    let empty_region = Interval::new(sq.bottom(), RationalPair::from_ratios((1, 5), (1, 5)));
    let empty_region_image = refine_step(&sq, &op, &empty_region, &cfg)?;
    Ok(DemoTrace {
        steps,
        converged,
        empty_region,
        empty_region_image,
    })
}
