use std::fmt;

use serde::{Serialize, Serializer};

/// The five-point sign lattice `⊥ ≤ −, 0, + ≤ ⊤`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Bot,
    Neg,
    Zero,
    Pos,
    Top,
}

impl Sign {
    pub const ALL: [Sign; 5] = [Sign::Bot, Sign::Neg, Sign::Zero, Sign::Pos, Sign::Top];

    /// Concrete signs as a bit set: `−` = 1, `0` = 2, `+` = 4.
    fn bits(self) -> u8 {
        match self {
            Sign::Bot => 0,
            Sign::Neg => 1,
            Sign::Zero => 2,
            Sign::Pos => 4,
            Sign::Top => 7,
        }
    }

    fn from_bits(b: u8) -> Sign {
        match b {
            0 => Sign::Bot,
            1 => Sign::Neg,
            2 => Sign::Zero,
            4 => Sign::Pos,
            _ => Sign::Top,
        }
    }

    pub fn of(v: i64) -> Sign {
        match v.signum() {
            -1 => Sign::Neg,
            0 => Sign::Zero,
            _ => Sign::Pos,
        }
    }

    pub fn leq(self, other: Sign) -> bool {
        self.bits() & !other.bits() == 0
    }

    pub fn join(self, other: Sign) -> Sign {
        Sign::from_bits(self.bits() | other.bits())
    }

    pub fn meet(self, other: Sign) -> Sign {
        Sign::from_bits(self.bits() & other.bits())
    }

    /// Keeps only the concrete signs in `allowed` (a bit set as in `bits`).
    pub(crate) fn restrict(self, allowed: u8) -> Sign {
        Sign::from_bits(self.bits() & allowed)
    }

    fn lift(self, other: Sign, table: impl Fn(u8, u8) -> u8) -> Sign {
        let mut out = 0;
        for a in [1u8, 2, 4] {
            for b in [1u8, 2, 4] {
                if self.bits() & a != 0 && other.bits() & b != 0 {
                    out |= table(a, b);
                }
            }
        }
        Sign::from_bits(out)
    }

    pub fn plus(self, other: Sign) -> Sign {
        self.lift(other, |a, b| match (a, b) {
            (2, x) | (x, 2) => x,
            (1, 1) => 1,
            (4, 4) => 4,
            _ => 7,
        })
    }

    pub fn times(self, other: Sign) -> Sign {
        self.lift(other, |a, b| match (a, b) {
            (2, _) | (_, 2) => 2,
            (x, y) if x == y => 4,
            _ => 1,
        })
    }

    pub fn negate(self) -> Sign {
        Sign::from_bits(match self.bits() {
            1 => 4,
            4 => 1,
            b => b,
        })
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Bot => "⊥",
            Sign::Neg => "-",
            Sign::Zero => "0",
            Sign::Pos => "+",
            Sign::Top => "⊤",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.symbol())
    }
}
