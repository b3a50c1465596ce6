//! Tropical semiring weights.
//!
//! Weights are negative log-probabilities in natural-log units, stored at
//! 64-bit precision. `plus` is `min`, `times` is addition, zero is `+inf`
//! and one is `0.0`.

use std::fmt;
use std::ops::{Add, AddAssign};

/// A tropical-semiring weight.
///
/// `Weight` is a thin wrapper over `f64` so the semiring operations read as
/// algebra rather than float tricks. The additive identity (`zero`) is
/// `+inf` and annihilates under `times`; the multiplicative identity (`one`)
/// is `0.0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Weight(pub f64);

impl Weight {
    /// Additive identity: `+inf`, the weight of "no path".
    pub const ZERO: Weight = Weight(f64::INFINITY);
    /// Multiplicative identity: `0.0`, the weight of a free transition.
    pub const ONE: Weight = Weight(0.0);

    pub fn new(value: f64) -> Self {
        Weight(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Semiring plus: `min(a, b)`.
    pub fn plus(self, other: Weight) -> Weight {
        if self.0 <= other.0 {
            self
        } else {
            other
        }
    }

    /// Semiring times: `a + b`, with `zero` annihilating.
    pub fn times(self, other: Weight) -> Weight {
        if self.is_zero() || other.is_zero() {
            Weight::ZERO
        } else {
            Weight(self.0 + other.0)
        }
    }

    /// Inverse of `times`: `a - b`. Caller guarantees `b` is not zero.
    pub fn divide(self, other: Weight) -> Weight {
        if self.is_zero() {
            Weight::ZERO
        } else {
            Weight(self.0 - other.0)
        }
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::INFINITY
    }

    pub fn is_one(self) -> bool {
        self.0 == 0.0
    }

    /// True when two weights differ by at most `tol` (zero equals only zero).
    pub fn approx_eq(self, other: Weight, tol: f64) -> bool {
        if self.is_zero() || other.is_zero() {
            self.is_zero() && other.is_zero()
        } else {
            (self.0 - other.0).abs() <= tol
        }
    }
}

impl Default for Weight {
    fn default() -> Self {
        Weight::ONE
    }
}

impl Add for Weight {
    type Output = Weight;
    fn add(self, rhs: Weight) -> Weight {
        self.times(rhs)
    }
}

impl AddAssign for Weight {
    fn add_assign(&mut self, rhs: Weight) {
        *self = self.times(rhs);
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "inf")
        } else {
            // f64 Display prints the shortest decimal that round-trips.
            write!(f, "{}", self.0)
        }
    }
}

impl std::str::FromStr for Weight {
    type Err = std::num::ParseFloatError;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "inf" || s == "Infinity" {
            return Ok(Weight::ZERO);
        }
        s.parse::<f64>().map(Weight)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn plus_is_min() {
        assert_eq!(Weight(1.0).plus(Weight(2.0)), Weight(1.0));
        assert_eq!(Weight(0.0).plus(Weight(0.0)), Weight(0.0));
    }

    #[test]
    fn identities() {
        let x = Weight(5.0);
        assert_eq!(x.plus(Weight::ZERO), x);
        assert_eq!(x.times(Weight::ONE), x);
        assert_eq!(x.times(Weight::ZERO), Weight::ZERO);
        assert_eq!(Weight(1.0).times(Weight(2.0)), Weight(3.0));
    }

    #[test]
    fn display_round_trips() {
        for v in [0.1, 1.0 / 3.0, 2.302585092994046, 1e-17, 12345.6789] {
            let s = Weight(v).to_string();
            let back: Weight = s.parse().unwrap();
            assert_eq!(back.0, v, "weight {v} did not round-trip via `{s}`");
        }
        assert!(("inf".parse::<Weight>().unwrap()).is_zero());
    }

    fn arb_weight() -> impl Strategy<Value = Weight> {
        prop_oneof![
            9 => (0.0f64..50.0).prop_map(Weight),
            1 => Just(Weight::ZERO),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2500))]

        // Four cases per run keeps the 10^4-pair budget from the invariants.
        #[test]
        fn semiring_axioms(a in arb_weight(), b in arb_weight(), c in arb_weight(), d in arb_weight()) {
            // commutativity and associativity of plus (min: exact)
            prop_assert_eq!(a.plus(b), b.plus(a));
            prop_assert_eq!(a.plus(b).plus(c), a.plus(b.plus(c)));
            // associativity of times up to float rounding
            prop_assert!(a.times(b).times(c).approx_eq(a.times(b.times(c)), 1e-12));
            // distributivity: a + min(b,c) selects the same sum on both sides, exact
            prop_assert_eq!(a.times(b.plus(c)), a.times(b).plus(a.times(c)));
            prop_assert_eq!(b.plus(c).times(d), b.times(d).plus(c.times(d)));
            // identities and annihilation
            prop_assert_eq!(a.plus(Weight::ZERO), a);
            prop_assert_eq!(a.times(Weight::ONE), a);
            prop_assert_eq!(a.times(Weight::ZERO), Weight::ZERO);
            // idempotence of plus
            prop_assert_eq!(a.plus(a), a);
        }
    }
}
