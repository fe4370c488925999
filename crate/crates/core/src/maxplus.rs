//! Max-plus arithmetic on ℝ ∪ {−∞}.
//!
//! Addition is `max` with identity `−∞` (the *bottom*), multiplication is
//! ordinary `+` with identity `0`. Bottom is absorbing for multiplication.
//! `+∞` and NaN are not elements of the semiring and are rejected by every
//! constructor, so `−∞ + ∞` can never arise.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// An element of the max-plus semiring.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MaxPlus(f64);

impl MaxPlus {
    /// The additive identity `−∞`.
    pub const BOTTOM: MaxPlus = MaxPlus(f64::NEG_INFINITY);
    /// The multiplicative identity `0`.
    pub const ONE: MaxPlus = MaxPlus(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value == f64::INFINITY {
            return Err(Error::InvalidScalar(value));
        }
        Ok(MaxPlus(value))
    }

    /// Finite values only; bottom is rejected.
    pub fn finite(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidScalar(value));
        }
        Ok(MaxPlus(value))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_bottom(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    #[inline]
    pub fn oplus(self, rhs: MaxPlus) -> MaxPlus {
        oplus(self, rhs)
    }

    #[inline]
    pub fn odot(self, rhs: MaxPlus) -> MaxPlus {
        odot(self, rhs)
    }

    /// Max-plus sum of an iterator; bottom for an empty one.
    pub fn sum<I: IntoIterator<Item = MaxPlus>>(iter: I) -> MaxPlus {
        iter.into_iter().fold(MaxPlus::BOTTOM, oplus)
    }
}

impl Eq for MaxPlus {}

impl PartialOrd for MaxPlus {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MaxPlus {
    fn cmp(&self, other: &Self) -> Ordering {
        // NaN is excluded at construction.
        self.0.partial_cmp(&other.0).unwrap_or(Ordering::Equal)
    }
}

impl fmt::Display for MaxPlus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_bottom() {
            f.write_str("-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl TryFrom<f64> for MaxPlus {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        MaxPlus::new(value)
    }
}

/// `a ⊕ b = max(a, b)`.
#[inline]
pub fn oplus(a: MaxPlus, b: MaxPlus) -> MaxPlus {
    if a.0 >= b.0 {
        a
    } else {
        b
    }
}

/// `a ⊙ b = a + b`; bottom absorbs.
#[inline]
pub fn odot(a: MaxPlus, b: MaxPlus) -> MaxPlus {
    // -inf + finite = -inf in IEEE arithmetic, and +inf never occurs.
    MaxPlus(a.0 + b.0)
}

/// Coefficient pair of the log-interpolation used by both measure homotopies.
///
/// `start = ln(1−t) − (ln t ⊕ ln(1−t))` weights the measure the homotopy
/// starts from, `end = ln t − (ln t ⊕ ln(1−t))` the one it ends at. In
/// simplified form `start = min(0, ln((1−t)/t))` and `end = min(0, ln(t/(1−t)))`,
/// so exactly one of them is `0` (both at `t = 1/2`) and `start ⊕ end = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LnCoeffs {
    pub start: MaxPlus,
    pub end: MaxPlus,
}

pub fn ln_coeffs(t: f64) -> Result<LnCoeffs> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::ParameterOutOfRange(t));
    }
    let start = if t <= 0.5 {
        MaxPlus::ONE
    } else {
        MaxPlus(((1.0 - t) / t).ln())
    };
    let end = if t >= 0.5 {
        MaxPlus::ONE
    } else {
        MaxPlus((t / (1.0 - t)).ln())
    };
    Ok(LnCoeffs { start, end })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mp(v: f64) -> MaxPlus {
        MaxPlus::new(v).unwrap()
    }

    #[test]
    fn oplus_examples() {
        assert_eq!(oplus(mp(2.0), mp(3.0)), mp(3.0));
        assert_eq!(oplus(MaxPlus::BOTTOM, mp(5.0)), mp(5.0));
        assert_eq!(oplus(mp(-1.5), mp(-1.5)), mp(-1.5));
    }

    #[test]
    fn odot_examples() {
        assert_eq!(odot(mp(2.0), mp(3.0)), mp(5.0));
        assert!(odot(MaxPlus::BOTTOM, mp(5.0)).is_bottom());
        assert_eq!(odot(mp(0.0), mp(-1.5)), mp(-1.5));
    }

    #[test]
    fn rejects_positive_infinity_and_nan() {
        assert!(MaxPlus::new(f64::INFINITY).is_err());
        assert!(MaxPlus::new(f64::NAN).is_err());
        assert!(MaxPlus::new(f64::NEG_INFINITY).unwrap().is_bottom());
        assert!(MaxPlus::finite(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn ln_coeffs_examples() {
        let half = ln_coeffs(0.5).unwrap();
        assert_eq!((half.start, half.end), (MaxPlus::ONE, MaxPlus::ONE));

        let zero = ln_coeffs(0.0).unwrap();
        assert_eq!(zero.start, MaxPlus::ONE);
        assert!(zero.end.is_bottom());

        let one = ln_coeffs(1.0).unwrap();
        assert!(one.start.is_bottom());
        assert_eq!(one.end, MaxPlus::ONE);

        let q = ln_coeffs(0.75).unwrap();
        assert!((q.start.value() + 3f64.ln()).abs() < 1e-15);
        assert!((q.start.value() - (-1.098612)).abs() < 1e-6);
        assert_eq!(q.end, MaxPlus::ONE);
    }

    #[test]
    fn ln_coeffs_rejects_outside_unit_interval() {
        for t in [-0.1, 1.000001, f64::NAN, f64::INFINITY] {
            assert!(ln_coeffs(t).is_err(), "t = {t}");
        }
    }

    /// The clipped form agrees with the literal max-of-logs expression on (0, 1).
    #[test]
    fn ln_coeffs_matches_literal_form() {
        for k in 1..1000 {
            let t = k as f64 / 1000.0;
            let (lt, l1t) = (t.ln(), (1.0 - t).ln());
            let norm = lt.max(l1t);
            let c = ln_coeffs(t).unwrap();
            assert!((c.start.value() - (l1t - norm)).abs() < 1e-12, "t = {t}");
            assert!((c.end.value() - (lt - norm)).abs() < 1e-12, "t = {t}");
        }
    }

    proptest! {
        #[test]
        fn coefficients_normalize(t in 0.0f64..=1.0) {
            let c = ln_coeffs(t).unwrap();
            prop_assert_eq!(c.start.oplus(c.end), MaxPlus::ONE);
            prop_assert!(c.start.value() <= 0.0 && c.end.value() <= 0.0);
        }

        // Dyadic t keeps 1 − (1 − t) = t exact.
        #[test]
        fn coefficients_are_symmetric(k in 0u32..=(1 << 20)) {
            let t = k as f64 / (1u32 << 20) as f64;
            prop_assert_eq!(ln_coeffs(t).unwrap().start, ln_coeffs(1.0 - t).unwrap().end);
        }
    }
}
