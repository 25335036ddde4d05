use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use crate::scalar::Real;

/// A real cost or `+∞`.
///
/// The derived ordering places every finite value below `PlusInfinity`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, serde::Serialize, serde::Deserialize)]
pub enum ExtendedValue<T> {
    Finite(T),
    PlusInfinity,
}

impl<T: Real> ExtendedValue<T> {
    pub const INFINITY: Self = ExtendedValue::PlusInfinity;

    pub fn zero() -> Self {
        ExtendedValue::Finite(T::zero())
    }

    /// `0` when `cond` holds, `+∞` otherwise.
    pub fn indicator(cond: bool) -> Self {
        if cond {
            Self::zero()
        } else {
            ExtendedValue::PlusInfinity
        }
    }

    /// Maps `+∞` floats to `PlusInfinity`. Returns `None` for NaN or `-∞`.
    pub fn from_float(x: T) -> Option<Self> {
        if x.is_nan() || x == T::neg_infinity() {
            None
        } else if x == T::infinity() {
            Some(ExtendedValue::PlusInfinity)
        } else {
            Some(ExtendedValue::Finite(x))
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedValue::Finite(_))
    }

    pub fn value(&self) -> Option<T> {
        match *self {
            ExtendedValue::Finite(v) => Some(v),
            ExtendedValue::PlusInfinity => None,
        }
    }

    /// The float image, with `PlusInfinity` mapped to `T::infinity()`.
    pub fn to_float(&self) -> T {
        self.value().unwrap_or_else(T::infinity)
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Adds a finite constant.
    pub fn shift(self, c: T) -> Self {
        match self {
            ExtendedValue::Finite(v) => ExtendedValue::Finite(v + c),
            ExtendedValue::PlusInfinity => ExtendedValue::PlusInfinity,
        }
    }

    pub fn map(self, f: impl FnOnce(T) -> T) -> Self {
        match self {
            ExtendedValue::Finite(v) => ExtendedValue::Finite(f(v)),
            ExtendedValue::PlusInfinity => ExtendedValue::PlusInfinity,
        }
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).unwrap_or(Ordering::Equal)
    }

    /// `|a - b|`, `0` when both are `+∞`, `+∞` when exactly one is.
    pub fn abs_diff(self, other: Self) -> T {
        match (self, other) {
            (ExtendedValue::Finite(a), ExtendedValue::Finite(b)) => (a - b).abs(),
            (ExtendedValue::PlusInfinity, ExtendedValue::PlusInfinity) => T::zero(),
            _ => T::infinity(),
        }
    }
}

impl<T: Real> Add for ExtendedValue<T> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtendedValue::Finite(a), ExtendedValue::Finite(b)) => ExtendedValue::Finite(a + b),
            _ => ExtendedValue::PlusInfinity,
        }
    }
}

impl<T: Real> Add<T> for ExtendedValue<T> {
    type Output = Self;

    fn add(self, rhs: T) -> Self {
        self.shift(rhs)
    }
}

impl<T: Real> From<T> for ExtendedValue<T> {
    fn from(v: T) -> Self {
        ExtendedValue::Finite(v)
    }
}

impl<T: Real> fmt::Display for ExtendedValue<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedValue::Finite(v) => write!(f, "{:.16e}", v),
            ExtendedValue::PlusInfinity => f.write_str("inf"),
        }
    }
}

impl<T: Real + FromStr> FromStr for ExtendedValue<T> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("+inf") {
            return Ok(ExtendedValue::PlusInfinity);
        }
        let v: T = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
        ExtendedValue::from_float(v).ok_or_else(|| format!("invalid extended value: {s:?}"))
    }
}

/// Minimum of an iterator of extended values, `+∞` when empty.
pub fn min_all<T: Real>(it: impl IntoIterator<Item = ExtendedValue<T>>) -> ExtendedValue<T> {
    it.into_iter().fold(ExtendedValue::PlusInfinity, ExtendedValue::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    type E = ExtendedValue<f64>;

    #[test]
    fn infinity_absorbs_and_is_min_identity() {
        let a = E::Finite(2.0);
        assert_eq!(a + E::PlusInfinity, E::PlusInfinity);
        assert_eq!(E::PlusInfinity + a, E::PlusInfinity);
        assert_eq!(a.min(E::PlusInfinity), a);
        assert_eq!(E::PlusInfinity.min(a), a);
        assert!(E::Finite(1e300) < E::PlusInfinity);
        assert!(E::Finite(-3.0) < E::Finite(-2.0));
    }

    #[test]
    fn indicator_and_parse_roundtrip() {
        assert_eq!(E::indicator(true), E::Finite(0.0));
        assert_eq!(E::indicator(false), E::PlusInfinity);
        for v in [E::Finite(0.1), E::Finite(-7.25e-9), E::PlusInfinity] {
            let back: E = v.to_string().parse().unwrap();
            assert_eq!(back, v);
        }
        assert!("nan".parse::<E>().is_err());
        assert_eq!(min_all::<f64>([]), E::PlusInfinity);
    }

    #[test]
    fn abs_diff_conventions() {
        assert_eq!(E::PlusInfinity.abs_diff(E::PlusInfinity), 0.0);
        assert_eq!(E::Finite(1.0).abs_diff(E::PlusInfinity), f64::INFINITY);
        assert_eq!(E::Finite(1.0).abs_diff(E::Finite(3.5)), 2.5);
    }
}
