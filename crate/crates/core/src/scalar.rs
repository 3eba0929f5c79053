//! Numeric fields used by the analytic side of the crate.
//!
//! Every formula over degree profiles and intensity matrices is written once,
//! generically over [`Scalar`]. Block sets whose parameters are all rational
//! are analysed in [`BigRational`] so golden values compare exactly; anything
//! given as a binary float falls back to `f64`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// True for fields where `==` is exact equality of real numbers.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(v: i64) -> Self;
    fn from_number(n: &Number) -> Option<Self>;
    fn to_f64(&self) -> f64;

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    /// Equality up to `tol` in float mode, exact otherwise.
    fn close_to(&self, other: &Self, tol: f64) -> bool {
        if Self::EXACT {
            self == other
        } else {
            (self.to_f64() - other.to_f64()).abs() <= tol
        }
    }

    /// Exact textual form (`"31/3"`), `None` for inexact fields.
    fn exact_string(&self) -> Option<String>;
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_number(n: &Number) -> Option<Self> {
        match n {
            Number::Exact(q) => Some(q.clone()),
            Number::Approx(_) => None,
        }
    }
    fn to_f64(&self) -> f64 {
        // BigRational::to_f64 handles huge numerators/denominators correctly.
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn exact_string(&self) -> Option<String> {
        Some(rational_string(self))
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn from_number(n: &Number) -> Option<Self> {
        Some(n.to_f64())
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn exact_string(&self) -> Option<String> {
        None
    }
}

pub(crate) fn rational_string(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// A user-supplied parameter: exact rational when written as an integer or a
/// string (`"1/6"`, `"0.25"`), binary float when written as a JSON decimal.
#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    Exact(BigRational),
    Approx(f64),
}

impl Number {
    pub fn int(v: i64) -> Self {
        Number::Exact(BigRational::from_int(v))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Number::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Number::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(q) => Scalar::to_f64(q),
            Number::Approx(x) => *x,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Number::Exact(q) => q.is_positive(),
            Number::Approx(x) => *x > 0.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Number::Exact(q) => q.is_negative(),
            Number::Approx(x) => *x < 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Number::Exact(q) => Zero::is_zero(q),
            Number::Approx(x) => *x == 0.0,
        }
    }

    pub fn add(&self, other: &Number) -> Number {
        match (self, other) {
            (Number::Exact(a), Number::Exact(b)) => Number::Exact(a + b),
            _ => Number::Approx(self.to_f64() + other.to_f64()),
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Exact(q) => f.write_str(&rational_string(q)),
            Number::Approx(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("cannot parse '{0}' as a number (expected integer, decimal or a/b)")]
pub struct ParseNumberError(String);

impl FromStr for Number {
    type Err = ParseNumberError;

    /// Parses `"a/b"`, `"-3"` or `"0.125"` into an exact rational.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseNumberError(s.to_string());
        let t = s.trim();
        if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            return Ok(Number::Exact(BigRational::new(n, d)));
        }
        if let Some((ip, fp)) = t.split_once('.') {
            if fp.is_empty() || !fp.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            let neg = ip.starts_with('-');
            let ip = ip.trim_start_matches(['-', '+']);
            let digits = format!("{}{}", if ip.is_empty() { "0" } else { ip }, fp);
            let n: BigInt = digits.parse().map_err(|_| err())?;
            let d = num_traits::pow(BigInt::from(10), fp.len());
            let q = BigRational::new(if neg { -n } else { n }, d);
            return Ok(Number::Exact(q));
        }
        let n: BigInt = t.parse().map_err(|_| err())?;
        Ok(Number::Exact(BigRational::from_integer(n)))
    }
}

impl Serialize for Number {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Number::Exact(q) if q.denom().is_one() => match q.numer().to_i64() {
                Some(v) => s.serialize_i64(v),
                None => s.serialize_str(&rational_string(q)),
            },
            Number::Exact(q) => s.serialize_str(&rational_string(q)),
            Number::Approx(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Number {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct NumberVisitor;

        impl Visitor<'_> for NumberVisitor {
            type Value = Number;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or a string like \"1/6\"")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Number, E> {
                Ok(Number::int(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Number, E> {
                Ok(Number::Exact(BigRational::from_integer(BigInt::from(v))))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Number, E> {
                if v.is_finite() {
                    Ok(Number::Approx(v))
                } else {
                    Err(E::custom("non-finite number"))
                }
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Number, E> {
                v.parse().map_err(E::custom)
            }
        }

        d.deserialize_any(NumberVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        assert_eq!("1/6".parse::<Number>().unwrap(), Number::ratio(1, 6));
        assert_eq!("0.25".parse::<Number>().unwrap(), Number::ratio(1, 4));
        assert_eq!("-0.5".parse::<Number>().unwrap(), Number::ratio(-1, 2));
        assert_eq!(" 7 ".parse::<Number>().unwrap(), Number::int(7));
        assert!("1/0".parse::<Number>().is_err());
        assert!("abc".parse::<Number>().is_err());
        assert!("1.".parse::<Number>().is_err());
    }

    #[test]
    fn json_floats_stay_inexact() {
        let n: Number = serde_json::from_str("0.5").unwrap();
        assert_eq!(n, Number::Approx(0.5));
        let n: Number = serde_json::from_str("2").unwrap();
        assert_eq!(n, Number::int(2));
        let n: Number = serde_json::from_str("\"62/6\"").unwrap();
        assert_eq!(n, Number::ratio(31, 3));
        assert_eq!(serde_json::to_string(&n).unwrap(), "\"31/3\"");
    }

    #[test]
    fn exact_close_to_is_equality() {
        let a = BigRational::from_int(1) / BigRational::from_int(3);
        let b = BigRational::from_int(333_333) / BigRational::from_int(1_000_000);
        assert!(!a.close_to(&b, 1e-3));
        assert!(Scalar::to_f64(&a).close_to(&Scalar::to_f64(&b), 1e-3));
    }
}
