//! Scalar arithmetic in two modes: exact rationals and binary floating point.
//!
//! Every formula in this crate is written once against the [`Field`] trait and
//! instantiated either with [`BigRational`] (exact) or `f64` (float). The
//! tagged [`Scalar`] value is the boundary type used in reports; it refuses to
//! combine operands of different modes.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

/// Ordered field operations shared by both scalar modes.
pub trait Field:
    Clone + fmt::Debug + fmt::Display + PartialEq + PartialOrd + Signed + Send + Sync + 'static
{
    const MODE: Mode;

    fn from_rational(r: &BigRational) -> Self;

    /// Exact rational value; `None` only for non-finite floats.
    fn to_rational(&self) -> Option<BigRational>;

    fn to_f64(&self) -> f64;

    fn from_i64(v: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(v)))
    }

    fn to_scalar(&self) -> Scalar;

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Field for BigRational {
    const MODE: Mode = Mode::Exact;

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_scalar(&self) -> Scalar {
        Scalar::Exact(self.clone())
    }
}

impl Field for f64 {
    const MODE: Mode = Mode::Float;

    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> Option<BigRational> {
        BigRational::from_float(*self)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_scalar(&self) -> Scalar {
        Scalar::Float(*self)
    }
}

/// A mode-tagged scalar value.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(BigRational),
    Float(f64),
}

impl Scalar {
    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Float(_) => Mode::Float,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => Field::to_f64(r),
            Scalar::Float(v) => *v,
        }
    }

    fn pair<'a>(&'a self, other: &'a Scalar) -> Result<Pair<'a>> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Pair::Exact(a, b)),
            (Scalar::Float(a), Scalar::Float(b)) => Ok(Pair::Float(*a, *b)),
            _ => Err(Error::ModeMismatch {
                left: self.mode(),
                right: other.mode(),
            }),
        }
    }

    pub fn try_add(&self, other: &Scalar) -> Result<Scalar> {
        Ok(match self.pair(other)? {
            Pair::Exact(a, b) => Scalar::Exact(a + b),
            Pair::Float(a, b) => Scalar::Float(a + b),
        })
    }

    pub fn try_sub(&self, other: &Scalar) -> Result<Scalar> {
        Ok(match self.pair(other)? {
            Pair::Exact(a, b) => Scalar::Exact(a - b),
            Pair::Float(a, b) => Scalar::Float(a - b),
        })
    }

    pub fn try_mul(&self, other: &Scalar) -> Result<Scalar> {
        Ok(match self.pair(other)? {
            Pair::Exact(a, b) => Scalar::Exact(a * b),
            Pair::Float(a, b) => Scalar::Float(a * b),
        })
    }

    pub fn try_div(&self, other: &Scalar) -> Result<Scalar> {
        let pair = self.pair(other)?;
        if other.is_zero_value() {
            return Err(Error::DivisionByZero);
        }
        match pair {
            Pair::Exact(a, b) => Ok(Scalar::Exact(a / b)),
            Pair::Float(a, b) => Ok(Scalar::Float(a / b)),
        }
    }

    pub fn is_zero_value(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(v) => *v == 0.0,
        }
    }
}

enum Pair<'a> {
    Exact(&'a BigRational, &'a BigRational),
    Float(f64, f64),
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => f.write_str(&format_rational(r)),
            Scalar::Float(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<Se: Serializer>(&self, s: Se) -> std::result::Result<Se::Ok, Se::Error> {
        match self {
            Scalar::Exact(r) => s.serialize_str(&format_rational(r)),
            Scalar::Float(v) if v.is_finite() => s.serialize_f64(*v),
            Scalar::Float(v) => s.serialize_str(&v.to_string()),
        }
    }
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"p"`, `"p/q"` or a finite decimal such as `"-1.25"` or `"1e-9"` exactly.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::ParseRational(text.to_string());
    let t = text.trim();
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str(&all_digits).map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if neg { -value } else { value })
}

/// Rational parameter with the canonical JSON encoding (string `"p/q"` or integer).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(pub BigRational);

impl Rational {
    pub fn new(p: i64, q: i64) -> Self {
        Rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn integer(p: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(p)))
    }

    pub fn get<S: Field>(&self) -> S {
        S::from_rational(&self.0)
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

impl FromStr for Rational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_rational(s).map(Rational)
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::integer(v)
    }
}

impl Serialize for Rational {
    fn serialize<Se: Serializer>(&self, s: Se) -> std::result::Result<Se::Ok, Se::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct RationalVisitor;

        impl<'de> Visitor<'de> for RationalVisitor {
            type Value = Rational;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational as \"p/q\", a decimal string, or a number")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Rational, E> {
                parse_rational(v).map(Rational).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Rational, E> {
                Ok(Rational::integer(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Rational, E> {
                Ok(Rational(BigRational::from_integer(BigInt::from(v))))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Rational, E> {
                // Route through the shortest decimal form so 0.1 means 1/10.
                parse_rational(&format!("{v:e}"))
                    .map(Rational)
                    .map_err(E::custom)
            }
        }

        d.deserialize_any(RationalVisitor)
    }
}

/// `x^e` for a nonnegative integer exponent.
pub fn powu<S: Field>(x: &S, e: usize) -> S {
    num_traits::pow(x.clone(), e)
}

/// `x^e` for a signed exponent; `x` must be nonzero when `e < 0`.
pub fn powi<S: Field>(x: &S, e: i64) -> S {
    if e >= 0 {
        powu(x, e as usize)
    } else {
        S::one() / powu(x, e.unsigned_abs() as usize)
    }
}
