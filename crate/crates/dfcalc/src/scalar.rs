//! The scalar backend abstraction: exact rationals and IEEE doubles.
//!
//! Operator values live in the backend type `S`; grid structure (bases,
//! anchors, offsets) is always exact [`BigRational`] regardless of backend,
//! so the two backends cannot disagree about domains.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Which backend a scalar type realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Exact,
    Float,
}

impl Backend {
    pub fn as_str(&self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Float => "float",
        }
    }
}

/// A numeric field the fractional operators can be evaluated over.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    const BACKEND: Backend;

    fn from_int(n: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Convert an exact grid quantity into this backend.
    fn from_exact(q: &BigRational) -> Self;
    /// Gamma poles: `true` iff the value is one of 0, -1, -2, ...
    fn is_nonpositive_integer(&self) -> bool;
    fn to_f64(&self) -> f64;
    /// Parse the CSV/CLI text form of a value.
    fn parse_text(text: &str) -> Result<Self>;
    /// Canonical text form: `p/q` in lowest terms (plain integer when q = 1)
    /// for the exact backend, shortest round-trip decimal for floats.
    fn render(&self) -> String;
    /// JSON form: string for exact values, number for floats.
    fn json_value(&self) -> serde_json::Value;
}

/// Parse `p/q`, a plain integer, or a terminating decimal (optionally with
/// an exponent) into an exact rational.
pub fn parse_big_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty numeric field".into()));
    }
    if let Some((n, d)) = s.split_once('/') {
        let numer = BigInt::from_str(n.trim())
            .map_err(|e| Error::Parse(format!("bad numerator {n:?}: {e}")))?;
        let denom = BigInt::from_str(d.trim())
            .map_err(|e| Error::Parse(format!("bad denominator {d:?}: {e}")))?;
        if denom.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(numer, denom));
    }
    // Decimal with optional exponent: m.f e k  ->  (mf as int) * 10^(k - |f|)
    let (mantissa, exp10) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = s[i + 1..]
                .parse()
                .map_err(|e| Error::Parse(format!("bad exponent in {s:?}: {e}")))?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let digits: String = format!("{int_part}{frac_part}");
    let digits = if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(Error::Parse(format!("no digits in {s:?}")));
    } else {
        digits
    };
    let numer = BigInt::from_str(&digits)
        .map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")))?;
    let scale = exp10 - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let pow = num::pow::pow(ten, scale.unsigned_abs() as usize);
    Ok(if scale >= 0 {
        BigRational::from_integer(numer * pow)
    } else {
        BigRational::new(numer, pow)
    })
}

/// Robust `BigRational` to `f64`: correct even when numerator/denominator
/// individually overflow the double range.
pub fn big_rational_to_f64(q: &BigRational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let negative = q.is_negative();
    let n = q.numer().magnitude();
    let d = q.denom().magnitude();
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    // Scale so the integer quotient carries ~64 significant bits.
    let shift = 64 - (nb - db);
    let quotient = if shift >= 0 {
        (n << shift as u64) / d
    } else {
        n / (d << (-shift) as u64)
    };
    let mag = quotient.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(-shift as i32);
    if negative {
        -mag
    } else {
        mag
    }
}

impl Scalar for BigRational {
    const BACKEND: Backend = Backend::Exact;

    fn from_int(n: i64) -> Self {
        BigRational::from_integer(n.into())
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(num.into(), den.into())
    }

    fn from_exact(q: &BigRational) -> Self {
        q.clone()
    }

    fn is_nonpositive_integer(&self) -> bool {
        self.is_integer() && !self.is_positive()
    }

    fn to_f64(&self) -> f64 {
        big_rational_to_f64(self)
    }

    fn parse_text(text: &str) -> Result<Self> {
        parse_big_rational(text)
    }

    fn render(&self) -> String {
        if self.denom().is_one() {
            format!("{}", self.numer())
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn json_value(&self) -> serde_json::Value {
        serde_json::Value::String(self.render())
    }
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_exact(q: &BigRational) -> Self {
        big_rational_to_f64(q)
    }

    fn is_nonpositive_integer(&self) -> bool {
        *self <= 0.0 && self.fract() == 0.0
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn parse_text(text: &str) -> Result<Self> {
        let s = text.trim();
        if let Ok(v) = s.parse::<f64>() {
            if v.is_finite() {
                return Ok(v);
            }
        }
        // Fall back to the rational grammar so `1/3` works here too.
        Ok(big_rational_to_f64(&parse_big_rational(s)?))
    }

    fn render(&self) -> String {
        format!("{self}")
    }

    fn json_value(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }
}
