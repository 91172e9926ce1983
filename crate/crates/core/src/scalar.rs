//! Scalar fields: exact rationals and binary64 floats.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, RankInfo};

/// Arbitrary precision rational, always stored in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Field tag carried by tensors and files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Rational,
    Float64,
}

impl Field {
    pub fn is_exact(self) -> bool {
        matches!(self, Field::Rational)
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::Rational => "rational",
            Field::Float64 => "float64",
        }
    }
}

impl std::str::FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rational" | "exact" => Ok(Field::Rational),
            "float64" | "float" | "f64" => Ok(Field::Float64),
            other => Err(Error::InvalidArgument(format!("unknown field `{other}`"))),
        }
    }
}

/// The arithmetic a tensor entry type must provide.
///
/// Linear algebra that depends on the field (rank, determinant) dispatches
/// through this trait so that exact and floating code paths share the tensor
/// operations.
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const FIELD: Field;

    fn from_i64(v: i64) -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn to_f64(&self) -> f64;

    /// Rank of a row-major `rows x cols` matrix together with a set of pivot
    /// rows and columns whose square submatrix is nonsingular.
    ///
    /// `tol` is the relative singular-value threshold for floats and is
    /// ignored for exact fields.
    fn rank_info(rows: usize, cols: usize, data: &[Self], tol: Option<f64>) -> RankInfo;

    fn determinant(n: usize, data: &[Self]) -> Self;

    /// Nonzero test used by certification; exact for rationals, thresholded for floats.
    fn is_negligible(&self, threshold: f64) -> bool;

    /// JSON form: `"num/den"` strings for rationals, numbers for floats.
    fn to_json(&self) -> serde_json::Value;

    fn from_json(v: &serde_json::Value) -> Result<Self>;
}

impl Scalar for Rational {
    const FIELD: Field = Field::Rational;

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn rank_info(rows: usize, cols: usize, data: &[Self], _tol: Option<f64>) -> RankInfo {
        linalg::rational_rank_info(rows, cols, data)
    }

    fn determinant(n: usize, data: &[Self]) -> Self {
        linalg::rational_det(n, data)
    }

    fn is_negligible(&self, _threshold: f64) -> bool {
        self.is_zero()
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(format_rational(self))
    }

    fn from_json(v: &serde_json::Value) -> Result<Self> {
        match v {
            serde_json::Value::String(s) => parse_rational(s),
            serde_json::Value::Number(n) if n.is_i64() => Ok(rat(n.as_i64().expect("checked"))),
            serde_json::Value::Number(n) if n.is_u64() => {
                Ok(Rational::from_integer(BigInt::from(n.as_u64().expect("checked"))))
            }
            other => Err(Error::Data(format!("expected a rational string or integer, got {other}"))),
        }
    }
}

impl Scalar for f64 {
    const FIELD: Field = Field::Float64;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn rank_info(rows: usize, cols: usize, data: &[Self], tol: Option<f64>) -> RankInfo {
        linalg::float_rank_info(rows, cols, data, tol.unwrap_or(linalg::DEFAULT_FLOAT_TOL))
    }

    fn determinant(n: usize, data: &[Self]) -> Self {
        linalg::float_det(n, data)
    }

    fn is_negligible(&self, threshold: f64) -> bool {
        self.abs() <= threshold
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self).map_or(serde_json::Value::Null, serde_json::Value::Number)
    }

    fn from_json(v: &serde_json::Value) -> Result<Self> {
        match v {
            serde_json::Value::Number(n) => n.as_f64().ok_or_else(|| Error::Data(format!("bad number {n}"))),
            serde_json::Value::String(s) => match s.trim().parse::<f64>() {
                Ok(x) => Ok(x),
                Err(_) => parse_rational(s).map(|q| rational_to_f64(&q)),
            },
            other => Err(Error::Data(format!("expected a number, got {other}"))),
        }
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Very large numerators/denominators: shift both down before dividing.
            let bits = q.numer().bits().max(q.denom().bits());
            let shift = bits.saturating_sub(1000);
            let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// Render a rational as `num/den`, omitting the denominator when it is 1.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Data(format!("malformed rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Data(format!("zero denominator in `{s}`")));
            }
            Ok(Rational::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Rational::from_integer(n))
        }
    }
}

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_are_canonical() {
        let q = ratio(6, -4);
        assert_eq!(q.numer(), &BigInt::from(-3));
        assert_eq!(q.denom(), &BigInt::from(2));
        assert_eq!(format_rational(&q), "-3/2");
        assert_eq!(format_rational(&rat(7)), "7");
    }

    #[test]
    fn parse_round_trips() {
        for s in ["0", "-12", "3/7", "-5/9"] {
            assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
        }
        assert_eq!(parse_rational("4/8").unwrap(), ratio(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn huge_rationals_convert_to_float() {
        let big = BigInt::from(10).pow(400);
        let q = Rational::new(big.clone() * 3, big);
        assert!((rational_to_f64(&q) - 3.0).abs() < 1e-12);
    }
}
