//! Exact rational numbers and their extension with infinities.
//!
//! All probabilities and interval endpoints in this crate are exact
//! `BigInt` rationals; nothing is ever rounded. `ExtRational` adds the
//! two infinities needed for unbounded interval endpoints (e.g. the
//! encodings of the negative and positive integers).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::ParseNumberError;

/// Exact rational number, always in lowest terms with a positive denominator.
pub type Rational = num_rational::BigRational;

/// Shorthand for a rational from two machine integers.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parse an exact rational from `3`, `-7/10`, or a finite decimal like `2.5`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseNumberError> {
    let s = s.trim();
    let bad = || ParseNumberError::new(s);
    if let Some((num, den)) = s.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.trim_start().starts_with('-');
        let int_part = BigInt::from_str(if int_part.is_empty() { "0" } else { int_part })
            .map_err(|_| bad())?;
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let frac = BigInt::from_str(frac_part).map_err(|_| bad())?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let whole = int_part * &scale;
        let combined = if negative { whole - frac } else { whole + frac };
        return Ok(Rational::new(combined, scale));
    }
    let int = BigInt::from_str(s).map_err(|_| bad())?;
    Ok(Rational::from_integer(int))
}

/// Nearest f64, for display and plotting only.
pub fn to_f64(r: &Rational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

/// Format a rational canonically: `3` for integers, `-7/10` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Render a literal the mini-language parser can read back: a finite
/// decimal when one exists, `num/den` otherwise.
pub fn format_literal(r: &Rational) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    // A rational has a finite decimal expansion iff its reduced
    // denominator is of the form 2^a * 5^b.
    let mut den = r.denom().clone();
    let mut twos = 0u32;
    let mut fives = 0u32;
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let digits = twos.max(fives);
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = r.numer() * &scale / r.denom();
    let negative = scaled.is_negative();
    let digits_str = scaled.magnitude().to_string();
    let digits_str = format!("{:0>width$}", digits_str, width = digits as usize + 1);
    let split = digits_str.len() - digits as usize;
    let (int_part, frac_part) = digits_str.split_at(split);
    format!("{}{int_part}.{frac_part}", if negative { "-" } else { "" })
}

/// A rational extended with `-inf` and `+inf`, totally ordered.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtRational {
    NegInf,
    Finite(Rational),
    PosInf,
}

pub use ExtRational::{Finite, NegInf, PosInf};

impl ExtRational {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Finite(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Finite(_))
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Finite(r) => r.is_integer(),
            _ => true,
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Parse `-inf`, `inf`, `+inf`, or anything `parse_rational` accepts.
    pub fn parse(s: &str) -> Result<Self, ParseNumberError> {
        match s.trim() {
            "-inf" => Ok(NegInf),
            "inf" | "+inf" => Ok(PosInf),
            other => Ok(Finite(parse_rational(other)?)),
        }
    }
}

impl From<Rational> for ExtRational {
    fn from(r: Rational) -> Self {
        Finite(r)
    }
}

impl From<i64> for ExtRational {
    fn from(n: i64) -> Self {
        Finite(Rational::from_integer(BigInt::from(n)))
    }
}

impl PartialOrd for ExtRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (PosInf, _) | (_, NegInf) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl Add for ExtRational {
    type Output = ExtRational;

    /// Endpoint addition. Opposite infinities never meet here: interval
    /// endpoints satisfy `lo < +inf` and `hi > -inf`, and sums pair lo
    /// with lo and hi with hi.
    fn add(self, rhs: ExtRational) -> ExtRational {
        match (self, rhs) {
            (NegInf, PosInf) | (PosInf, NegInf) => {
                panic!("adding opposite infinities")
            }
            (NegInf, _) | (_, NegInf) => NegInf,
            (PosInf, _) | (_, PosInf) => PosInf,
            (Finite(a), Finite(b)) => Finite(a + b),
        }
    }
}

impl Sub for ExtRational {
    type Output = ExtRational;

    fn sub(self, rhs: ExtRational) -> ExtRational {
        self + (-rhs)
    }
}

impl Neg for ExtRational {
    type Output = ExtRational;

    fn neg(self) -> ExtRational {
        match self {
            NegInf => PosInf,
            PosInf => NegInf,
            Finite(r) => Finite(-r),
        }
    }
}

impl Mul for ExtRational {
    type Output = ExtRational;

    /// Endpoint multiplication with the bound-arithmetic convention
    /// `0 * inf = 0`: the underlying sets contain only finite reals, so
    /// `sup {x*y : x in [0,0], y unbounded} = 0`.
    fn mul(self, rhs: ExtRational) -> ExtRational {
        let sign = |e: &ExtRational| match e {
            NegInf => -1,
            PosInf => 1,
            Finite(r) => {
                if r.is_zero() {
                    0
                } else if r.is_positive() {
                    1
                } else {
                    -1
                }
            }
        };
        match (&self, &rhs) {
            (Finite(a), Finite(b)) => Finite(a * b),
            _ => match sign(&self) * sign(&rhs) {
                0 => Finite(Rational::zero()),
                s if s > 0 => PosInf,
                _ => NegInf,
            },
        }
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NegInf => write!(f, "-inf"),
            PosInf => write!(f, "inf"),
            Finite(r) => write!(f, "{}", format_rational(r)),
        }
    }
}
