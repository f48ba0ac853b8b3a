//! Exact rational numbers and their canonical `"a/b"` text form.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseRationalError {
    #[error("rational `{0}` must have the form \"numerator/denominator\"")]
    MissingSlash(String),
    #[error("rational `{0}` has a malformed integer part")]
    BadInteger(String),
    #[error("rational `{0}` has a zero denominator")]
    ZeroDenominator(String),
}

/// Builds `num/den` from machine integers. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

fn parse_int(part: &str, whole: &str) -> Result<BigInt, ParseRationalError> {
    let digits = part.strip_prefix('-').unwrap_or(part);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseRationalError::BadInteger(whole.to_string()));
    }
    part.parse::<BigInt>()
        .map_err(|_| ParseRationalError::BadInteger(whole.to_string()))
}

/// Parses the strict `"a/b"` form. Decimals and bare integers are rejected.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let trimmed = text.trim();
    let (num, den) = trimmed
        .split_once('/')
        .ok_or_else(|| ParseRationalError::MissingSlash(text.to_string()))?;
    let num = parse_int(num.trim(), text)?;
    let den = parse_int(den.trim(), text)?;
    if den.is_zero() {
        return Err(ParseRationalError::ZeroDenominator(text.to_string()));
    }
    Ok(Rational::new(num, den))
}

/// Canonical text form; the denominator is always written, so `2` becomes `"2/1"`.
pub fn format_rational(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Display adapter for `format_rational`.
pub struct Canonical<'a>(pub &'a Rational);

impl fmt::Display for Canonical<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

pub fn is_probability(value: &Rational) -> bool {
    !value.is_negative() && *value <= Rational::one()
}

/// Exact dot product of a sparse coefficient list against a dense vector.
pub fn sparse_dot(coeffs: &[(usize, Rational)], x: &[Rational]) -> Rational {
    coeffs
        .iter()
        .fold(Rational::zero(), |acc, (k, c)| acc + c * &x[*k])
}

/// `base^exp` without intermediate gcd reductions. Powers of coprime
/// numerator/denominator pairs stay coprime.
pub fn pow(base: &Rational, exp: u32) -> Rational {
    let num = num_traits::pow(base.numer().clone(), exp as usize);
    let den = num_traits::pow(base.denom().clone(), exp as usize);
    Rational::new_raw(num, den)
}
