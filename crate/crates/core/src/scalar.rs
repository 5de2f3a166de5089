//! Scalar backends: exact rationals and `f64`.

use std::fmt::{Debug, Display};

use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

pub type Rational = BigRational;

/// Number type carried through the pipeline.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Signed + Send + Sync + Field + Lift<Self> + 'static
{
    /// True for the exact rational backend.
    const EXACT: bool;

    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    /// Square root when it is representable in this backend.
    fn sqrt_exact(&self) -> Option<Self>;
    /// Storage size in bits of numerator plus denominator (0 for floats).
    fn bit_size(&self) -> u64;
    fn determinant(m: &Matrix<Self>) -> Self;

    fn from_i64(v: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(v)))
    }

    /// Zero test: exact for rationals, relative to `scale` for floats.
    fn negligible(&self, scale: f64) -> bool;
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn sqrt_exact(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &(&n * &n) == self.numer() && &(&d * &d) == self.denom() {
            Some(Rational::new(n, d))
        } else {
            None
        }
    }

    fn bit_size(&self) -> u64 {
        self.numer().bits() + self.denom().bits()
    }

    fn determinant(m: &Matrix<Self>) -> Self {
        linalg::bareiss_det(m)
    }

    fn negligible(&self, _scale: f64) -> bool {
        self.is_zero()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        ratio_to_f64(r)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn sqrt_exact(&self) -> Option<Self> {
        (*self >= 0.0).then(|| self.sqrt())
    }

    fn bit_size(&self) -> u64 {
        0
    }

    fn determinant(m: &Matrix<Self>) -> Self {
        linalg::pivoted_det(m)
    }

    fn negligible(&self, scale: f64) -> bool {
        self.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE)
    }
}

/// Correctly rounded conversion.
pub fn ratio_to_f64(r: &Rational) -> f64 {
    if r.numer().bits() <= 53 && r.denom().bits() <= 53 {
        // both operands exact, so the quotient is rounded once
        if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
            return n / d;
        }
    }
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

/// Field in which polynomials and transforms are evaluated.
pub trait Field: Clone + Debug + Num + std::ops::Neg<Output = Self> + Send + Sync {
    /// Absolute value, approximately.
    fn magnitude(&self) -> f64;
    /// Real and imaginary parts, approximately.
    fn parts(&self) -> (f64, f64);
}

impl Field for Rational {
    fn magnitude(&self) -> f64 {
        ratio_to_f64(&self.abs())
    }

    fn parts(&self) -> (f64, f64) {
        (ratio_to_f64(self), 0.0)
    }
}

impl Field for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }

    fn parts(&self) -> (f64, f64) {
        (*self, 0.0)
    }
}

impl Field for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn parts(&self) -> (f64, f64) {
        (self.re, self.im)
    }
}

/// Embedding of the coefficient scalar into an evaluation field.
pub trait Lift<F> {
    fn lift(&self) -> F;
}

impl Lift<Rational> for Rational {
    fn lift(&self) -> Rational {
        self.clone()
    }
}

impl Lift<f64> for f64 {
    fn lift(&self) -> f64 {
        *self
    }
}

impl Lift<Complex64> for f64 {
    fn lift(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
}

/// Magnitude of an evaluation-field value, for residual reporting.
pub trait Magnitude {
    fn magnitude(&self) -> f64;
}

impl Magnitude for Rational {
    fn magnitude(&self) -> f64 {
        ratio_to_f64(&self.abs())
    }
}

impl Magnitude for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Magnitude for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

pub fn int<T: Scalar>(v: i64) -> T {
    T::from_i64(v)
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses "12", "-3.25", "1e-3", "2.5E+2" or "7/3" into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a decimal or p/q number: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(BigInt::parse_bytes(digits.as_bytes(), 10).ok_or_else(bad)?);
    let scale = exp - frac_part.len() as i64;
    if exp.abs() > 10_000 {
        return Err(bad());
    }
    let ten = Rational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if neg { -value } else { value })
}

/// Sign of a rational as -1, 0 or 1.
pub fn sign_of(r: &Rational) -> i32 {
    match r.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

/// Closest "simple" rational to `x` with a power-of-two denominator.
pub fn dyadic_near(x: f64) -> Rational {
    let d: i64 = 1 << 40;
    Rational::new(BigInt::from((x * d as f64).round() as i128), BigInt::from(d))
}

pub fn one<T: One>() -> T {
    T::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rational("1.5").unwrap(), ratio(3, 2));
        assert_eq!(parse_rational("-0.125").unwrap(), ratio(-1, 8));
        assert_eq!(parse_rational("2.5e2").unwrap(), ratio(250, 1));
        assert_eq!(parse_rational("1E-3").unwrap(), ratio(1, 1000));
        assert_eq!(parse_rational("7/3").unwrap(), ratio(7, 3));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn exact_square_roots() {
        assert_eq!(ratio(9, 4).sqrt_exact(), Some(ratio(3, 2)));
        assert_eq!(ratio(2, 1).sqrt_exact(), None);
    }

    #[test]
    fn huge_rationals_convert() {
        let big = Rational::new(BigInt::from(3) << 2000usize, BigInt::from(1) << 1999usize);
        assert!((ratio_to_f64(&big) - 6.0).abs() < 1e-12);
    }
}
