//! Number types shared by the exact and floating-point paths.
//!
//! Most of the pipeline runs in `f64`. The parts that are exact algebraic
//! statements (quartic coefficients, dual ordinates, convolution masses,
//! the regression identities) are generic over [`Scalar`] so they can also
//! run on [`Rational`] when every input is rational.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + Send + Sync + 'static
{
    /// `true` when arithmetic is exact and tolerances collapse to equality.
    const EXACT: bool;

    fn to_f64(&self) -> f64;

    /// Exact rational value, `None` for non-finite floats.
    fn to_rational(&self) -> Option<Rational>;

    /// `tol` expressed in this type; zero for exact types.
    fn tolerance(tol: f64) -> Self {
        if Self::EXACT {
            Self::zero()
        } else {
            Self::from_f64(tol).unwrap_or_else(Self::zero)
        }
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize is representable")
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_rational(&self) -> Option<Rational> {
        Rational::from_float(*self)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
}

/// Integer power by repeated squaring.
pub fn powi<T: Scalar>(base: &T, exp: usize) -> T {
    let mut acc = T::one();
    let mut b = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b.clone();
        }
        e >>= 1;
        if e > 0 {
            b = b.clone() * b;
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseNumberError {
    #[error("empty number")]
    Empty,
    #[error("malformed number `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Parses `p/q`, integers, decimals and scientific notation into an exact
/// rational. `0.1` becomes `1/10`, not its binary approximation.
pub fn parse_rational(text: &str) -> Result<Rational, ParseNumberError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseNumberError::Empty);
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = parse_decimal(num.trim()).ok_or_else(|| ParseNumberError::Malformed(s.into()))?;
        let d = parse_decimal(den.trim()).ok_or_else(|| ParseNumberError::Malformed(s.into()))?;
        if d.is_zero() {
            return Err(ParseNumberError::ZeroDenominator(s.into()));
        }
        return Ok(n / d);
    }
    parse_decimal(s).ok_or_else(|| ParseNumberError::Malformed(s.into()))
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(idx) => (&s[..idx], s[idx + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(all_digits.parse::<BigInt>().ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Some(if negative { -value } else { value })
}

/// Canonical text form: `p` for integers, `p/q` otherwise.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Recovers a small-denominator rational close to `x` by continued
/// fractions. Only a candidate: callers certify it exactly.
pub fn rational_candidate(x: f64, max_denominator: i64, rel_tol: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let target = rel_tol * x.abs().max(1.0);
    let (mut h_prev, mut h) = (1i128, x.floor() as i128);
    let (mut k_prev, mut k) = (0i128, 1i128);
    let mut frac = x - x.floor();
    for _ in 0..64 {
        if ((h as f64) / (k as f64) - x).abs() <= target {
            return Some(Rational::new(BigInt::from(h), BigInt::from(k)));
        }
        if frac.abs() < 1e-300 {
            break;
        }
        let inv = 1.0 / frac;
        let a = inv.floor();
        frac = inv - a;
        let a = a as i128;
        let h_next = a.checked_mul(h)?.checked_add(h_prev)?;
        let k_next = a.checked_mul(k)?.checked_add(k_prev)?;
        if k_next > max_denominator as i128 {
            break;
        }
        (h_prev, h, k_prev, k) = (h, h_next, k, k_next);
    }
    None
}

/// Nearest integer to `x` when within `tol`, for exact or float scalars.
pub fn near_integer<T: Scalar>(x: &T, tol: f64) -> Option<i64> {
    let rounded = x.to_f64().round();
    if !rounded.is_finite() || rounded.abs() > 1e15 {
        return None;
    }
    let n = rounded as i64;
    let diff = x.clone() - T::from_i64(n)?;
    if diff.abs() <= T::tolerance(tol) {
        Some(n)
    } else {
        None
    }
}
