//! Coefficient field abstraction.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive, Zero};

/// A coefficient field usable by the polynomial and recurrence machinery.
///
/// The exact path uses [`BigRational`]; `f64` is supported for fast
/// approximate evaluation of the same algebra.
pub trait Scalar:
    Num + Neg<Output = Self> + Clone + Debug + Display + Send + Sync + 'static
{
    /// Injects an exact rational literal into the field.
    fn from_rational(r: &BigRational) -> Self;

    fn to_f64(&self) -> f64;

    /// Total order used only to canonicalize containers; it carries no
    /// algebraic meaning.
    fn total_cmp(&self, other: &Self) -> Ordering;

    /// Whether the value is zero up to the field's rounding behavior.
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn from_i64(v: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(v)))
    }

    /// `self^e` by repeated squaring, with `x^0 = 1` for every `x` including zero.
    fn pow_u64(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

impl Scalar for BigRational {
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        // Numerator and denominator may individually overflow f64.
        match (self.numer().to_f64(), self.denom().to_f64()) {
            (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
            _ => {
                let shift = self.denom().bits().saturating_sub(900) as usize;
                let n = self.numer() >> shift;
                let d = self.denom() >> shift;
                n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
            }
        }
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
}

impl Scalar for f64 {
    fn from_rational(r: &BigRational) -> Self {
        Scalar::to_f64(r)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }

    fn is_negligible(&self) -> bool {
        self.abs() < 1e-9
    }
}

/// Parses `p`, `p/q`, `d.ddd` and `d.ddd/q` into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (num_part, den_part) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (body, None),
    };
    let (int_part, frac_part) = match num_part.split_once('.') {
        Some((i, f)) => (i, f),
        None => (num_part, ""),
    };
    if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let scale = num_traits::pow(BigInt::from(10), frac_part.len());
    let mut value = BigRational::new(numer, scale);
    if let Some(d) = den_part {
        if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let den: BigInt = d.parse().ok()?;
        if den.is_zero() {
            return None;
        }
        value /= BigRational::from_integer(den);
    }
    Some(if neg { -value } else { value })
}

/// Renders a rational as `p` or `p/q`.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub(crate) fn is_negative<C: Scalar>(c: &C) -> bool {
    c.total_cmp(&C::zero()) == Ordering::Less
}
