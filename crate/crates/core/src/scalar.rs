//! Scalar abstraction shared by every module.
//!
//! [`Scalar`] is the ordered-field interface used by the exact parts of the
//! library (conditional expectations, piecewise-linear conjugation, prefix sums,
//! projections). It is implemented for `f32`, `f64` and the exact rationals
//! `Ratio<i64>` / `BigRational`. [`Real`] adds the transcendental operations
//! needed for `L_p` norms and signed powers and is only implemented for floats.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// An ordered field with a notion of "equal up to round-off".
pub trait Scalar:
    Clone + PartialOrd + Debug + Display + Num + Signed + Send + Sync + 'static
{
    /// Absolute tolerance for equality comparisons. Zero for exact types.
    fn tolerance() -> Self;

    /// A tighter tolerance used for structural checks (orthonormality, sphere membership).
    fn strict_tolerance() -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Best-effort conversion from a double. Exact types convert dyadics exactly.
    fn from_f64(x: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    /// Parses a decimal (`-1.25`) or rational (`3/4`) literal.
    fn parse_literal(text: &str) -> Option<Self>;

    fn is_finite_value(&self) -> bool {
        true
    }

    fn from_usize(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).abs() <= Self::tolerance()
    }

    /// `self <= other` up to [`Scalar::tolerance`].
    fn approx_le(&self, other: &Self) -> bool {
        self.clone() <= other.clone() + Self::tolerance()
    }

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

    /// `(self - other) ∨ 0`.
    fn dot_minus(self, other: Self) -> Self {
        (self - other).max_of(Self::zero())
    }

    fn positive_part(self) -> Self {
        self.max_of(Self::zero())
    }

    fn negative_part(self) -> Self {
        (-self).max_of(Self::zero())
    }

    /// Total order used for sorting; incomparable values (NaN) compare equal.
    fn total_cmp_value(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).unwrap_or(Ordering::Equal)
    }
}

/// Floating-point scalars: adds powers, roots and trigonometry.
pub trait Real: Scalar + Float + FloatConst + FromPrimitive + ToPrimitive {}

impl<T> Real for T where T: Scalar + Float + FloatConst + FromPrimitive + ToPrimitive {}

macro_rules! float_scalar {
    ($t:ty, $tol:expr, $strict:expr) => {
        impl Scalar for $t {
            fn tolerance() -> Self {
                $tol
            }
            fn strict_tolerance() -> Self {
                $strict
            }
            fn from_ratio(num: i64, den: i64) -> Self {
                num as $t / den as $t
            }
            fn from_f64(x: f64) -> Option<Self> {
                Some(x as $t)
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn parse_literal(text: &str) -> Option<Self> {
                match text.split_once('/') {
                    Some((n, d)) => {
                        let n: $t = n.trim().parse().ok()?;
                        let d: $t = d.trim().parse().ok()?;
                        (d != 0.0).then(|| n / d)
                    }
                    None => text.trim().parse().ok(),
                }
            }
            fn is_finite_value(&self) -> bool {
                self.is_finite()
            }
            fn total_cmp_value(&self, other: &Self) -> Ordering {
                self.total_cmp(other)
            }
        }
    };
}

float_scalar!(f64, 1e-9, 1e-12);
float_scalar!(f32, 1e-4, 1e-5);

fn parse_decimal_parts(text: &str) -> Option<(BigInt, BigInt)> {
    let text = text.trim();
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if frac_part.contains(['-', '+']) || frac_part.chars().any(|c| !c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || digits == "-" || digits == "+" {
        return None;
    }
    let numer = BigInt::from_str(&digits).ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    Some((numer, denom))
}

fn parse_big_rational(text: &str) -> Option<BigRational> {
    match text.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).ok()?;
            let d = BigInt::from_str(d.trim()).ok()?;
            (!d.is_zero()).then(|| BigRational::new(n, d))
        }
        None => {
            let (n, d) = parse_decimal_parts(text)?;
            Some(BigRational::new(n, d))
        }
    }
}

impl Scalar for BigRational {
    fn tolerance() -> Self {
        Self::zero()
    }
    fn strict_tolerance() -> Self {
        Self::zero()
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(num.into(), den.into())
    }
    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn parse_literal(text: &str) -> Option<Self> {
        parse_big_rational(text)
    }
}

impl Scalar for Ratio<i64> {
    fn tolerance() -> Self {
        Self::zero()
    }
    fn strict_tolerance() -> Self {
        Self::zero()
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Ratio::new(num, den)
    }
    fn from_f64(x: f64) -> Option<Self> {
        Ratio::<i64>::approximate_float(x)
    }
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
    fn parse_literal(text: &str) -> Option<Self> {
        let r = parse_big_rational(text)?;
        let n = r.numer().to_i64()?;
        let d = r.denom().to_i64()?;
        Some(Ratio::new(n, d))
    }
}

/// Sums a sequence left to right (fixed reduction order).
pub(crate) fn sum<T: Scalar, I: IntoIterator<Item = T>>(items: I) -> T {
    items.into_iter().fold(T::zero(), |acc, x| acc + x)
}

/// `x^α` extended to negative `x` by `(-x)^α = -(x^α)`.
///
/// `alpha` must be positive.
pub fn signed_power<T: Real>(x: T, alpha: T) -> T {
    if x < T::zero() {
        -((-x).powf(alpha))
    } else if x == T::zero() {
        T::zero()
    } else {
        x.powf(alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_power_sign_convention() {
        assert_eq!(signed_power(-7.0_f64, 2.0), -49.0);
        assert_eq!(signed_power(4.0_f64, 0.5), 2.0);
        assert_eq!(signed_power(0.0_f64, 3.0), 0.0);
        assert_eq!(signed_power(0.0_f64, 0.5), 0.0);
    }

    #[test]
    fn literals_parse_exactly() {
        let q = BigRational::parse_literal("-1.25").unwrap();
        assert_eq!(q, BigRational::from_ratio(-5, 4));
        assert_eq!(BigRational::parse_literal("3/4").unwrap(), BigRational::from_ratio(3, 4));
        assert_eq!(f64::parse_literal("1/4"), Some(0.25));
        assert_eq!(Ratio::<i64>::parse_literal("0.5"), Some(Ratio::new(1, 2)));
        assert!(f64::parse_literal("x").is_none());
        assert!(BigRational::parse_literal("1/0").is_none());
    }

    #[test]
    fn dot_minus_truncates() {
        assert_eq!(1.0_f64.dot_minus(3.0), 0.0);
        assert_eq!(5.0_f64.dot_minus(2.0), 3.0);
    }
}
