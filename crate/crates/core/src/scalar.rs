use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Field element used by the matrix, elimination and simplex routines.
///
/// Exact types report a zero tolerance, so every "is this zero" question is
/// decided exactly. Floating types use a small absolute threshold.
pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Largest magnitude still treated as zero.
    fn zero_tolerance() -> Self;

    fn is_negligible(&self) -> bool {
        self.abs() <= Self::zero_tolerance()
    }

    fn from_int(v: i64) -> Self;

    /// Nearest `f64`; exact types may round.
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn is_finite_value(&self) -> bool {
        true
    }
}

impl Scalar for f64 {
    fn zero_tolerance() -> Self {
        1e-9
    }

    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f32 {
    fn zero_tolerance() -> Self {
        1e-5
    }

    fn from_int(v: i64) -> Self {
        v as f32
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for BigRational {
    fn zero_tolerance() -> Self {
        BigRational::from_integer(BigInt::from(0))
    }

    fn is_negligible(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }

    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
}

/// Parses `"p/q"`, `"p"` or a JSON-style integer into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    match text.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if num_traits::Zero::is_zero(&q) {
                return None;
            }
            Some(BigRational::new(p, q))
        }
        None => text.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

/// Smallest integer not below `value`, as a `u64`, clamped at zero.
///
/// A value within `slack` above an integer rounds down to it, so LP noise
/// such as `3.0000000002` does not inflate a bound.
pub fn ceil_nonneg(value: f64, slack: f64) -> u64 {
    if !value.is_finite() || value <= 0.0 {
        return 0;
    }
    let c = (value - slack).ceil();
    if c <= 0.0 {
        0
    } else {
        c as u64
    }
}

/// Exact ceiling of a nonnegative rational; negative values clamp to zero.
pub fn ceil_rational(value: &BigRational) -> u64 {
    if value.is_negative() {
        return 0;
    }
    value.ceil().to_integer().to_u64().unwrap_or(u64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_rational_forms() {
        assert_eq!(parse_rational("3"), Some(BigRational::from_int(3)));
        assert_eq!(
            parse_rational("6/4"),
            Some(BigRational::new(BigInt::from(3), BigInt::from(2)))
        );
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    #[test]
    fn ceilings() {
        assert_eq!(ceil_nonneg(0.8, 1e-7), 1);
        assert_eq!(ceil_nonneg(3.000_000_000_2, 1e-7), 3);
        assert_eq!(ceil_nonneg(-0.5, 1e-7), 0);
        assert_eq!(ceil_nonneg(0.0, 1e-7), 0);
        assert_eq!(ceil_rational(&parse_rational("7/3").unwrap()), 3);
        assert_eq!(ceil_rational(&parse_rational("-7/3").unwrap()), 0);
    }

    #[test]
    fn exact_zero_test() {
        assert!(BigRational::from_int(0).is_negligible());
        assert!(!parse_rational("1/1000000000000").unwrap().is_negligible());
        assert!(1e-12_f64.is_negligible());
    }
}
