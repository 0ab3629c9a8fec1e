//! Scalar abstraction shared by set functions, the LP solver and the surrogates.
//!
//! Everything that only needs field arithmetic and an ordering is written
//! against [`Scalar`], so the same code runs in `f64`, `f32` or exact
//! rational arithmetic. Floating types carry absolute tolerances; the exact
//! type uses zero everywhere.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Ordered field element with the tolerances used throughout the crate.
pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Absolute tolerance for structural inequalities (sub/supermodularity, monotonicity).
    fn tolerance() -> Self;
    /// Smallest magnitude accepted as a simplex pivot.
    fn pivot_tolerance() -> Self;
    /// Primal/dual feasibility tolerance inside the simplex.
    fn feasibility_tolerance() -> Self;

    /// Exact `num / den` where the type allows it.
    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num).expect("integer conversion") / Self::from_i64(den).expect("integer conversion")
    }

    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("integer conversion")
    }

    /// Lossy conversion used for reporting and mixed-precision comparisons.
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn positive_part(self) -> Self {
        if self > Self::zero() {
            self
        } else {
            Self::zero()
        }
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-9
    }
    fn pivot_tolerance() -> Self {
        1e-10
    }
    fn feasibility_tolerance() -> Self {
        1e-9
    }
    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-5
    }
    fn pivot_tolerance() -> Self {
        1e-6
    }
    fn feasibility_tolerance() -> Self {
        1e-5
    }
    fn ratio(num: i64, den: i64) -> Self {
        num as f32 / den as f32
    }
}

impl Scalar for BigRational {
    fn tolerance() -> Self {
        BigRational::zero()
    }
    fn pivot_tolerance() -> Self {
        BigRational::zero()
    }
    fn feasibility_tolerance() -> Self {
        BigRational::zero()
    }
    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

/// Converts between scalar types through `f64` (exact for `f64 -> BigRational`).
pub fn convert<S: Scalar, T: Scalar>(value: &S) -> T {
    T::from_f64(value.to_f64_lossy()).expect("finite value")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_ratio_is_exact() {
        let third = BigRational::ratio(10, 3);
        assert_eq!(third.clone() * BigRational::from_i64(3).unwrap(), BigRational::from_i64(10).unwrap());
        assert!(BigRational::tolerance().is_zero());
    }

    #[test]
    fn float_to_rational_roundtrip() {
        let x = 0.1_f64;
        let r: BigRational = convert(&x);
        let back: f64 = convert(&r);
        assert_eq!(back, x);
    }

    #[test]
    fn positive_part_clamps() {
        assert_eq!((-2.0_f64).positive_part(), 0.0);
        assert_eq!(3.0_f64.positive_part(), 3.0);
    }
}
