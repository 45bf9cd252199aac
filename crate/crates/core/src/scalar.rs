//! Scalar abstraction shared by the policy layer.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, NumCast};

/// Floating point type the policies are evaluated in: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + NumCast + Debug + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal or measurement into `Self`.
    fn lit(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 value representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        <f64 as NumCast>::from(self).unwrap_or(f64::NAN)
    }

    fn half() -> Self {
        Self::lit(0.5)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `x` clipped to `[lo, hi]`.
pub fn clamp<T: Scalar>(x: T, lo: T, hi: T) -> T {
    x.max(lo).min(hi)
}

/// Ratio `num / den` with the limit conventions used by the branch tests:
/// `0` when the numerator is zero, `+inf` when only the denominator is zero.
pub fn safe_ratio<T: Scalar>(num: T, den: T) -> T {
    if num == T::zero() {
        T::zero()
    } else if den == T::zero() {
        T::infinity()
    } else {
        num / den
    }
}

/// Index of the largest element, lowest index on ties. Empty slices yield 0.
pub fn argmax<T: Scalar>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[0.0f32, 0.0]), 0);
        assert_eq!(argmax::<f64>(&[]), 0);
    }

    #[test]
    fn safe_ratio_conventions() {
        assert_eq!(safe_ratio(0.0, 0.0), 0.0);
        assert!(safe_ratio(1.0f64, 0.0).is_infinite());
        assert_eq!(safe_ratio(3.0, 4.0), 0.75);
    }
}
