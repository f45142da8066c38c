//! Scalar abstraction: the element type every kernel and generator works over.

use std::fmt::{Debug, Display};
use std::ops::AddAssign;

use num_traits::{Float, FloatConst};

/// Floating-point element type: f32 or f64.
///
/// Everything downstream (kernels, generators, comparisons) is generic over
/// this trait; the benchmark pipeline itself is pinned to [`f64`] via the
/// crate-root aliases.
pub trait Real:
    Float + FloatConst + AddAssign + Display + Debug + Send + Sync + 'static
{
    /// Parses a decimal literal as written by `Display`, `None` if malformed.
    fn parse_real(s: &str) -> Option<Self>;

    /// Maps 64 random bits onto the open interval (0, 1).
    ///
    /// Both endpoints are excluded: the result is built from the top mantissa
    /// bits plus a half-ulp offset, so the smallest value is strictly positive
    /// and the largest strictly below one.
    fn from_uniform_bits(bits: u64) -> Self;

    /// Bit pattern widened to u64, for bit-exact comparisons.
    fn to_bits_u64(self) -> u64;
}

impl Real for f64 {
    fn parse_real(s: &str) -> Option<f64> {
        s.trim().parse().ok()
    }

    fn from_uniform_bits(bits: u64) -> f64 {
        // 52 bits keep (k + 0.5) exactly representable, so the largest
        // result is 1 - 2^-53 and the smallest 2^-53.
        ((bits >> 12) as f64 + 0.5) * (1.0 / 4_503_599_627_370_496.0)
    }

    fn to_bits_u64(self) -> u64 {
        self.to_bits()
    }
}

impl Real for f32 {
    fn parse_real(s: &str) -> Option<f32> {
        s.trim().parse().ok()
    }

    fn from_uniform_bits(bits: u64) -> f32 {
        // 23 bits keep (k + 0.5) exactly representable in an f32.
        ((bits >> 41) as f32 + 0.5) * (1.0 / 8_388_608.0)
    }

    fn to_bits_u64(self) -> u64 {
        u64::from(self.to_bits())
    }
}
