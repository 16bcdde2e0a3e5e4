//! Scalar abstraction: every algorithm in this crate is generic over a
//! floating-point type implementing [`Real`].

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar used throughout the solver.
///
/// The two interesting instantiations are `f64` (the default for all the
/// convergence experiments; the deep-parameter sweeps need the full 53-bit
/// mantissa) and `f32` (useful for quick checks and for exercising the
/// generic code paths).
pub trait Real:
    Float + FromPrimitive + NumAssign + Display + LowerExp + Debug + Send + Sync + 'static
{
    /// Converts an `f64` literal, panicking if the target type cannot
    /// represent it at all (it may round).
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable in scalar type")
    }

    /// Converts a count or index into the scalar type.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_conversion_is_exact_for_dyadics() {
        assert_eq!(f64::of(0.0625), 0.0625);
        assert_eq!(f32::of(0.0625), 0.0625f32);
        assert_eq!(f64::of_usize(4096), 4096.0);
    }
}
