//! Numeric traits the library is generic over.
//!
//! The payoff kernel only needs ordered field arithmetic, so it accepts any
//! [`Scalar`] including exact rationals. Everything that integrates, samples
//! or takes fractional powers needs a floating-point [`Real`].

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Ordered field element usable as a strategy or payoff value.
pub trait Scalar: Num + PartialOrd + Copy + Debug + ToPrimitive {}

impl<T> Scalar for T where T: Num + PartialOrd + Copy + Debug + ToPrimitive {}

/// Floating-point scalar used by the density, quadrature and simulation code.
pub trait Real:
    Scalar + Float + FromPrimitive + ToPrimitive + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    /// Conversion from a count.
    #[inline]
    fn of_usize(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        approx_f64(self)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Nearest `f64`, or NaN when the value has no float view.
#[inline]
pub fn approx_f64<S: ToPrimitive>(x: S) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Compares two values that are known not to be NaN.
#[inline]
pub(crate) fn cmp_real<F: Real>(a: &F, b: &F) -> std::cmp::Ordering {
    a.partial_cmp(b).expect("NaN in ordered data")
}
