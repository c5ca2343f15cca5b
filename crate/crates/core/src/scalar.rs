//! Scalar abstractions shared by the numeric modules.
//!
//! Two tiers are used. [`Scalar`] is the field arithmetic needed by the
//! continued-fraction machinery and the classical C-fraction fit; it is
//! implemented for `f32`, `f64` and exact [`BigRational`]s. [`Real`] adds the
//! transcendental functions required once expressions, quadrature and
//! functionals are involved, so it is only available for floating point types.

use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Field arithmetic plus the breakdown thresholds used when dividing.
pub trait Scalar:
    Num + Neg<Output = Self> + Clone + PartialOrd + fmt::Debug + ToPrimitive + Send + Sync + 'static
{
    /// Denominators with magnitude strictly below this count as zero during
    /// fraction evaluation. Exact types use zero, so only a true zero breaks down.
    fn breakdown_tolerance() -> Self;

    /// Relative threshold used by coefficient fitting (scaled by the data range).
    fn fit_tolerance() -> Self;

    fn magnitude(&self) -> Self;

    fn is_finite_value(&self) -> bool;

    /// `true` when `|self| < tol`, or `self` is exactly zero.
    fn is_negligible(&self, tol: &Self) -> bool {
        self.is_zero() || self.magnitude() < *tol
    }
}

macro_rules! impl_float_scalar {
    ($t:ty, $tiny:expr) => {
        impl Scalar for $t {
            fn breakdown_tolerance() -> Self {
                $tiny
            }

            fn fit_tolerance() -> Self {
                1e-12
            }

            fn magnitude(&self) -> Self {
                self.abs()
            }

            fn is_finite_value(&self) -> bool {
                self.is_finite()
            }
        }
    };
}

impl_float_scalar!(f64, 1e-300);
impl_float_scalar!(f32, 1e-37);

impl Scalar for BigRational {
    fn breakdown_tolerance() -> Self {
        BigRational::zero()
    }

    fn fit_tolerance() -> Self {
        BigRational::zero()
    }

    fn magnitude(&self) -> Self {
        self.abs()
    }

    fn is_finite_value(&self) -> bool {
        true
    }
}

/// Floating point scalars: everything the grid, functional and kernel code needs.
pub trait Real: Scalar + Float + FromPrimitive + fmt::Display + fmt::LowerExp {}

impl<T> Real for T where T: Scalar + Float + FromPrimitive + fmt::Display + fmt::LowerExp {}

/// Converts an `f64` literal into `T`.
///
/// Every `Real` in this crate is a primitive float, for which the conversion
/// is infallible (it may round).
#[inline]
pub(crate) fn lit<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("f64 literal representable in target float")
}

#[inline]
pub(crate) fn from_index<T: Real>(i: usize) -> T {
    T::from_usize(i).expect("grid index representable in target float")
}

/// Builds an exact rational from a small integer ratio.
pub fn ratio(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}
