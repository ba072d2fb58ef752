//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the atom algebra is written against: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Exponent below which `exp` is treated as exactly zero.
    const UNDERFLOW: f64;

    fn erf(self) -> Self;
}

impl Scalar for f64 {
    const UNDERFLOW: f64 = -700.0;

    fn erf(self) -> Self {
        libm::erf(self)
    }
}

impl Scalar for f32 {
    const UNDERFLOW: f64 = -87.0;

    fn erf(self) -> Self {
        libm::erff(self)
    }
}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<S: Scalar>(x: f64) -> S {
    S::from_f64(x).expect("literal representable in scalar type")
}

/// `exp(x)` with the underflow convention: exponents below the cutoff give 0.
#[inline]
pub fn exp_cut<S: Scalar>(x: S) -> S {
    if x < lit(S::UNDERFLOW) {
        S::zero()
    } else {
        x.exp()
    }
}

#[inline]
pub fn to_f64<S: Scalar>(x: S) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
