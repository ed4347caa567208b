//! Floating-point abstraction shared by the numerical modules.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar type the model, solver, integrator and closed forms are
/// generic over. Implemented for `f32` and `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Condition-number bound above which a linear system is reported as
    /// singular.
    fn singular_condition() -> Self;

    /// Converts an `f64` literal. Panics only for non-representable values,
    /// which never happens for the finite literals used in this crate.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("index representable in scalar type")
    }
}

impl Real for f64 {
    fn singular_condition() -> Self {
        1e12
    }
}

impl Real for f32 {
    // f32 carries ~7 digits, so the f64 bound would never trigger.
    fn singular_condition() -> Self {
        1e6
    }
}

/// Complex scalar over a [`Real`].
pub type Cplx<T> = Complex<T>;

/// `e^{i phase}`.
#[inline]
pub fn cis<T: Real>(phase: T) -> Cplx<T> {
    Complex::new(phase.cos(), phase.sin())
}
