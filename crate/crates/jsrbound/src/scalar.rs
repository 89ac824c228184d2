//! Floating-point scalar abstraction shared by every numeric routine.
//!
//! All algorithms in this crate are generic over [`Scalar`], which bundles
//! the `num-traits` capabilities they rely on. `f64` is the intended working
//! precision (the solver tolerances are chosen for it); `f32` is available
//! for lightweight experiments. Concrete `f64` aliases for the main public
//! types live at the crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by the numeric routines in this crate.
///
/// Conversions from literal constants go through `NumCast`, which `Float`
/// already implies: `T::from(0.5).unwrap()` is exact for every constant used
/// here in both `f32` and `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}
