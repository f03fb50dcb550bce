//! Scalar abstraction: every solver in this crate is generic over the
//! floating-point type through [`Scalar`]. `f64` is the default face via the
//! type aliases at the crate root; `f32` works everywhere at reduced
//! precision.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{de::DeserializeOwned, Serialize};

/// Floating-point scalar usable by all solvers and oracles.
///
/// The two random-draw methods exist so that generic code never needs the
/// `rand_distr` distribution bounds (which are only implemented for `f32`
/// and `f64`, exactly the types implementing this trait).
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// One standard normal variate.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One uniform variate in `[0, 1)`.
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen::<f64>()
    }
}

impl Scalar for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen::<f32>()
    }
}

/// Convert an `f64` literal into the working scalar type.
///
/// Panics if the value does not fit, which cannot happen for the finite
/// constants this crate uses it with.
pub fn lit<F: Scalar>(v: f64) -> F {
    F::from_f64(v).expect("finite constant representable in scalar type")
}
