//! Floating-point scalar abstraction shared by every module.
//!
//! All numerical code in this crate is written against [`Scalar`], which is
//! implemented for `f32` and `f64`. Random draws go through the trait so that
//! generic code does not need `Distribution<T>` bounds at every call site.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// A real floating-point type usable throughout the crate.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Short tag written into checkpoint headers.
    const TAG: &'static str;

    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Uniform draw on `[0, 1)`.
    fn unit<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Lossy conversion from `f64`; exact for values representable in `Self`.
    fn of(x: f64) -> Self;

    fn to_f64_lossy(self) -> f64;

    /// Raw bit pattern widened to 64 bits, used to key per-point noise.
    fn bits(self) -> u64;

    fn count(n: usize) -> Self {
        Self::of(n as f64)
    }
}

impl Scalar for f64 {
    const TAG: &'static str = "f64";

    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    fn unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f64>()
    }

    fn of(x: f64) -> Self {
        x
    }

    fn to_f64_lossy(self) -> f64 {
        self
    }

    fn bits(self) -> u64 {
        self.to_bits()
    }
}

impl Scalar for f32 {
    const TAG: &'static str = "f32";

    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    fn unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f32>()
    }

    fn of(x: f64) -> Self {
        x as f32
    }

    fn to_f64_lossy(self) -> f64 {
        f64::from(self)
    }

    fn bits(self) -> u64 {
        u64::from(self.to_bits())
    }
}
