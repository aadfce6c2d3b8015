//! Floating-point scalar abstraction.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::StandardNormal;

/// Scalar type the whole crate is generic over (`f32` or `f64`).
///
/// Sampling is part of the trait so generic code can draw standard normal
/// and uniform variates without threading `rand_distr` bounds through every
/// signature.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// One draw from N(0, 1).
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One draw from the uniform distribution on [0, 1).
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    #[inline]
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen()
    }
}

impl Scalar for f32 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    #[inline]
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen()
    }
}

/// Pull an `f64` constant into the working precision.
#[inline]
pub fn cast<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("f64 constant not representable in scalar type")
}

/// Convert a count into the working precision.
#[inline]
pub fn from_count<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("count not representable in scalar type")
}

/// Convert an iteration index into the working precision.
#[inline]
pub fn from_iter_index<T: Scalar>(t: u64) -> T {
    T::from_u64(t).expect("iteration index not representable in scalar type")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn normal_draws_replay() {
        let mut a = ChaCha12Rng::seed_from_u64(7);
        let mut b = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x: f64 = Scalar::standard_normal(&mut a);
            let y: f64 = Scalar::standard_normal(&mut b);
            assert_eq!(x, y);
        }
    }

    #[test]
    fn cast_round_trips_small_constants() {
        assert_eq!(cast::<f64>(0.25), 0.25);
        assert_eq!(cast::<f32>(0.25), 0.25f32);
        assert_eq!(from_count::<f64>(17), 17.0);
    }
}
