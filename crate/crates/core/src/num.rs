//! Scalar abstraction and compensated summation.
//!
//! All numeric kernels are generic over [`Real`], which is implemented by
//! `f32` and `f64`. Concrete `f64` aliases live at the crate root.

use std::fmt::{Debug, Display};
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar used throughout the library.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Display
    + Copy
    + 'static
{
    /// Lift an `f64` constant into the scalar type.
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("constant not representable in scalar type")
    }

    /// Lift a sequence index.
    fn from_index(n: u64) -> Self {
        Self::from_u64(n).expect("index not representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Debug
        + Display
        + Copy
        + 'static
{
}

/// Global comparison tolerance for interval endpoints and piece values.
pub const CMP_EPS: f64 = 1e-12;

pub fn cmp_eps<R: Real>() -> R {
    R::c(CMP_EPS)
}

/// Kahan–Neumaier compensated accumulator.
#[derive(Clone, Copy, Debug)]
pub struct KahanSum<R> {
    sum: R,
    comp: R,
}

impl<R: Real> Default for KahanSum<R> {
    fn default() -> Self {
        Self::new()
    }
}

impl<R: Real> KahanSum<R> {
    pub fn new() -> Self {
        KahanSum {
            sum: R::zero(),
            comp: R::zero(),
        }
    }

    pub fn add(&mut self, x: R) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> R {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator of scalars.
pub fn kahan_sum<R: Real, I: IntoIterator<Item = R>>(iter: I) -> R {
    let mut acc = KahanSum::new();
    for x in iter {
        acc.add(x);
    }
    acc.value()
}
