//! Real and complex scalars for the series engines.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Mul<f64, Output = Self>
    + Neg<Output = Self>
    + From<f64>
    + Send
    + Sync
    + std::fmt::Debug
{
    fn modulus(self) -> f64;
    fn to_complex(self) -> Complex64;
}

impl Scalar for f64 {
    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    #[inline]
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn to_complex(self) -> Complex64 {
        self
    }
}
