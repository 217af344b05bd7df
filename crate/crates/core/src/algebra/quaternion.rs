//! Real quaternions `a + b i + c j + d k` with `i j = k`.
//!
//! Every matrix entry in this crate is stored as a quaternion; real and
//! complex matrices simply keep the unused components at zero. Complex
//! numbers sit inside the quaternions as `a + b i`, which is a commutative
//! subalgebra, so complex arithmetic is exact under this representation.

use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Quaternion { a, b, c, d }
    }

    pub const fn real(a: f64) -> Self {
        Quaternion::new(a, 0.0, 0.0, 0.0)
    }

    pub fn from_complex(z: Complex64) -> Self {
        Quaternion::new(z.re, z.im, 0.0, 0.0)
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.a, -self.b, -self.c, -self.d)
    }

    pub fn norm_sqr(self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn inv(self) -> Self {
        self.conj().scale(1.0 / self.norm_sqr())
    }

    /// Euclidean inner product of the underlying 4-vectors, `Re(conj(x) y)`.
    pub fn dot(self, other: Self) -> f64 {
        self.a * other.a + self.b * other.b + self.c * other.c + self.d * other.d
    }

    pub fn components(self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Split `z1 + z2 j` with `z1 = a + b i`, `z2 = c + d i`.
    pub fn to_complex_pair(self) -> (Complex64, Complex64) {
        (Complex64::new(self.a, self.b), Complex64::new(self.c, self.d))
    }

    pub fn from_complex_pair(z1: Complex64, z2: Complex64) -> Self {
        Quaternion::new(z1.re, z1.im, z2.re, z2.im)
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.a, self.b)
    }

    pub fn is_finite(self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }
}

impl Add for Quaternion {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Quaternion::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Quaternion {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Quaternion::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Quaternion::new(-self.a, -self.b, -self.c, -self.d)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Quaternion::new(
            self.a * o.a - self.b * o.b - self.c * o.c - self.d * o.d,
            self.a * o.b + self.b * o.a + self.c * o.d - self.d * o.c,
            self.a * o.c - self.b * o.d + self.c * o.a + self.d * o.b,
            self.a * o.d + self.b * o.c - self.c * o.b + self.d * o.a,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scale(s)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl MulAssign for Quaternion {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}
