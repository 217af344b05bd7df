//! Determinant, principal minors, power functions and the gamma function
//! of the cone of positive matrices.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::hermitian::HermitianMatrix;
use super::matrix::Field;
use crate::error::{Error, Result};
use crate::special::{gamma_complex, ln_gamma_signed};

/// Structural constants of `Ω_q(F)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ConeDims {
    pub field: Field,
    pub q: usize,
}

impl ConeDims {
    pub fn new(field: Field, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParameter("q must be at least 1".into()));
        }
        Ok(ConeDims { field, q })
    }

    pub fn d(&self) -> f64 {
        self.field.d() as f64
    }

    /// Real dimension `n = q + d q (q-1) / 2` of the Hermitian matrices.
    pub fn n(&self) -> usize {
        self.q + self.field.d() * self.q * (self.q - 1) / 2
    }

    /// `ϱ = d (q - 1/2) + 1`.
    pub fn rho(&self) -> f64 {
        self.d() * (self.q as f64 - 0.5) + 1.0
    }

    /// `γ = μ - d (q-1)/2 - 1`.
    pub fn gamma_exponent(&self, mu: f64) -> f64 {
        mu - self.d() * (self.q as f64 - 1.0) / 2.0 - 1.0
    }

    /// Jack parameter `α = 2/d`.
    pub fn alpha(&self) -> f64 {
        2.0 / self.d()
    }

    /// Is `μ` in `{p d / 2 : p >= q} ∪ (ϱ - 1, ∞)`?
    pub fn is_admissible(&self, mu: f64) -> bool {
        if !mu.is_finite() {
            return false;
        }
        if mu > self.rho() - 1.0 {
            return true;
        }
        self.orbit_dimension(mu).is_some()
    }

    /// `p` with `μ = p d / 2` and `p >= q`, if any.
    pub fn orbit_dimension(&self, mu: f64) -> Option<usize> {
        let p = 2.0 * mu / self.d();
        let pr = p.round();
        if (p - pr).abs() < 1e-12 && pr >= self.q as f64 {
            Some(pr as usize)
        } else {
            None
        }
    }
}

/// `Δ(x)`, the product of the Jordan eigenvalues.
pub fn cone_det(x: &HermitianMatrix) -> Result<f64> {
    Ok(x.spectrum()?.iter().product())
}

/// `Δ_j(x)`, the determinant of the top-left `j x j` block (`1 <= j <= q`).
pub fn principal_minor(x: &HermitianMatrix, j: usize) -> Result<f64> {
    let q = x.q();
    if j == 0 || j > q {
        return Err(Error::IndexOutOfRange { index: j, q });
    }
    let block = HermitianMatrix::symmetrize(&x.as_matrix().leading_block(j));
    cone_det(&block)
}

/// `Δ_λ(x) = Δ_1^{λ_1-λ_2} ... Δ_{q-1}^{λ_{q-1}-λ_q} Δ_q^{λ_q}` for a
/// nonincreasing exponent vector of length `q`.
pub fn power_function(x: &HermitianMatrix, lambda: &[f64]) -> Result<f64> {
    let q = x.q();
    if lambda.len() != q {
        return Err(Error::Dimension(format!("{} exponents for q = {q}", lambda.len())));
    }
    let mut out = 1.0;
    for j in 1..=q {
        let e = lambda[j - 1] - if j < q { lambda[j] } else { 0.0 };
        if e != 0.0 {
            out *= principal_minor(x, j)?.powf(e);
        }
    }
    Ok(out)
}

/// `Γ_Ω(z) = (2π)^{(n-q)/2} Π_{j=1}^q Γ(z - d(j-1)/2)`.
pub fn gamma_omega(d: usize, q: usize, z: Complex64) -> Result<Complex64> {
    let dims = ConeDims::new(Field::from_d(d)?, q)?;
    let mut out = Complex64::new((2.0 * PI).powf((dims.n() - q) as f64 / 2.0), 0.0);
    for j in 1..=q {
        out *= gamma_complex(z - dims.d() * (j as f64 - 1.0) / 2.0)?;
    }
    Ok(out)
}

pub fn gamma_omega_real(d: usize, q: usize, z: f64) -> Result<f64> {
    Ok(gamma_omega(d, q, Complex64::new(z, 0.0))?.re)
}

/// `ln |Γ_Ω(z)|` and its sign, for real `z` away from poles.
pub fn ln_gamma_omega(d: usize, q: usize, z: f64) -> Result<(f64, f64)> {
    let dims = ConeDims::new(Field::from_d(d)?, q)?;
    let mut lg = (dims.n() - q) as f64 / 2.0 * (2.0 * PI).ln();
    let mut sign = 1.0;
    for j in 1..=q {
        let arg = z - dims.d() * (j as f64 - 1.0) / 2.0;
        if arg <= 0.0 && arg == arg.round() {
            return Err(Error::Pole(arg));
        }
        let (l, s) = ln_gamma_signed(arg);
        lg += l;
        sign *= s;
    }
    Ok((lg, sign))
}
