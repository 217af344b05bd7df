//! Hermitian and positive semidefinite matrices, spectra and functional
//! calculus.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::matrix::{Field, MatrixF};
use super::quaternion::Quaternion;
use crate::error::{Error, Result};

/// Relative tolerance for the Hermitian check in [`HermitianMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Relative tolerance for positive semidefiniteness.
pub const PSD_TOL: f64 = 1e-10;

const EIG_MAX_ITER: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(MatrixF);

impl HermitianMatrix {
    /// Accepts `x` if it is Hermitian up to [`HERMITIAN_TOL`] (relative) and
    /// stores its exact Hermitian part.
    pub fn new(x: MatrixF) -> Result<Self> {
        if !x.is_square() {
            return Err(Error::Dimension(format!("{}x{} is not square", x.rows(), x.cols())));
        }
        let defect = x.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian { defect });
        }
        Ok(HermitianMatrix(x.hermitian_part()))
    }

    /// Hermitian part `(x + x*)/2` of any square matrix.
    pub fn symmetrize(x: &MatrixF) -> Self {
        assert!(x.is_square());
        HermitianMatrix(x.hermitian_part())
    }

    pub fn diag(field: Field, diagonal: &[f64]) -> Self {
        HermitianMatrix(MatrixF::diag(field, diagonal))
    }

    pub fn identity(field: Field, q: usize) -> Self {
        HermitianMatrix(MatrixF::identity(field, q))
    }

    pub fn as_matrix(&self) -> &MatrixF {
        &self.0
    }

    pub fn into_matrix(self) -> MatrixF {
        self.0
    }

    pub fn field(&self) -> Field {
        self.0.field()
    }

    pub fn q(&self) -> usize {
        self.0.rows()
    }

    /// Jordan eigenvalues in decreasing order. For `H` the complex embedding
    /// has every eigenvalue twice; each pair is reported once.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        let q = self.q();
        if q == 1 {
            return Ok(vec![self.0.get(0, 0).a]);
        }
        if q == 2 {
            let (a, c) = (self.0.get(0, 0).a, self.0.get(1, 1).a);
            let z = self.0.get(0, 1).norm_sqr();
            let m = 0.5 * (a + c);
            let r = (0.25 * (a - c) * (a - c) + z).sqrt();
            return Ok(vec![m + r, m - r]);
        }
        let (vals, _) = self.eigen()?;
        Ok(vals)
    }

    /// Eigenvalues (decreasing) and the complex matrix of eigenvectors of
    /// the complex representation. For `H` the eigenvalues are returned once
    /// per Jordan eigenvalue while the eigenvector matrix is `2q x 2q`.
    fn eigen(&self) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
        let m = self.0.to_complex();
        let eig = SymmetricEigen::try_new(m, f64::EPSILON, EIG_MAX_ITER)
            .ok_or(Error::EigenNonConvergence)?;
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        if self.field() == Field::H {
            vals = vals.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        }
        Ok((vals, eig.eigenvectors))
    }

    /// `f(x)` by functional calculus.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
        let m = self.0.to_complex();
        let eig = SymmetricEigen::try_new(m, f64::EPSILON, EIG_MAX_ITER)
            .ok_or(Error::EigenNonConvergence)?;
        let v = &eig.eigenvectors;
        let n = v.nrows();
        let fl: Vec<f64> = eig.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = DMatrix::<Complex64>::zeros(n, n);
        for k in 0..n {
            for i in 0..n {
                let a = v[(i, k)] * fl[k];
                for j in 0..n {
                    out[(i, j)] += a * v[(j, k)].conj();
                }
            }
        }
        Ok(HermitianMatrix::symmetrize(&MatrixF::from_complex(self.field(), &out)))
    }

    pub fn trace(&self) -> f64 {
        self.0.trace_re()
    }

    /// `x^2`.
    pub fn square(&self) -> HermitianMatrix {
        HermitianMatrix::symmetrize(&self.0.matmul(&self.0))
    }

    /// `a x a*` for any square `a` of matching size.
    pub fn congruence(&self, a: &MatrixF) -> HermitianMatrix {
        HermitianMatrix::symmetrize(&a.matmul(&self.0).matmul(&a.adjoint()))
    }

    pub fn add(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(self.0.add(&other.0))
    }

    pub fn scale(&self, s: f64) -> HermitianMatrix {
        HermitianMatrix(self.0.scale(s))
    }

    pub fn promote(&self, field: Field) -> HermitianMatrix {
        HermitianMatrix(self.0.promote(field))
    }

    /// Spectral norm.
    pub fn norm(&self) -> Result<f64> {
        Ok(self.spectrum()?.iter().fold(0.0, |m, x| m.max(x.abs())))
    }

    pub fn is_psd(&self) -> Result<bool> {
        let s = self.spectrum()?;
        let scale = s.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        Ok(s.iter().all(|&l| l >= -PSD_TOL * scale))
    }
}

/// A positive semidefinite Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct PsdMatrix(HermitianMatrix);

impl PsdMatrix {
    /// Accepts `x` when its smallest eigenvalue is at least
    /// `-PSD_TOL * |x|`.
    pub fn new(x: HermitianMatrix) -> Result<Self> {
        let s = x.spectrum()?;
        let scale = s.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let min = s.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL * scale {
            return Err(Error::NotPsd { min_eig: min });
        }
        Ok(PsdMatrix(x))
    }

    pub fn from_matrix(x: MatrixF) -> Result<Self> {
        PsdMatrix::new(HermitianMatrix::new(x)?)
    }

    /// `diag(xi)` for a nonnegative vector.
    pub fn diag(field: Field, xi: &[f64]) -> Result<Self> {
        if let Some(&bad) = xi.iter().find(|&&x| !(x >= 0.0)) {
            return Err(Error::NotPsd { min_eig: bad });
        }
        Ok(PsdMatrix(HermitianMatrix::diag(field, xi)))
    }

    pub fn identity(field: Field, q: usize) -> Self {
        PsdMatrix(HermitianMatrix::identity(field, q))
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn as_matrix(&self) -> &MatrixF {
        self.0.as_matrix()
    }

    pub fn field(&self) -> Field {
        self.0.field()
    }

    pub fn q(&self) -> usize {
        self.0.q()
    }

    pub fn spectrum(&self) -> Result<Vec<f64>> {
        self.0.spectrum()
    }
}

/// Unique PSD square root. Eigenvalues in `[-PSD_TOL |x|, 0)` are clamped
/// to zero, anything more negative is rejected.
pub fn psd_sqrt(x: &HermitianMatrix) -> Result<PsdMatrix> {
    let q = x.q();
    let spec = x.spectrum()?;
    let scale = spec.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let min = spec.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOL * scale {
        return Err(Error::NotPsd { min_eig: min });
    }
    if q == 1 {
        let a = x.as_matrix().get(0, 0).a.max(0.0).sqrt();
        return Ok(PsdMatrix(HermitianMatrix::diag(x.field(), &[a])));
    }
    if q == 2 {
        return Ok(PsdMatrix(sqrt_2x2(x, spec[0].max(0.0), spec[1].max(0.0))));
    }
    Ok(PsdMatrix(x.map_spectrum(|l| l.max(0.0).sqrt())?))
}

/// Square root of a PSD matrix `x` from the precomputed spectrum of a
/// 2x2 matrix over any of the three fields:
/// `sqrt(x) = (x + sqrt(det) I) / sqrt(tr x + 2 sqrt(det))`, a consequence
/// of `x^2 - tr(x) x + det(x) I = 0`.
fn sqrt_2x2(x: &HermitianMatrix, l1: f64, l2: f64) -> HermitianMatrix {
    let sd = (l1 * l2).sqrt();
    let denom = l1.sqrt() + l2.sqrt();
    if denom == 0.0 {
        return HermitianMatrix::diag(x.field(), &[0.0, 0.0]);
    }
    let m = x.as_matrix();
    let mut out = MatrixF::zeros(x.field(), 2, 2);
    let a = (m.get(0, 0).a + sd) / denom;
    let c = (m.get(1, 1).a + sd) / denom;
    let b = m.get(0, 1).scale(1.0 / denom);
    out.set(0, 0, Quaternion::real(a));
    out.set(1, 1, Quaternion::real(c));
    out.set(0, 1, b);
    out.set(1, 0, b.conj());
    HermitianMatrix(out)
}

/// `sqrt(m)` for a matrix that is Hermitian only up to rounding: the
/// Hermitian part is taken and tiny negative eigenvalues are clamped.
pub fn sqrt_clamped(m: &MatrixF) -> Result<PsdMatrix> {
    let h = HermitianMatrix::symmetrize(m);
    let spec = h.spectrum()?;
    let q = h.q();
    match q {
        1 => Ok(PsdMatrix(HermitianMatrix::diag(h.field(), &[spec[0].max(0.0).sqrt()]))),
        2 => Ok(PsdMatrix(sqrt_2x2(&h, spec[0].max(0.0), spec[1].max(0.0)))),
        _ => Ok(PsdMatrix(h.map_spectrum(|l| l.max(0.0).sqrt())?)),
    }
}
