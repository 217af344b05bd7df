//! Matrices over `R`, `C`, `H`, Hermitian and positive cones.

mod cone;
mod hermitian;
mod matrix;
mod quaternion;

pub use cone::{
    cone_det, gamma_omega, gamma_omega_real, ln_gamma_omega, power_function, principal_minor,
    ConeDims,
};
pub use hermitian::{psd_sqrt, sqrt_clamped, HermitianMatrix, PsdMatrix, HERMITIAN_TOL, PSD_TOL};
pub use matrix::{wider, Field, MatrixF};
pub use quaternion::Quaternion;
