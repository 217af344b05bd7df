//! Bessel functions, convolution structures and Fourier analysis on cones
//! of positive semidefinite matrices over `R`, `C` and `H`.

pub mod algebra;
pub mod bessel;
pub mod chamber;
pub mod cone_hypergroup;
pub mod error;
pub mod jack;
pub mod mc;
pub mod partition;
pub mod quad;
pub mod sampling;
pub mod scalar;
pub mod special;
pub mod transforms;

pub use algebra::{Field, HermitianMatrix, MatrixF, PsdMatrix, Quaternion};
pub use error::{Error, Result};
pub use partition::Partition;
