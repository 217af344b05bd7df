use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("entry has components outside the field {field}")]
    WrongField { field: &'static str },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (relative defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    #[error("minor index {index} out of range 1..={q}")]
    IndexOutOfRange { index: usize, q: usize },

    #[error("gamma function pole at argument {0}")]
    Pole(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index mu = {mu} is not in the admissible set for this cone")]
    IndexNotAdmissible { mu: f64 },

    #[error("Pochhammer symbol vanishes for this index and partition")]
    PochhammerZero,

    #[error("series did not reach tolerance within weight {cap}")]
    SeriesCapExceeded { cap: usize },

    #[error("imaginary part {im:.3e} of a real-valued series exceeds rounding tolerance")]
    ImaginaryLeakage { im: f64 },

    #[error("eigenvalue iteration did not converge")]
    EigenNonConvergence,

    #[error("quadrature did not converge (estimated error {error:.3e})")]
    QuadratureNonConvergence { error: f64 },

    #[error("decay class is insufficient for this integral: {0}")]
    DecayInsufficient(String),

    #[error("operation not available: {0}")]
    Unsupported(String),
}

impl Error {
    /// Errors that signal lack of numerical convergence rather than bad input.
    pub fn is_non_convergence(&self) -> bool {
        matches!(
            self,
            Error::SeriesCapExceeded { .. }
                | Error::EigenNonConvergence
                | Error::QuadratureNonConvergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
