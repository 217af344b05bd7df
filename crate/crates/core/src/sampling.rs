//! Random matrices: Gaussian entries, Haar unitaries and Stiefel frames,
//! the matrix ball `D_q` through its row-product parametrization, and
//! Wishart-type matrices by the Bartlett decomposition.

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};

use crate::algebra::{Field, HermitianMatrix, MatrixF, PsdMatrix, Quaternion};
use crate::error::{Error, Result};

/// A standard Gaussian in `F`: every real component is `N(0, 1)`.
pub fn gaussian_scalar<R: Rng + ?Sized>(rng: &mut R, field: Field) -> Quaternion {
    let mut g = || -> f64 { StandardNormal.sample(rng) };
    match field {
        Field::R => Quaternion::real(g()),
        Field::C => Quaternion::new(g(), g(), 0.0, 0.0),
        Field::H => Quaternion::new(g(), g(), g(), g()),
    }
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, field: Field, rows: usize, cols: usize) -> MatrixF {
    let data = (0..rows * cols).map(|_| gaussian_scalar(rng, field)).collect();
    MatrixF::from_projected(field, rows, cols, data)
}

/// `Σ_i conj(a_i) b_i` over column `ja` of `a` and column `jb` of `b`.
fn column_dot(a: &MatrixF, ja: usize, b: &MatrixF, jb: usize) -> Quaternion {
    let mut s = Quaternion::ZERO;
    for i in 0..a.rows() {
        s += a.get(i, ja).conj() * b.get(i, jb);
    }
    s
}

/// Orthonormalizes the columns of `x` in place by modified Gram-Schmidt
/// with one reorthogonalization pass. Scalars act from the right, so the
/// result is `x = Q R` with `R` upper triangular and positive diagonal.
fn orthonormalize_columns(x: &mut MatrixF) -> Result<()> {
    let (p, q) = (x.rows(), x.cols());
    for j in 0..q {
        for _pass in 0..2 {
            for k in 0..j {
                let c = column_dot(x, k, x, j);
                for i in 0..p {
                    let v = x.get(i, j) - x.get(i, k) * c;
                    x.set(i, j, v);
                }
            }
        }
        let norm = column_dot(x, j, x, j).a.sqrt();
        if !(norm > 1e-300) {
            return Err(Error::InvalidParameter("degenerate Gaussian frame".into()));
        }
        for i in 0..p {
            let v = x.get(i, j).scale(1.0 / norm);
            x.set(i, j, v);
        }
    }
    Ok(())
}

/// A Haar-distributed point of the Stiefel manifold `{σ ∈ M_{p,q}(F) : σ*σ = I}`.
/// It is the first `q` columns of a Haar unitary of `U_p(F)`.
pub fn stiefel<R: Rng + ?Sized>(rng: &mut R, field: Field, p: usize, q: usize) -> Result<MatrixF> {
    if p < q {
        return Err(Error::InvalidParameter(format!("Stiefel frame needs p >= q, got p={p}, q={q}")));
    }
    let mut x = gaussian_matrix(rng, field, p, q);
    orthonormalize_columns(&mut x)?;
    Ok(x)
}

/// A Haar-distributed element of `U_q(F)` (orthogonal, unitary or
/// compact symplectic group).
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, field: Field, q: usize) -> Result<MatrixF> {
    stiefel(rng, field, q, q)
}

/// Row vector uniformly distributed on the unit sphere of `F^q`.
pub fn sphere_row<R: Rng + ?Sized>(rng: &mut R, field: Field, q: usize) -> MatrixF {
    loop {
        let g = gaussian_matrix(rng, field, 1, q);
        let n = g.frobenius_norm();
        if n > 1e-300 {
            return g.scale(1.0 / n);
        }
    }
}

/// Row vector `y ∈ B ⊂ F^q` with density `∝ (1 - |y|²)^{b-1}`: uniform
/// direction, `|y|² ~ Beta(dq/2, b)`. Returns `y` and `|y|²`.
pub fn ball_row<R: Rng + ?Sized>(rng: &mut R, field: Field, q: usize, b: f64) -> Result<(MatrixF, f64)> {
    let a = field.d() as f64 * q as f64 / 2.0;
    let beta = Beta::new(a, b).map_err(|e| Error::InvalidParameter(format!("Beta({a}, {b}): {e}")))?;
    let r2: f64 = beta.sample(rng);
    let dir = sphere_row(rng, field, q);
    Ok((dir.scale(r2.sqrt()), r2))
}

/// The ball-product map `P(y_1, …, y_q)`: row `j` of `v` is
/// `y_j (I - y_{j-1}* y_{j-1})^{1/2} ⋯ (I - y_1* y_1)^{1/2}`. Uses
/// `(I - y*y)^{1/2} = I - c y*y` with `c = (1 - sqrt(1 - |y|²)) / |y|²`.
pub fn ball_product(rows: &[MatrixF]) -> Result<MatrixF> {
    let q = rows.len();
    let field = rows.first().map(|r| r.field()).ok_or_else(|| Error::Dimension("no rows".into()))?;
    let mut m = MatrixF::identity(field, q);
    let mut v = MatrixF::zeros(field, q, q);
    for (j, y) in rows.iter().enumerate() {
        if y.rows() != 1 || y.cols() != q {
            return Err(Error::Dimension(format!("row {j} is {}x{}, expected 1x{q}", y.rows(), y.cols())));
        }
        let row = y.matmul(&m);
        for k in 0..q {
            v.set(j, k, row.get(0, k));
        }
        if j + 1 < q {
            let r2 = y.frobenius_norm().powi(2);
            if r2 >= 1.0 {
                return Err(Error::InvalidParameter(format!("row {j} outside the unit ball")));
            }
            if r2 > 0.0 {
                let c = (1.0 - (1.0 - r2).sqrt()) / r2;
                // (I - c y*y) m = m - c y* (y m) = m - c y* row
                let outer = y.adjoint().matmul(&row);
                m = m.sub(&outer.scale(c));
            }
        }
    }
    Ok(v)
}

/// A point of `D_q` together with `Δ(I - v*v) = Π_j (1 - |y_j|²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallMatrix {
    pub v: MatrixF,
    pub det_complement: f64,
}

/// `Beta` second parameters of the rows of a `D_q` sample with density
/// `∝ Δ(I - v*v)^ζ`: row `j` (1-based) gets `ζ + d(q-j)/2 + 1`.
pub fn ball_row_exponents(field: Field, q: usize, zeta: f64) -> Vec<f64> {
    let d = field.d() as f64;
    (1..=q).map(|j| zeta + d * (q - j) as f64 / 2.0 + 1.0).collect()
}

/// Draws `v ∈ D_q` with density `∝ Δ(I - v*v)^ζ`, `ζ > -1`.
pub fn sample_ball<R: Rng + ?Sized>(rng: &mut R, field: Field, q: usize, zeta: f64) -> Result<BallMatrix> {
    if !(zeta > -1.0) {
        return Err(Error::InvalidParameter(format!("ball exponent {zeta} must exceed -1")));
    }
    let mut rows = Vec::with_capacity(q);
    let mut det = 1.0;
    for b in ball_row_exponents(field, q, zeta) {
        let (y, r2) = ball_row(rng, field, q, b)?;
        det *= 1.0 - r2;
        rows.push(y);
    }
    Ok(BallMatrix { v: ball_product(&rows)?, det_complement: det })
}

/// The boundary sampler at `ζ = -1`: rows `1..q-1` as in [`sample_ball`]
/// with `ζ = -1`, the last row uniform on the unit sphere.
pub fn sample_ball_limit<R: Rng + ?Sized>(rng: &mut R, field: Field, q: usize) -> Result<BallMatrix> {
    let exps = ball_row_exponents(field, q, -1.0);
    let mut rows = Vec::with_capacity(q);
    for &b in &exps[..q - 1] {
        rows.push(ball_row(rng, field, q, b)?.0);
    }
    rows.push(sphere_row(rng, field, q));
    Ok(BallMatrix { v: ball_product(&rows)?, det_complement: 0.0 })
}

/// `r = T*T` with `T` upper triangular, `T_jj² ~ Gamma(μ - d(j-1)/2, 2)`
/// and standard Gaussian entries above the diagonal. For `μ = pd/2` this
/// is `x*x` with `x ∈ M_{p,q}(F)` standard Gaussian; in general `r` has
/// density `∝ Δ(r)^{μ - n/q} e^{-tr r / 2}` on `Ω_q`.
pub fn wishart<R: Rng + ?Sized>(rng: &mut R, field: Field, q: usize, mu: f64) -> Result<PsdMatrix> {
    let d = field.d() as f64;
    if !(mu > d * (q as f64 - 1.0) / 2.0) {
        return Err(Error::InvalidParameter(format!("Wishart shape {mu} must exceed d(q-1)/2")));
    }
    let mut t = MatrixF::zeros(field, q, q);
    for j in 0..q {
        let shape = mu - d * j as f64 / 2.0;
        let g = Gamma::new(shape, 2.0).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let x: f64 = g.sample(rng);
        t.set(j, j, Quaternion::real(x.sqrt()));
        for i in 0..j {
            t.set(i, j, gaussian_scalar(rng, field));
        }
    }
    let r = t.adjoint().matmul(&t);
    PsdMatrix::new(HermitianMatrix::symmetrize(&r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::cone_det;
    use crate::mc::{chunk_rng, estimate, McConfig, Method};

    fn fields() -> [Field; 3] {
        [Field::R, Field::C, Field::H]
    }

    #[test]
    fn stiefel_and_haar_are_isometries() {
        let mut rng = chunk_rng(1, 0);
        for f in fields() {
            let s = stiefel(&mut rng, f, 5, 3).unwrap();
            let g = s.adjoint().matmul(&s);
            assert!(g.max_abs_diff(&MatrixF::identity(f, 3)) < 1e-12, "{f}");
            let u = haar_unitary(&mut rng, f, 4).unwrap();
            assert!(u.matmul(&u.adjoint()).max_abs_diff(&MatrixF::identity(f, 4)) < 1e-12);
        }
    }

    #[test]
    fn ball_product_determinant() {
        let mut rng = chunk_rng(2, 0);
        for f in fields() {
            for q in 1..=4 {
                let b = sample_ball(&mut rng, f, q, 0.3).unwrap();
                let m = MatrixF::identity(f, q).sub(&b.v.adjoint().matmul(&b.v));
                let det = cone_det(&HermitianMatrix::symmetrize(&m)).unwrap();
                assert!((det - b.det_complement).abs() < 1e-12, "{f} q={q}: {det} vs {}", b.det_complement);
                let top = HermitianMatrix::symmetrize(&b.v.adjoint().matmul(&b.v)).spectrum().unwrap()[0];
                assert!(top < 1.0);
            }
        }
    }

    #[test]
    fn limit_rows_lie_on_the_boundary() {
        let mut rng = chunk_rng(3, 0);
        for f in fields() {
            let b = sample_ball_limit(&mut rng, f, 3).unwrap();
            let m = MatrixF::identity(f, 3).sub(&b.v.adjoint().matmul(&b.v));
            let det = cone_det(&HermitianMatrix::symmetrize(&m)).unwrap();
            assert!(det.abs() < 1e-12);
        }
    }

    #[test]
    fn wishart_mean() {
        // E[T*T] = diag(E T_jj² + Σ_{i<j} E|T_ij|²) = (2μ - d(j-1) + d(j-1)) = 2μ I.
        let cfg = McConfig::new(40_000, 5);
        for f in fields() {
            let mu = 3.3;
            let est = estimate(cfg, 3, Method::MonteCarlo, |rng, out| {
                let r = wishart(rng, f, 2, mu)?;
                let m = r.as_matrix();
                out[0] = m.get(0, 0).a;
                out[1] = m.get(1, 1).a;
                out[2] = m.get(0, 1).a;
                Ok(())
            })
            .unwrap();
            assert!(est[0].z_against(2.0 * mu) < 4.0, "{f}: {:?}", est[0]);
            assert!(est[1].z_against(2.0 * mu) < 4.0, "{f}: {:?}", est[1]);
            assert!(est[2].z_against(0.0) < 4.0);
        }
    }
}
