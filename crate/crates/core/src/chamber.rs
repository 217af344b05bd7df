//! The hypergroup on the Weyl chamber `Ξ_q = {ξ_1 >= … >= ξ_q >= 0}`
//! induced by the spectral projection `π: Π_q → Ξ_q`, its characters
//! `ψ_ξ` and the type-`B` Dunkl Bessel function.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{sqrt_clamped, Field, MatrixF, PsdMatrix};
use crate::bessel::{hyp0f1_two, SeriesParams, SeriesValue, SymmetricSeries};
use crate::cone_hypergroup::{Budget, ConeIndex, ConvolutionPair};
use crate::error::{Error, Result};
use crate::mc::{self, chunk_rng, ConvolutionEstimate, Method, CHUNK};
use crate::quad::exp_sinh;
use crate::sampling::{haar_unitary, sample_ball, sample_ball_limit, stiefel, wishart};
use crate::special::ln_gamma;

/// A point of the closed Weyl chamber of type `B_q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChamberPoint(Vec<f64>);

impl ChamberPoint {
    pub fn new(xi: Vec<f64>) -> Result<Self> {
        if xi.is_empty() {
            return Err(Error::Dimension("empty chamber point".into()));
        }
        if xi.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || xi.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(format!("{xi:?} is not in the chamber")));
        }
        Ok(ChamberPoint(xi))
    }

    /// The chamber representative of the `B_q`-orbit of `x`: absolute
    /// values sorted decreasingly.
    pub fn representative(x: &[f64]) -> Self {
        let mut v: Vec<f64> = x.iter().map(|a| a.abs()).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        ChamberPoint(v)
    }

    pub fn zero(q: usize) -> Self {
        ChamberPoint(vec![0.0; q])
    }

    pub fn xi(&self) -> &[f64] {
        &self.0
    }

    pub fn q(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// The diagonal matrix `diag(ξ)` over `field`.
    pub fn to_diag(&self, field: Field) -> PsdMatrix {
        PsdMatrix::diag(field, &self.0).expect("chamber points are nonnegative")
    }
}

/// `π(r)`: eigenvalues sorted decreasingly, rounding negatives clamped.
pub fn spectrum_project(r: &PsdMatrix) -> Result<ChamberPoint> {
    let mut s: Vec<f64> = r.spectrum()?.into_iter().map(|x| x.max(0.0)).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(ChamberPoint(s))
}

/// Haar-distributed `u ∈ U_q(F)`.
pub fn sample_uq_haar<R: rand::Rng + ?Sized>(rng: &mut R, field: Field, q: usize) -> Result<MatrixF> {
    haar_unitary(rng, field, q)
}

/// A real function on the chamber.
pub type ChamberFn<'a> = dyn Fn(&ChamberPoint) -> Result<f64> + Sync + 'a;

/// `(δ_ξ ∘_μ δ_η)(f) = ∫_{U_q} (f ∘ π)(ξ *_μ u η u⁻¹) du`, sampled jointly
/// over `(u, v)`. The inner convolution uses the ball formula with
/// antithetic `(v, v*)` for `μ > ϱ - 1`, the boundary sampler at
/// `μ = ϱ - 1`, and Haar frames of `M_{p,q}` for smaller `μ = pd/2`.
pub fn chamber_convolve(
    idx: &ConeIndex,
    xi: &ChamberPoint,
    eta: &ChamberPoint,
    fs: &[&ChamberFn],
    budget: &Budget,
) -> Result<Vec<ConvolutionEstimate>> {
    let (field, q) = (idx.field, idx.q);
    if xi.q() != q || eta.q() != q {
        return Err(Error::Dimension(format!("chamber points must have length {q}")));
    }
    if eta.xi().iter().all(|&x| x == 0.0) || xi.xi().iter().all(|&x| x == 0.0) {
        let other = if eta.xi().iter().all(|&x| x == 0.0) { xi } else { eta };
        return fs
            .iter()
            .map(|f| {
                Ok(ConvolutionEstimate { value: f(other)?, std_error: 0.0, n_samples: 0, method: Method::MonteCarlo, seed: Some(budget.seed) })
            })
            .collect();
    }
    let x = xi.to_diag(field);
    let y = eta.to_diag(field);
    let interior = idx.is_interior();
    let limit = idx.is_limit();
    let p = idx.orbit_p();
    let zeta = idx.mu - idx.rho();
    let method = if limit { Method::SphereLimit } else { Method::MonteCarlo };
    mc::estimate(budget.mc(), fs.len(), method, |rng, out| {
        let u = haar_unitary(rng, field, q)?;
        let yu = PsdMatrix::new(y.as_hermitian().congruence(&u))?;
        let pair = ConvolutionPair::new(&x, &yu)?;
        if interior {
            let b = sample_ball(rng, field, q, zeta)?;
            let (t1, t2) = pair.point_pair(&b.v)?;
            let (c1, c2) = (spectrum_project(&t1)?, spectrum_project(&t2)?);
            for (o, f) in out.iter_mut().zip(fs) {
                *o = 0.5 * (f(&c1)? + f(&c2)?);
            }
        } else {
            let v = if limit {
                sample_ball_limit(rng, field, q)?.v
            } else {
                let p = p.ok_or(Error::IndexNotAdmissible { mu: idx.mu })?;
                stiefel(rng, field, p, q)?.block(0, 0, q, q)
            };
            let c = spectrum_project(&pair.point(&v)?)?;
            for (o, f) in out.iter_mut().zip(fs) {
                *o = f(&c)?;
            }
        }
        Ok(())
    })
}

/// Translation `τ_η f(ξ) = (δ_ξ ∘_μ δ_η)(f)` of a `B_q`-invariant function,
/// evaluated on the chamber representatives of `ξ` and `η`.
pub fn translate_invariant(idx: &ConeIndex, f: &ChamberFn, xi: &[f64], eta: &[f64], budget: &Budget) -> Result<ConvolutionEstimate> {
    let (a, b) = (ChamberPoint::representative(xi), ChamberPoint::representative(eta));
    Ok(chamber_convolve(idx, &a, &b, &[f], budget)?[0])
}

/// Points of `δ_ξ ∘_μ δ_η`, with the sampling scheme of [`chamber_convolve`]
/// (one member of each antithetic pair).
pub fn sample_chamber_points(idx: &ConeIndex, xi: &ChamberPoint, eta: &ChamberPoint, n: u64, seed: u64) -> Result<Vec<ChamberPoint>> {
    let (field, q) = (idx.field, idx.q);
    let x = xi.to_diag(field);
    let y = eta.to_diag(field);
    let mut out = Vec::with_capacity(n as usize);
    for c in 0..n.div_ceil(CHUNK) {
        let mut rng = chunk_rng(seed, c);
        for _ in 0..CHUNK.min(n - c * CHUNK) {
            let u = haar_unitary(&mut rng, field, q)?;
            let yu = PsdMatrix::new(y.as_hermitian().congruence(&u))?;
            let pair = ConvolutionPair::new(&x, &yu)?;
            let v = if idx.is_interior() {
                sample_ball(&mut rng, field, q, idx.mu - idx.rho())?.v
            } else if idx.is_limit() {
                sample_ball_limit(&mut rng, field, q)?.v
            } else {
                let p = idx.orbit_p().ok_or(Error::IndexNotAdmissible { mu: idx.mu })?;
                stiefel(&mut rng, field, p, q)?.block(0, 0, q, q)
            };
            out.push(spectrum_project(&pair.point(&v)?)?);
        }
    }
    Ok(out)
}

/// `h_μ(ξ) = Π_i ξ_i^{2γ+1} Π_{i<j} (ξ_i² - ξ_j²)^d`.
pub fn chamber_haar_density(idx: &ConeIndex, xi: &ChamberPoint) -> f64 {
    let e = 2.0 * idx.gamma() + 1.0;
    let d = idx.d();
    let x = xi.xi();
    let mut h = 1.0;
    for (i, &a) in x.iter().enumerate() {
        h *= a.powf(e);
        for &b in &x[i + 1..] {
            h *= (a * a - b * b).powf(d);
        }
    }
    h
}

/// `n` draws from the probability measure `e^{-|ξ|²/2} dπ(ω_μ)(ξ)`, whose
/// density is `d_μ h_μ(ξ) e^{-|ξ|²/2}`. Since `e^{-tr t²/2} dω_μ(t)` is the
/// law of `√W` for a Wishart matrix `W` of shape `μ`, these are the
/// square roots of Wishart spectra.
pub fn sample_haar_pushforward(idx: &ConeIndex, n: u64, seed: u64) -> Result<Vec<ChamberPoint>> {
    let mut out = Vec::with_capacity(n as usize);
    for c in 0..n.div_ceil(CHUNK) {
        let mut rng = chunk_rng(seed, c);
        for _ in 0..CHUNK.min(n - c * CHUNK) {
            let w = wishart(&mut rng, idx.field, idx.q, idx.mu)?;
            out.push(spectrum_project(&sqrt_clamped(w.as_matrix())?)?);
        }
    }
    Ok(out)
}

/// `d_μ = (∫_{Ξ_q} h_μ(ξ) e^{-|ξ|²/2} dξ)⁻¹`.
///
/// For `q = 1` by quadrature. For `q >= 2` by Monte Carlo: with `x`
/// standard Gaussian in `R^q`, the chamber representative of `x` has
/// density `q! 2^q (2π)^{-q/2} e^{-|ξ|²/2}`, so the integral is
/// `(2π)^{q/2} E[h_μ] / (q! 2^q)`. The error is propagated to `d_μ`.
pub fn d_mu_normalization(idx: &ConeIndex, budget: &Budget) -> Result<ConvolutionEstimate> {
    let q = idx.q;
    if q == 1 {
        let e = 2.0 * idx.gamma() + 1.0;
        let r = exp_sinh(|x, _| (e * x.ln() - 0.5 * x * x).exp(), 0.0, crate::quad::QuadOptions::rel(budget.tol))?;
        return Ok(ConvolutionEstimate {
            value: 1.0 / r.value,
            std_error: r.error / (r.value * r.value),
            n_samples: r.evaluations as u64,
            method: Method::Quadrature,
            seed: None,
        });
    }
    let est = mc::estimate(budget.mc(), 1, Method::MonteCarlo, |rng, out| {
        let x: Vec<f64> = (0..q).map(|_| rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng)).collect();
        out[0] = chamber_haar_density(idx, &ChamberPoint::representative(&x));
        Ok(())
    })?[0];
    let ln_c = 0.5 * q as f64 * (2.0 * std::f64::consts::PI).ln() - ln_gamma(q as f64 + 1.0) - q as f64 * std::f64::consts::LN_2;
    let integral = est.value * ln_c.exp();
    let err = est.std_error * ln_c.exp();
    Ok(ConvolutionEstimate { value: 1.0 / integral, std_error: err / (integral * integral), ..est })
}

/// Multiplicity on the root system `B_q`: `k1` on `±e_i`, `k2` on `±e_i ± e_j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityB {
    pub k1: f64,
    pub k2: f64,
}

impl MultiplicityB {
    /// Within the range where the chamber hypergroup interpretation holds.
    pub fn is_nonnegative(&self) -> bool {
        self.k1 >= 0.0 && self.k2 > 0.0
    }
}

/// `k = (μ - (d/2)(q-1) - 1/2, d/2)`. A negative `k1` is returned as is;
/// callers needing the hypergroup interpretation check
/// [`MultiplicityB::is_nonnegative`].
pub fn multiplicity_from_mu(mu: f64, d: usize, q: usize) -> Result<MultiplicityB> {
    if !matches!(d, 1 | 2 | 4) || q == 0 || !mu.is_finite() {
        return Err(Error::InvalidParameter(format!("mu={mu}, d={d}, q={q}")));
    }
    let k2 = d as f64 / 2.0;
    Ok(MultiplicityB { k1: mu - k2 * (q as f64 - 1.0) - 0.5, k2 })
}

/// `(μ, α) = (k1 + (q-1) k2 + 1/2, 1/k2)`.
pub fn mu_from_multiplicity(k: MultiplicityB, q: usize) -> Result<(f64, f64)> {
    if !(k.k2 > 0.0) || !k.k1.is_finite() {
        return Err(Error::InvalidParameter(format!("multiplicity {k:?} needs k2 > 0")));
    }
    Ok((k.k1 + (q as f64 - 1.0) * k.k2 + 0.5, 1.0 / k.k2))
}

/// `J_k^B(z, w) = ₀F₁^α(μ; z²/2, w²/2)` with `(μ, α)` from `k`.
pub fn dunkl_bessel_b(k: MultiplicityB, z: &[Complex64], w: &[Complex64], params: SeriesParams) -> Result<SeriesValue<Complex64>> {
    if z.len() != w.len() {
        return Err(Error::Dimension("arguments of different length".into()));
    }
    let (mu, alpha) = mu_from_multiplicity(k, z.len())?;
    let half_sq = |v: &[Complex64]| v.iter().map(|x| 0.5 * x * x).collect::<Vec<_>>();
    hyp0f1_two(Complex64::new(mu, 0.0), alpha, &half_sq(z), &half_sq(w), params)
}

/// `w_k(x) = Π_i |x_i|^{2k1} Π_{i<j} |x_i² - x_j²|^{2k2}`.
pub fn dunkl_weight_b(k: MultiplicityB, x: &[f64]) -> f64 {
    let mut w = 1.0;
    for (i, &a) in x.iter().enumerate() {
        w *= a.abs().powf(2.0 * k.k1);
        for &b in &x[i + 1..] {
            w *= (a * a - b * b).abs().powf(2.0 * k.k2);
        }
    }
    w
}

/// `ψ_η(ξ) = J_μ(ξ²/2, η²/2)`, with `η` fixed and the series coefficients
/// cached. Uses `C_λ(iξ) C_λ(iη) = C_λ(-ξ) C_λ(η)`, so everything is real.
pub struct Character {
    series: SymmetricSeries,
    q: usize,
}

impl Character {
    pub fn new(idx: &ConeIndex, eta: &ChamberPoint, params: SeriesParams) -> Result<Self> {
        if eta.q() != idx.q {
            return Err(Error::Dimension(format!("chamber point must have length {}", idx.q)));
        }
        let half: Vec<Complex64> = eta.xi().iter().map(|x| Complex64::new(0.5 * x * x, 0.0)).collect();
        let series = SymmetricSeries::two_arg(Complex64::new(idx.mu, 0.0), idx.dims().alpha(), &half, params)?;
        Ok(Character { series, q: idx.q })
    }

    pub fn eval(&self, xi: &ChamberPoint) -> Result<SeriesValue<f64>> {
        if xi.q() != self.q {
            return Err(Error::Dimension(format!("chamber point must have length {}", self.q)));
        }
        let arg: Vec<f64> = xi.xi().iter().map(|x| -0.5 * x * x).collect();
        self.series.eval_real(&arg)
    }
}

/// `ψ_ξ(η) = J_μ(ξ²/2, η²/2)` from the two-argument series at `i ξ²/2`,
/// `i η²/2`.
pub fn character_psi(idx: &ConeIndex, xi: &ChamberPoint, eta: &ChamberPoint, params: SeriesParams) -> Result<SeriesValue<f64>> {
    let half = |c: &ChamberPoint| PsdMatrix::diag(idx.field, &c.xi().iter().map(|x| 0.5 * x * x).collect::<Vec<_>>());
    crate::bessel::bessel_cone_two(idx.mu, &half(xi)?, &half(eta)?, params)
}

/// Monte Carlo `∫_{U_q} J_μ(¼ ξ u η² u⁻¹ ξ) du`.
pub fn character_psi_mc(idx: &ConeIndex, xi: &ChamberPoint, eta: &ChamberPoint, budget: &Budget) -> Result<ConvolutionEstimate> {
    let bessel = crate::bessel::ConeBessel::new(idx.field, idx.q, idx.mu, SeriesParams::default())?;
    let (field, q) = (idx.field, idx.q);
    let x = xi.to_diag(field);
    let eta2: Vec<f64> = eta.xi().iter().map(|e| e * e).collect();
    let y2 = PsdMatrix::diag(field, &eta2)?;
    Ok(mc::estimate(budget.mc(), 1, Method::MonteCarlo, |rng, out| {
        let u = haar_unitary(rng, field, q)?;
        let m = y2.as_hermitian().congruence(&u).congruence(x.as_matrix()).scale(0.25);
        let spec: Vec<f64> = m.spectrum()?.iter().map(|l| l.max(0.0)).collect();
        out[0] = bessel.eval_spectrum(&spec)?.value;
        Ok(())
    })?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_examples() {
        let r = PsdMatrix::diag(Field::R, &[1.0, 2.0]).unwrap();
        assert_eq!(spectrum_project(&r).unwrap().xi(), &[2.0, 1.0]);
        let z = PsdMatrix::diag(Field::C, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(spectrum_project(&z).unwrap(), ChamberPoint::zero(3));
        assert!(ChamberPoint::new(vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn dictionary_roundtrip() {
        let k = multiplicity_from_mu(2.0, 1, 2).unwrap();
        assert_eq!(k, MultiplicityB { k1: 1.0, k2: 0.5 });
        for (mu, d, q) in [(2.0, 1, 2), (3.7, 2, 3), (9.0, 4, 2), (0.75, 1, 1)] {
            let k = multiplicity_from_mu(mu, d, q).unwrap();
            let (m, alpha) = mu_from_multiplicity(k, q).unwrap();
            assert!((m - mu).abs() < 1e-14);
            assert_eq!(alpha, 2.0 / d as f64);
        }
        assert_eq!(multiplicity_from_mu(0.75, 1, 1).unwrap().k1, 0.25);
        assert!(!multiplicity_from_mu(0.2, 1, 1).unwrap().is_nonnegative());
    }

    #[test]
    fn density_vanishes_on_walls() {
        let idx = ConeIndex::new(Field::C, 3, 5.0).unwrap();
        assert_eq!(chamber_haar_density(&idx, &ChamberPoint::new(vec![2.0, 1.0, 1.0]).unwrap()), 0.0);
        let idx = ConeIndex::new(Field::R, 1, 1.7).unwrap();
        let h = chamber_haar_density(&idx, &ChamberPoint::new(vec![1.3]).unwrap());
        assert!((h - 1.3f64.powf(2.4)).abs() < 1e-14);
    }

    #[test]
    fn d_mu_rank1_closed_form() {
        for mu in [0.5, 1.0, 2.3, 6.0] {
            let idx = ConeIndex::new(Field::R, 1, mu).unwrap();
            let d = d_mu_normalization(&idx, &Budget::default()).unwrap();
            let exact = 1.0 / (2f64.powf(mu - 1.0) * statrs::function::gamma::gamma(mu));
            assert!((d.value - exact).abs() < 1e-9 * exact, "mu={mu}: {} vs {exact}", d.value);
        }
    }

    #[test]
    fn character_rank1_is_classical() {
        let idx = ConeIndex::new(Field::R, 1, 1.8).unwrap();
        for (a, b) in [(0.3, 2.0), (1.5, 1.1), (3.0, 2.5)] {
            let (x, y) = (ChamberPoint::new(vec![a]).unwrap(), ChamberPoint::new(vec![b]).unwrap());
            let psi = character_psi(&idx, &x, &y, SeriesParams::default()).unwrap().value;
            let j = crate::bessel::bessel_rank1(0.8, a * b).unwrap();
            assert!((psi - j).abs() < 1e-12, "{psi} vs {j}");
            let cached = Character::new(&idx, &y, SeriesParams::default()).unwrap().eval(&x).unwrap().value;
            assert!((cached - j).abs() < 1e-12);
        }
    }
}
