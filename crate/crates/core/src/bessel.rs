//! Hypergeometric series `₀F₁^α` of one and two symmetric arguments and
//! the Bessel functions built from them.
//!
//! A series is summed layer by layer in the total weight `k = |λ|`. Since
//! the monomial coefficients of every `C_λ` are nonnegative and
//! `Σ_{|λ|=k} C_λ(|ξ|) = s^k` with `s = Σ |ξ_i|`, layer `k` is bounded by
//! `s^k / (k! min_{|λ|=k} |(μ)_λ|)`. Summation stops once this majorant is
//! below `tol · |partial sum|` for three consecutive layers; the reported
//! tail bound adds the majorants of the omitted layers.

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{ConeDims, Field, PsdMatrix};
use crate::error::{Error, Result};
use crate::jack::{pochhammer, JackContext, JackLayer, PowerTable};
use crate::partition::partitions;
use crate::scalar::Scalar;
use crate::special::{self, exp_tail, ln_gamma};

/// Truncation controls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesParams {
    pub tol: f64,
    pub max_weight: usize,
}

impl Default for SeriesParams {
    fn default() -> Self {
        SeriesParams { tol: 1e-12, max_weight: 40 }
    }
}

/// Result of a truncated series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue<T> {
    pub value: T,
    /// Largest weight included.
    pub weight: usize,
    /// Rigorous bound on the omitted layers (infinite when no bound is
    /// available for this index).
    pub tail_bound: f64,
    /// `ε · Σ |terms|`, an estimate of the rounding error.
    pub rounding: f64,
}

impl<T: Copy> SeriesValue<T> {
    fn map<U>(self, f: impl Fn(T) -> U) -> SeriesValue<U> {
        SeriesValue { value: f(self.value), weight: self.weight, tail_bound: self.tail_bound, rounding: self.rounding }
    }
}

/// `Σ_{k>K} s^k / k!` with `s = Σ |ξ_i|`; bounds the tail of `₀F₁(μ; ξ)`
/// whenever every `|(μ)_λ| >= 1`.
pub fn series_tail_bound(xi: &[Complex64], k: usize) -> f64 {
    let s: f64 = xi.iter().map(|z| z.norm()).sum();
    exp_tail(s, k)
}

/// Extra layers beyond the cap whose majorants are computed exactly.
const EXTRA_LAYERS: usize = 20;

struct PlanLayer {
    jack: Arc<JackLayer>,
    b: Vec<Complex64>,
    b_re: Option<Vec<f64>>,
}

/// `Σ_κ b_κ m_κ(ξ)` where `b_κ` collects every `C_λ` term of
/// `₀F₁^α(μ; ξ)` or of `₀F₁^α(μ; ξ, η)` with `η` fixed.
pub struct SymmetricSeries {
    jack: Arc<JackContext>,
    mu: Complex64,
    second: Option<Vec<Complex64>>,
    params: SeriesParams,
    layers: Vec<OnceLock<std::result::Result<Arc<PlanLayer>, Error>>>,
    ln_scale: Vec<f64>,
    beyond: f64,
    second_max: f64,
}

impl SymmetricSeries {
    /// `ξ ↦ ₀F₁^α(μ; ξ)` for `ξ` of length `q`.
    pub fn one_arg(mu: Complex64, alpha: f64, q: usize, params: SeriesParams) -> Result<Self> {
        Self::build(mu, alpha, q, None, params)
    }

    /// `ξ ↦ ₀F₁^α(μ; ξ, η)`.
    pub fn two_arg(mu: Complex64, alpha: f64, eta: &[Complex64], params: SeriesParams) -> Result<Self> {
        Self::build(mu, alpha, eta.len(), Some(eta.to_vec()), params)
    }

    fn build(
        mu: Complex64,
        alpha: f64,
        q: usize,
        second: Option<Vec<Complex64>>,
        params: SeriesParams,
    ) -> Result<Self> {
        if !(alpha > 0.0) || q == 0 {
            return Err(Error::InvalidParameter(format!("alpha = {alpha}, q = {q}")));
        }
        if !(params.tol > 0.0) {
            return Err(Error::InvalidParameter("series tolerance must be positive".into()));
        }
        let cap = params.max_weight;
        let ext = cap + EXTRA_LAYERS;
        let mut ln_scale = Vec::with_capacity(ext + 1);
        for k in 0..=ext {
            let mut min_ln = f64::INFINITY;
            for lam in partitions(q, k) {
                let p = pochhammer(mu, &lam, alpha).norm();
                min_ln = min_ln.min(p.ln());
            }
            ln_scale.push(-ln_gamma(k as f64 + 1.0) - min_ln);
        }
        // Π_j min(1, Re μ - (j-1)/α) bounds every |(μ)_λ| from below
        let mut c = 1.0_f64;
        for j in 0..q {
            let a = mu.re - j as f64 / alpha;
            c *= if a > 0.0 { a.min(1.0) } else { 0.0 };
        }
        let beyond = if c > 0.0 { 1.0 / c } else { f64::INFINITY };
        let second_max = second
            .as_ref()
            .map(|eta| eta.iter().fold(0.0_f64, |m, z| m.max(z.norm())))
            .unwrap_or(1.0);
        Ok(SymmetricSeries {
            jack: JackContext::get(alpha, q),
            mu,
            second,
            params,
            layers: (0..=cap).map(|_| OnceLock::new()).collect(),
            ln_scale,
            beyond,
            second_max,
        })
    }

    pub fn q(&self) -> usize {
        self.jack.q()
    }

    pub fn alpha(&self) -> f64 {
        self.jack.alpha()
    }

    pub fn mu(&self) -> Complex64 {
        self.mu
    }

    pub fn params(&self) -> SeriesParams {
        self.params
    }

    fn layer(&self, k: usize) -> Result<Arc<PlanLayer>> {
        self.layers[k].get_or_init(|| self.build_layer(k).map(Arc::new)).clone()
    }

    fn build_layer(&self, k: usize) -> Result<PlanLayer> {
        let jl = self.jack.layer(k);
        let alpha = self.alpha();
        let ln_fact = ln_gamma(k as f64 + 1.0);
        let fact = ln_fact.exp();
        let weights: Vec<Complex64> = match &self.second {
            None => vec![Complex64::new(1.0, 0.0); jl.partitions.len()],
            Some(eta) => {
                let pows = PowerTable::new(eta, k);
                let at_eta = jl.jack_values(&jl.monomial_values(&pows));
                let ones = vec![1.0; self.q()];
                let at_one = jl.jack_values(&jl.monomial_values(&PowerTable::new(&ones, k)));
                at_eta.iter().zip(&at_one).map(|(a, b)| a / *b).collect()
            }
        };
        let mut b = vec![Complex64::new(0.0, 0.0); jl.partitions.len()];
        for (li, lam) in jl.partitions.iter().enumerate() {
            let poch = pochhammer(self.mu, lam, alpha);
            if poch.norm() == 0.0 {
                return Err(Error::PochhammerZero);
            }
            let w = weights[li] / (poch * fact);
            for &(ki, c) in &jl.coeffs[li] {
                b[ki] += w * c;
            }
        }
        let b_re = if b.iter().all(|z| z.im == 0.0) { Some(b.iter().map(|z| z.re).collect()) } else { None };
        Ok(PlanLayer { jack: jl, b, b_re })
    }

    /// True when every coefficient is real, so real arguments give real
    /// values.
    pub fn has_real_coefficients(&self) -> bool {
        self.mu.im == 0.0 && self.second.as_ref().is_none_or(|eta| eta.iter().all(|z| z.im == 0.0))
    }

    pub fn eval_real(&self, x: &[f64]) -> Result<SeriesValue<f64>> {
        if !self.has_real_coefficients() {
            let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let v = self.eval_complex(&xc)?;
            return Ok(v.map(|z| z.re));
        }
        self.eval_generic(x, |l, i| l.b_re.as_ref().expect("real coefficients")[i])
    }

    pub fn eval_complex(&self, x: &[Complex64]) -> Result<SeriesValue<Complex64>> {
        self.eval_generic(x, |l, i| l.b[i])
    }

    fn eval_generic<T: Scalar>(
        &self,
        x: &[T],
        coeff: impl Fn(&PlanLayer, usize) -> T,
    ) -> Result<SeriesValue<T>> {
        if x.len() != self.q() {
            return Err(Error::Dimension(format!("{} arguments for q = {}", x.len(), self.q())));
        }
        let cap = self.params.max_weight;
        let s = x.iter().map(|v| v.modulus()).sum::<f64>() * self.second_max;
        let ln_s = s.ln();
        let pows = PowerTable::new(x, cap);
        let mut sum = T::from(0.0);
        let mut abs_sum = 0.0;
        let mut streak = 0;
        for k in 0..=cap {
            let layer = self.layer(k)?;
            let mono = layer.jack.monomial_values(&pows);
            let mut lk = T::from(0.0);
            for (i, &m) in mono.iter().enumerate() {
                let t = m * coeff(&layer, i);
                abs_sum += t.modulus();
                lk = lk + t;
            }
            sum = sum + lk;
            let maj = self.majorant(k, ln_s, s);
            if maj < self.params.tol * sum.modulus() {
                streak += 1;
                if streak >= 3 {
                    return Ok(SeriesValue {
                        value: sum,
                        weight: k,
                        tail_bound: self.tail_after(k, ln_s, s),
                        rounding: 4.0 * f64::EPSILON * abs_sum,
                    });
                }
            } else {
                streak = 0;
            }
        }
        Err(Error::SeriesCapExceeded { cap })
    }

    fn majorant(&self, k: usize, ln_s: f64, s: f64) -> f64 {
        if k == 0 {
            return self.ln_scale[0].exp();
        }
        if s == 0.0 {
            return 0.0;
        }
        (k as f64 * ln_s + self.ln_scale[k]).exp()
    }

    fn tail_after(&self, k: usize, ln_s: f64, s: f64) -> f64 {
        let ext = self.ln_scale.len() - 1;
        let mut t = 0.0;
        for j in k + 1..=ext {
            t += self.majorant(j, ln_s, s);
        }
        if s > 0.0 {
            t += self.beyond * exp_tail(s, ext);
        }
        t
    }
}

/// `₀F₁^α(μ; ξ)`.
pub fn hyp0f1_one(mu: Complex64, alpha: f64, xi: &[Complex64], params: SeriesParams) -> Result<SeriesValue<Complex64>> {
    SymmetricSeries::one_arg(mu, alpha, xi.len(), params)?.eval_complex(xi)
}

/// `₀F₁^α(μ; ξ, η) = Σ_λ C_λ(ξ) C_λ(η) / (C_λ(1) (μ)_λ |λ|!)`.
pub fn hyp0f1_two(
    mu: Complex64,
    alpha: f64,
    xi: &[Complex64],
    eta: &[Complex64],
    params: SeriesParams,
) -> Result<SeriesValue<Complex64>> {
    if xi.len() != eta.len() {
        return Err(Error::Dimension("arguments of different length".into()));
    }
    // put the larger argument in the monomial slot; the majorant uses
    // Σ|ξ| · max|η|
    let s1: f64 = xi.iter().map(|z| z.norm()).sum::<f64>() * eta.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    let s2: f64 = eta.iter().map(|z| z.norm()).sum::<f64>() * xi.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    let (a, b) = if s1 <= s2 { (xi, eta) } else { (eta, xi) };
    SymmetricSeries::two_arg(mu, alpha, b, params)?.eval_complex(a)
}

fn check_cone_index(dims: &ConeDims, mu: f64) -> Result<()> {
    // the series needs (μ)_λ ≠ 0, i.e. μ - (j-1) d/2 not a nonpositive integer
    if !mu.is_finite() {
        return Err(Error::InvalidParameter(format!("mu = {mu}")));
    }
    for j in 0..dims.q {
        let a = mu - j as f64 * dims.d() / 2.0;
        if a <= 0.0 && a == a.round() {
            return Err(Error::PochhammerZero);
        }
    }
    Ok(())
}

/// Cached evaluator of `J_μ(x) = ₀F₁^{2/d}(μ; -spec x)` for one cone.
pub struct ConeBessel {
    field: Field,
    series: SymmetricSeries,
}

impl ConeBessel {
    pub fn new(field: Field, q: usize, mu: f64, params: SeriesParams) -> Result<Self> {
        let dims = ConeDims::new(field, q)?;
        check_cone_index(&dims, mu)?;
        let series = SymmetricSeries::one_arg(Complex64::new(mu, 0.0), dims.alpha(), q, params)?;
        Ok(ConeBessel { field, series })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn mu(&self) -> f64 {
        self.series.mu().re
    }

    /// `J_μ` at a matrix with the given Jordan eigenvalues.
    pub fn eval_spectrum(&self, xi: &[f64]) -> Result<SeriesValue<f64>> {
        let neg: Vec<f64> = xi.iter().map(|&v| -v).collect();
        self.series.eval_real(&neg)
    }

    pub fn eval(&self, x: &PsdMatrix) -> Result<SeriesValue<f64>> {
        self.eval_spectrum(&x.spectrum()?)
    }
}

/// `J_μ(x) = ₀F₁^{2/d}(μ; -ξ)` with `ξ = spec x`.
pub fn bessel_cone(mu: f64, x: &PsdMatrix, params: SeriesParams) -> Result<SeriesValue<f64>> {
    ConeBessel::new(x.field(), x.q(), mu, params)?.eval(x)
}

/// `J_μ(x, y) = ₀F₁^{2/d}(μ; i spec x, i spec y)`. The value is real; the
/// imaginary part is checked against `1e-9 (1 + |value|)`.
pub fn bessel_cone_two(mu: f64, x: &PsdMatrix, y: &PsdMatrix, params: SeriesParams) -> Result<SeriesValue<f64>> {
    if x.field() != y.field() || x.q() != y.q() {
        return Err(Error::Dimension("arguments live on different cones".into()));
    }
    let dims = ConeDims::new(x.field(), x.q())?;
    check_cone_index(&dims, mu)?;
    let i = Complex64::new(0.0, 1.0);
    let xi: Vec<Complex64> = x.spectrum()?.iter().map(|&v| i * v).collect();
    let eta: Vec<Complex64> = y.spectrum()?.iter().map(|&v| i * v).collect();
    let v = hyp0f1_two(Complex64::new(mu, 0.0), dims.alpha(), &xi, &eta, params)?;
    real_part_checked(v)
}

pub(crate) fn real_part_checked(v: SeriesValue<Complex64>) -> Result<SeriesValue<f64>> {
    if v.value.im.abs() > 1e-9 * (1.0 + v.value.re.abs()) {
        return Err(Error::ImaginaryLeakage { im: v.value.im });
    }
    Ok(v.map(|z| z.re))
}

/// Normalized classical Bessel function
/// `j_α(z) = ₀F₁(α+1; -z²/4) = Γ(α+1) (2/z)^α J_α(z)`.
pub fn bessel_rank1(alpha: f64, z: f64) -> Result<f64> {
    special::bessel_j_normalized(alpha, z)
}

/// `j_α(z)` for complex order and argument, by its power series.
pub fn bessel_rank1_complex(alpha: Complex64, z: Complex64) -> Result<Complex64> {
    special::bessel_j_normalized_series(alpha, z)
}
