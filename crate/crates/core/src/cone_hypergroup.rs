//! The Bessel convolutions `*_μ` on the cone `Π_q`.
//!
//! For `μ > ϱ - 1` the product of point measures is
//! `(δ_r *_μ δ_s)(f) = κ_μ⁻¹ ∫_{D_q} f(sqrt(r² + s² + r v s + s v* r)) Δ(I - v*v)^{μ-ϱ} dv`.
//! For `μ = p d / 2` the same formula with `v` the top `q x q` block of a
//! Haar-random frame in `M_{p,q}` gives the orbit convolution, and at
//! `μ = ϱ - 1` the last ball row moves to the sphere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{ln_gamma_omega, sqrt_clamped, ConeDims, Field, HermitianMatrix, MatrixF, PsdMatrix};
use crate::bessel::{ConeBessel, SeriesParams};
use crate::error::{Error, Result};
use crate::mc::{self, chunk_rng, ComplexEstimate, ConvolutionEstimate, McConfig, Method, CHUNK};
use crate::quad::{exp_sinh, tanh_sinh, QuadOptions};
use crate::sampling::{sample_ball, sample_ball_limit, stiefel, wishart};
use crate::special::ln_gamma;
use crate::transforms::{Decay, RadialFunction};

/// A real function on `Π_q` that may fail (series evaluation, spectra).
pub type ConeFn<'a> = dyn Fn(&PsdMatrix) -> Result<f64> + Sync + 'a;

/// An admissible index `μ ∈ {pd/2 : p >= q} ∪ (ϱ - 1, ∞)` on `Π_q(F)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeIndex {
    pub field: Field,
    pub q: usize,
    pub mu: f64,
}

impl ConeIndex {
    pub fn new(field: Field, q: usize, mu: f64) -> Result<Self> {
        let dims = ConeDims::new(field, q)?;
        if !dims.is_admissible(mu) {
            return Err(Error::IndexNotAdmissible { mu });
        }
        Ok(ConeIndex { field, q, mu })
    }

    pub fn dims(&self) -> ConeDims {
        ConeDims { field: self.field, q: self.q }
    }

    pub fn d(&self) -> f64 {
        self.field.d() as f64
    }

    pub fn rho(&self) -> f64 {
        self.dims().rho()
    }

    /// `γ = μ - d(q-1)/2 - 1`.
    pub fn gamma(&self) -> f64 {
        self.dims().gamma_exponent(self.mu)
    }

    /// `μ > ϱ - 1`: the ball formula applies.
    pub fn is_interior(&self) -> bool {
        self.mu > self.rho() - 1.0
    }

    /// `p` with `μ = pd/2`, if any.
    pub fn orbit_p(&self) -> Option<usize> {
        self.dims().orbit_dimension(self.mu)
    }

    /// Is `μ = ϱ - 1`?
    pub fn is_limit(&self) -> bool {
        (self.mu - (self.rho() - 1.0)).abs() < 1e-12
    }

    pub fn kappa(&self) -> Result<f64> {
        kappa_mu(self.field, self.q, self.mu)
    }

    fn check_matrix(&self, x: &PsdMatrix) -> Result<()> {
        if x.field() != self.field || x.q() != self.q {
            return Err(Error::Dimension(format!(
                "expected a {}x{} matrix over {}, got {}x{} over {}",
                self.q,
                self.q,
                self.field,
                x.q(),
                x.q(),
                x.field()
            )));
        }
        Ok(())
    }
}

/// `ln κ_μ` with `κ_μ = π^{dq²/2} Γ_Ω(μ - dq/2) / Γ_Ω(μ)`.
pub fn ln_kappa_mu(field: Field, q: usize, mu: f64) -> Result<f64> {
    let dims = ConeDims::new(field, q)?;
    if !(mu > dims.rho() - 1.0) {
        return Err(Error::IndexNotAdmissible { mu });
    }
    let d = field.d();
    let (a, _) = ln_gamma_omega(d, q, mu - (d * q) as f64 / 2.0)?;
    let (b, _) = ln_gamma_omega(d, q, mu)?;
    Ok((d * q * q) as f64 / 2.0 * std::f64::consts::PI.ln() + a - b)
}

/// `κ_μ = ∫_{D_q} Δ(I - v*v)^{μ-ϱ} dv` for `μ > ϱ - 1`.
pub fn kappa_mu(field: Field, q: usize, mu: f64) -> Result<f64> {
    Ok(ln_kappa_mu(field, q, mu)?.exp())
}

/// Sample budget, seed and quadrature tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub samples: u64,
    pub seed: u64,
    pub tol: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { samples: 100_000, seed: 0, tol: 1e-10 }
    }
}

impl Budget {
    pub fn new(samples: u64, seed: u64) -> Self {
        Budget { samples, seed, ..Default::default() }
    }

    pub fn with_tol(self, tol: f64) -> Self {
        Budget { tol, ..self }
    }

    pub fn mc(&self) -> McConfig {
        McConfig::new(self.samples, self.seed)
    }

    fn quad(&self) -> QuadOptions {
        QuadOptions::rel(self.tol)
    }
}

/// Which integral representation evaluates a convolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Ball formula when `μ > ϱ - 1`, otherwise the orbit formula.
    Auto,
    /// Ball formula; quadrature for `q = 1`, Monte Carlo otherwise.
    Interior,
    /// Orbit formula over Haar frames in `M_{p,q}`.
    Orbit(usize),
    /// Boundary formula at `μ = ϱ - 1`.
    Limit,
}

impl Route {
    /// Replaces [`Route::Auto`] by the representation it selects for `idx`.
    pub fn resolve(self, idx: &ConeIndex) -> Result<Route> {
        match self {
            Route::Auto if idx.is_interior() => Ok(Route::Interior),
            Route::Auto => Ok(Route::Orbit(idx.orbit_p().ok_or(Error::IndexNotAdmissible { mu: idx.mu })?)),
            other => Ok(other),
        }
    }
}

/// `r`, `s` and the fixed part `r² + s²` of the convolution argument.
#[derive(Clone, Debug)]
pub struct ConvolutionPair {
    r: MatrixF,
    s: MatrixF,
    base: MatrixF,
}

impl ConvolutionPair {
    pub fn new(r: &PsdMatrix, s: &PsdMatrix) -> Result<Self> {
        if r.field() != s.field() || r.q() != s.q() {
            return Err(Error::Dimension("convolution arguments live on different cones".into()));
        }
        let (r, s) = (r.as_matrix().clone(), s.as_matrix().clone());
        let base = r.matmul(&r).add(&s.matmul(&s));
        Ok(ConvolutionPair { r, s, base })
    }

    fn argument(&self, x: &MatrixF) -> MatrixF {
        self.base.add(x).add(&x.adjoint())
    }

    /// `sqrt(r² + s² + r v s + s v* r)`.
    pub fn point(&self, v: &MatrixF) -> Result<PsdMatrix> {
        let x = self.r.matmul(v).matmul(&self.s);
        sqrt_clamped(&self.argument(&x))
    }

    /// The points for `v` and for `v*`.
    pub fn point_pair(&self, v: &MatrixF) -> Result<(PsdMatrix, PsdMatrix)> {
        let rv = self.r.matmul(v);
        let x = rv.matmul(&self.s);
        let y = self.r.matmul(&v.adjoint()).matmul(&self.s);
        Ok((sqrt_clamped(&self.argument(&x))?, sqrt_clamped(&self.argument(&y))?))
    }
}

fn is_zero(x: &PsdMatrix) -> bool {
    x.as_matrix().data().iter().all(|e| e.norm_sqr() == 0.0)
}

/// Point-mass shortcut: `δ_r * δ_0 = δ_0 * δ_r = δ_r`.
fn neutral(r: &PsdMatrix, s: &PsdMatrix, fs: &[&ConeFn], method: Method, seed: Option<u64>) -> Result<Option<Vec<ConvolutionEstimate>>> {
    let other = if is_zero(s) {
        r
    } else if is_zero(r) {
        s
    } else {
        return Ok(None);
    };
    let vals: Result<Vec<_>> = fs
        .iter()
        .map(|f| Ok(ConvolutionEstimate { value: f(other)?, std_error: 0.0, n_samples: 0, method, seed }))
        .collect();
    vals.map(Some)
}

/// `(δ_r *_μ δ_s)(f)` for several functionals at once, sharing samples.
pub fn convolve(
    idx: &ConeIndex,
    r: &PsdMatrix,
    s: &PsdMatrix,
    fs: &[&ConeFn],
    route: Route,
    budget: &Budget,
) -> Result<Vec<ConvolutionEstimate>> {
    idx.check_matrix(r)?;
    idx.check_matrix(s)?;
    let route = route.resolve(idx)?;
    match route {
        Route::Interior => {
            if !idx.is_interior() {
                return Err(Error::IndexNotAdmissible { mu: idx.mu });
            }
            if idx.q == 1 {
                let (a, b) = (r.as_matrix().get(0, 0).a, s.as_matrix().get(0, 0).a);
                fs.iter().map(|f| convolve_rank1(idx, a, b, *f, budget)).collect()
            } else {
                convolve_ball(idx, r, s, fs, budget)
            }
        }
        Route::Orbit(p) => {
            if idx.orbit_p() != Some(p) {
                return Err(Error::InvalidParameter(format!("orbit dimension p={p} does not match mu={}", idx.mu)));
            }
            orbit_convolve(p, r, s, fs, budget)
        }
        Route::Limit => {
            if !idx.is_limit() {
                return Err(Error::InvalidParameter(format!("limit route needs mu = {}", idx.rho() - 1.0)));
            }
            limit_convolve(r, s, fs, budget)
        }
        Route::Auto => unreachable!(),
    }
}

/// `(δ_r *_μ δ_s)(f)` by the ball formula: quadrature for `q = 1`,
/// antithetic Monte Carlo over `(v, v*)` for `q >= 2`.
pub fn convolve_point(idx: &ConeIndex, r: &PsdMatrix, s: &PsdMatrix, f: &ConeFn, budget: &Budget) -> Result<ConvolutionEstimate> {
    Ok(convolve(idx, r, s, &[f], Route::Interior, budget)?[0])
}

/// Rank one: with `x = Re v`, whose law has density `∝ (1 - x²)^{μ-3/2}`
/// on `(-1, 1)` for every `d`,
/// `(δ_a * δ_b)(f) = ∫ f(sqrt(a² + b² + 2abx)) (1 - x²)^{μ-3/2} dx / ∫ (1 - x²)^{μ-3/2} dx`.
fn convolve_rank1(idx: &ConeIndex, a: f64, b: f64, f: &ConeFn, budget: &Budget) -> Result<ConvolutionEstimate> {
    let field = idx.field;
    if a == 0.0 || b == 0.0 {
        let v = f(&PsdMatrix::diag(field, &[a + b])?)?;
        return Ok(ConvolutionEstimate { value: v, std_error: 0.0, n_samples: 1, method: Method::Quadrature, seed: None });
    }
    let e = idx.mu - 1.5;
    let diff2 = (a - b) * (a - b);
    let mut failure = None;
    let num = tanh_sinh(
        |_, da, db| {
            // a² + b² + 2abx = (a - b)² + 2ab(1 + x)
            let t = (diff2 + 2.0 * a * b * da).sqrt();
            let w = (da * db).powf(e);
            match PsdMatrix::diag(field, &[t]).and_then(|m| f(&m)) {
                Ok(v) => v * w,
                Err(err) => {
                    failure.get_or_insert(err);
                    0.0
                }
            }
        },
        -1.0,
        1.0,
        budget.quad(),
    );
    if let Some(err) = failure {
        return Err(err);
    }
    let num = num?;
    let den = tanh_sinh(|_, da, db| (da * db).powf(e), -1.0, 1.0, budget.quad())?;
    Ok(ConvolutionEstimate {
        value: num.value / den.value,
        std_error: num.error / den.value + (num.value / den.value).abs() * den.error / den.value,
        n_samples: num.evaluations as u64,
        method: Method::Quadrature,
        seed: None,
    })
}

fn convolve_ball(idx: &ConeIndex, r: &PsdMatrix, s: &PsdMatrix, fs: &[&ConeFn], budget: &Budget) -> Result<Vec<ConvolutionEstimate>> {
    if let Some(v) = neutral(r, s, fs, Method::MonteCarlo, Some(budget.seed))? {
        return Ok(v);
    }
    let pair = ConvolutionPair::new(r, s)?;
    let (field, q, zeta) = (idx.field, idx.q, idx.mu - idx.rho());
    mc::estimate(budget.mc(), fs.len(), Method::MonteCarlo, |rng, out| {
        let b = sample_ball(rng, field, q, zeta)?;
        let (t1, t2) = pair.point_pair(&b.v)?;
        for (o, f) in out.iter_mut().zip(fs) {
            *o = 0.5 * (f(&t1)? + f(&t2)?);
        }
        Ok(())
    })
}

/// The orbit convolution of `M_{p,q}`: `v` is the top `q x q` block of a
/// Haar-random `σ ∈ M_{p,q}` with `σ*σ = I`. Equals `*_μ` at `μ = pd/2`.
pub fn orbit_convolve(p: usize, r: &PsdMatrix, s: &PsdMatrix, fs: &[&ConeFn], budget: &Budget) -> Result<Vec<ConvolutionEstimate>> {
    let (field, q) = (r.field(), r.q());
    if p < q {
        return Err(Error::InvalidParameter(format!("orbit convolution needs p >= q, got p={p}, q={q}")));
    }
    let pair = ConvolutionPair::new(r, s)?;
    if let Some(v) = neutral(r, s, fs, Method::MonteCarlo, Some(budget.seed))? {
        return Ok(v);
    }
    mc::estimate(budget.mc(), fs.len(), Method::MonteCarlo, |rng, out| {
        let sigma = stiefel(rng, field, p, q)?;
        let t = pair.point(&sigma.block(0, 0, q, q))?;
        for (o, f) in out.iter_mut().zip(fs) {
            *o = f(&t)?;
        }
        Ok(())
    })
}

/// The weak limit of `*_μ` as `μ ↓ ϱ - 1`: rows `1..q-1` of `v = P(y)`
/// carry the ball weights at `μ = ϱ - 1`, the last row is uniform on the
/// unit sphere. Normalized as a probability measure.
pub fn limit_convolve(r: &PsdMatrix, s: &PsdMatrix, fs: &[&ConeFn], budget: &Budget) -> Result<Vec<ConvolutionEstimate>> {
    let (field, q) = (r.field(), r.q());
    let pair = ConvolutionPair::new(r, s)?;
    if let Some(v) = neutral(r, s, fs, Method::SphereLimit, Some(budget.seed))? {
        return Ok(v);
    }
    mc::estimate(budget.mc(), fs.len(), Method::SphereLimit, |rng, out| {
        let b = sample_ball_limit(rng, field, q)?;
        let t = pair.point(&b.v)?;
        for (o, f) in out.iter_mut().zip(fs) {
            *o = f(&t)?;
        }
        Ok(())
    })
}

/// `n` points of the convolution `δ_r * δ_s`, drawn with the chunked
/// streams of [`mc`]. The ball route returns the `v` member of each
/// antithetic pair.
pub fn sample_points(idx: &ConeIndex, r: &PsdMatrix, s: &PsdMatrix, route: Route, n: u64, seed: u64) -> Result<Vec<PsdMatrix>> {
    idx.check_matrix(r)?;
    idx.check_matrix(s)?;
    let pair = ConvolutionPair::new(r, s)?;
    let (field, q) = (idx.field, idx.q);
    let route = route.resolve(idx)?;
    let mut out = Vec::with_capacity(n as usize);
    for c in 0..n.div_ceil(CHUNK) {
        let mut rng = chunk_rng(seed, c);
        for _ in 0..CHUNK.min(n - c * CHUNK) {
            let v = match route {
                Route::Interior => {
                    if !idx.is_interior() {
                        return Err(Error::IndexNotAdmissible { mu: idx.mu });
                    }
                    sample_ball(&mut rng, field, q, idx.mu - idx.rho())?.v
                }
                Route::Orbit(p) => stiefel(&mut rng, field, p, q)?.block(0, 0, q, q),
                Route::Limit => sample_ball_limit(&mut rng, field, q)?.v,
                Route::Auto => unreachable!(),
            };
            out.push(pair.point(&v)?);
        }
    }
    Ok(out)
}

/// The Haar measure `ω_μ(f) = 2^{-qμ}/Γ_Ω(μ) ∫_{Ω_q} f(√r) Δ(r)^γ dr`.
///
/// For `q = 1` this is `2^{1-μ}/Γ(μ) ∫_0^∞ f(ξ) ξ^{2μ-1} dξ` by quadrature.
/// For `q >= 2` it is importance sampled: with `W` Wishart of shape `μ`
/// (density `∝ Δ^γ e^{-tr W/2}`) and a scale `c > 0`,
/// `ω_μ(f) = c^{2qμ} E[f(c √W) e^{tr W/2}]`. The scale is matched to the
/// decay class: `c² = 1/(2 rate)` for Gaussian decay, `c² = R²/(4qμ)` for
/// support radius `R`.
pub fn haar_integral(idx: &ConeIndex, f: &RadialFunction, budget: &Budget) -> Result<ConvolutionEstimate> {
    if idx.q == 1 {
        let mu = idx.mu;
        let field = idx.field;
        let pref = ((1.0 - mu) * std::f64::consts::LN_2 - ln_gamma(mu)).exp();
        return rank1_radial_integral(f.decay(), 2.0 * mu - 1.0, budget, |xi| f.eval_rank1(field, xi))
            .map(|r| ConvolutionEstimate { value: pref * r.value, std_error: pref * r.std_error, ..r });
    }
    let c = proposal_scale(idx, f.decay())?;
    let (field, q, mu) = (idx.field, idx.q, idx.mu);
    let log_c = (2.0 * q as f64 * mu) * c.ln();
    Ok(mc::estimate(budget.mc(), 1, Method::MonteCarlo, |rng, out| {
        let w = wishart(rng, field, q, mu)?;
        let t = PsdMatrix::new(sqrt_clamped(w.as_matrix())?.as_hermitian().scale(c))?;
        out[0] = f.eval(&t)? * (0.5 * w.as_hermitian().trace() + log_c).exp();
        Ok(())
    })?[0])
}

/// Scale `c` of the proposal `c √W`, `W` Wishart; the importance weight
/// needs Gaussian or faster decay to have finite variance.
fn proposal_scale(idx: &ConeIndex, decay: Decay) -> Result<f64> {
    match decay {
        Decay::Gaussian { rate } => Ok((0.5 / rate).sqrt()),
        Decay::Compact { radius } => Ok(radius / (4.0 * idx.q as f64 * idx.mu).sqrt()),
        Decay::Exponential { .. } => Err(Error::DecayInsufficient(
            "Monte Carlo Haar integrals need Gaussian decay or compact support".into(),
        )),
    }
}

/// `∫_0^∞ g(ξ) ξ^β dξ` over the support selected by the decay class.
fn rank1_radial_integral<G>(decay: Decay, beta: f64, budget: &Budget, g: G) -> Result<ConvolutionEstimate>
where
    G: Fn(f64) -> Result<f64>,
{
    let mut failure = None;
    let mut h = |xi: f64, dist0: f64| -> f64 {
        match g(xi) {
            Ok(v) if v == 0.0 => 0.0,
            Ok(v) => v * dist0.powf(beta),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let res = match decay {
        Decay::Compact { radius } => tanh_sinh(|x, da, _| h(x, da), 0.0, radius, budget.quad()),
        Decay::Gaussian { .. } | Decay::Exponential { .. } => exp_sinh(&mut h, 0.0, budget.quad()),
    };
    if let Some(e) = failure {
        return Err(e);
    }
    let res = res?;
    Ok(ConvolutionEstimate {
        value: res.value,
        std_error: res.error,
        n_samples: res.evaluations as u64,
        method: Method::Quadrature,
        seed: None,
    })
}

/// `ω_μ(x ↦ (δ_s *_μ δ_x)(f))`, which equals `ω_μ(f)` by translation
/// invariance of the Haar measure. Nested quadrature for `q = 1`, joint
/// Wishart and ball sampling for `q >= 2`.
pub fn translated_haar_integral(idx: &ConeIndex, f: &RadialFunction, s: &PsdMatrix, budget: &Budget) -> Result<ConvolutionEstimate> {
    idx.check_matrix(s)?;
    if !idx.is_interior() {
        return Err(Error::IndexNotAdmissible { mu: idx.mu });
    }
    let field = idx.field;
    if idx.q == 1 {
        let mu = idx.mu;
        let sv = s.as_matrix().get(0, 0).a;
        let pref = ((1.0 - mu) * std::f64::consts::LN_2 - ln_gamma(mu)).exp();
        let decay = match f.decay() {
            Decay::Compact { radius } => Decay::Compact { radius: radius + sv },
            g => g,
        };
        let inner_budget = budget.with_tol(budget.tol * 1e-2);
        return rank1_radial_integral(decay, 2.0 * mu - 1.0, budget, |xi| {
            Ok(convolve_rank1(idx, sv, xi, f.as_fn(), &inner_budget)?.value)
        })
        .map(|r| ConvolutionEstimate { value: pref * r.value, std_error: pref * r.std_error, ..r });
    }
    let (q, mu, zeta) = (idx.q, idx.mu, idx.mu - idx.rho());
    let c = proposal_scale(idx, f.decay())?;
    let log_c = (2.0 * q as f64 * mu) * c.ln();
    Ok(mc::estimate(budget.mc(), 1, Method::MonteCarlo, |rng, out| {
        let w = wishart(rng, field, q, mu)?;
        let x = PsdMatrix::new(sqrt_clamped(w.as_matrix())?.as_hermitian().scale(c))?;
        let pair = ConvolutionPair::new(s, &x)?;
        let b = sample_ball(rng, field, q, zeta)?;
        let (t1, t2) = pair.point_pair(&b.v)?;
        let fv = 0.5 * (f.eval(&t1)? + f.eval(&t2)?);
        out[0] = fv * (0.5 * w.as_hermitian().trace() + log_c).exp();
        Ok(())
    })?[0])
}

/// Monte Carlo value of `κ_μ⁻¹ ∫_{D_q} e^{-2i(v|x)} Δ(I - v*v)^{μ-ϱ} dv`
/// with `(v|x) = Re tr(v* x)`; its real part is `J_μ(x*x)`.
pub fn bochner_eval(idx: &ConeIndex, x: &MatrixF, budget: &Budget) -> Result<ComplexEstimate> {
    if x.field() != idx.field || x.rows() != idx.q || x.cols() != idx.q {
        return Err(Error::Dimension(format!("expected a {0}x{0} matrix over {1}", idx.q, idx.field)));
    }
    if !idx.is_interior() {
        return Err(Error::IndexNotAdmissible { mu: idx.mu });
    }
    let (field, q, zeta) = (idx.field, idx.q, idx.mu - idx.rho());
    let est = mc::estimate(budget.mc(), 2, Method::MonteCarlo, |rng, out| {
        let b = sample_ball(rng, field, q, zeta)?;
        let phase = 2.0 * b.v.inner(x);
        out[0] = phase.cos();
        out[1] = -phase.sin();
        Ok(())
    })?;
    Ok(ComplexEstimate {
        value: num_complex::Complex64::new(est[0].value, est[1].value),
        std_error_re: est[0].std_error,
        std_error_im: est[1].std_error,
        n_samples: est[0].n_samples,
        method: Method::MonteCarlo,
        seed: Some(budget.seed),
    })
}

/// `t ↦ J_μ(t²)`.
pub fn bessel_of_square(bessel: &ConeBessel) -> impl Fn(&PsdMatrix) -> Result<f64> + Sync + '_ {
    move |t: &PsdMatrix| {
        let sq: Vec<f64> = t.spectrum()?.iter().map(|l| l * l).collect();
        Ok(bessel.eval_spectrum(&sq)?.value)
    }
}

/// The character `φ_s(r) = J_μ(¼ s r² s)`.
pub fn character_phi<'a>(bessel: &'a ConeBessel, s: &PsdMatrix) -> impl Fn(&PsdMatrix) -> Result<f64> + Sync + 'a {
    let s = s.as_matrix().clone();
    move |r: &PsdMatrix| {
        let rs = r.as_matrix().matmul(&s);
        let m = HermitianMatrix::symmetrize(&rs.adjoint().matmul(&rs));
        let spec: Vec<f64> = m.spectrum()?.iter().map(|l| 0.25 * l.max(0.0)).collect();
        Ok(bessel.eval_spectrum(&spec)?.value)
    }
}

/// `|J_μ(r²) J_μ(s²) - (δ_r *_μ δ_s)(t ↦ J_μ(t²))|` with its error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductResidual {
    pub residual: f64,
    /// Convolution error plus the series truncation bounds.
    pub std_error: f64,
    pub product: f64,
    pub estimate: ConvolutionEstimate,
}

impl ProductResidual {
    /// Residual in units of `std_error`.
    pub fn z(&self) -> f64 {
        if self.residual == 0.0 {
            0.0
        } else {
            self.residual / self.std_error
        }
    }
}

pub fn product_formula_residual(
    idx: &ConeIndex,
    r: &PsdMatrix,
    s: &PsdMatrix,
    route: Route,
    budget: &Budget,
) -> Result<ProductResidual> {
    let bessel = ConeBessel::new(idx.field, idx.q, idx.mu, SeriesParams::default())?;
    let sq = |x: &PsdMatrix| -> Result<Vec<f64>> { Ok(x.spectrum()?.iter().map(|l| l * l).collect()) };
    let jr = bessel.eval_spectrum(&sq(r)?)?;
    let js = bessel.eval_spectrum(&sq(s)?)?;
    let f = bessel_of_square(&bessel);
    let est = convolve(idx, r, s, &[&f], route, budget)?[0];
    let product = jr.value * js.value;
    let series_err = jr.tail_bound * js.value.abs() + js.tail_bound * jr.value.abs() + 2.0 * SeriesParams::default().tol;
    Ok(ProductResidual {
        residual: (product - est.value).abs(),
        std_error: est.std_error + series_err,
        product,
        estimate: est,
    })
}

/// A deterministic generator for callers that draw single matrices.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::tanh_sinh;
    use statrs::function::beta::beta;

    #[test]
    fn kappa_closed_forms() {
        assert!((kappa_mu(Field::R, 1, 1.0).unwrap() - std::f64::consts::PI).abs() < 1e-13);
        assert!((kappa_mu(Field::R, 1, 1.5).unwrap() - 2.0).abs() < 1e-13);
        // q=1, d=2: ∫_{|v|<1} (1-|v|²)^{μ-2} dv = π/(μ-1)
        assert!((kappa_mu(Field::C, 1, 2.5).unwrap() - std::f64::consts::PI / 1.5).abs() < 1e-13);
        assert!(kappa_mu(Field::R, 2, 1.5).is_err());
    }

    #[test]
    fn kappa_asymptotics() {
        let pi = std::f64::consts::PI;
        for f in [Field::R, Field::C, Field::H] {
            for q in 1..=3 {
                let ratio = |mu: f64| kappa_mu(f, q, mu).unwrap() / (pi / mu).powf((f.d() * q * q) as f64 / 2.0);
                let (a, b) = (ratio(1e3), ratio(1e4));
                assert!((b - 1.0).abs() < 0.12 * (a - 1.0).abs() + 1e-12, "{f} q={q}: {a} {b}");
                if q <= 2 {
                    assert!((a - 1.0).abs() < 0.05 && (b - 1.0).abs() < 0.05, "{f} q={q}: {a} {b}");
                }
            }
        }
    }

    #[test]
    fn rank1_quadrature_total_mass_is_one() {
        let idx = ConeIndex::new(Field::R, 1, 0.8).unwrap();
        let one = |_: &PsdMatrix| Ok(1.0);
        let r = PsdMatrix::diag(Field::R, &[0.7]).unwrap();
        let s = PsdMatrix::diag(Field::R, &[1.3]).unwrap();
        let e = convolve_point(&idx, &r, &s, &one, &Budget::default()).unwrap();
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn rank1_matches_angular_form() {
        // μ = p/2, d = 1: c_p ∫_0^π f(sqrt(r² + s² - 2rs cos θ)) sin^{p-2} θ dθ
        let idx = ConeIndex::new(Field::R, 1, 2.5).unwrap();
        let f = |t: &PsdMatrix| Ok((-t.as_matrix().get(0, 0).a).exp() * (1.0 + t.as_matrix().get(0, 0).a));
        let (a, b) = (0.6, 1.7);
        let r = PsdMatrix::diag(Field::R, &[a]).unwrap();
        let s = PsdMatrix::diag(Field::R, &[b]).unwrap();
        let got = convolve_point(&idx, &r, &s, &f, &Budget::default()).unwrap();
        let g = |th: f64| {
            let t = (a * a + b * b - 2.0 * a * b * th.cos()).sqrt();
            (-t).exp() * (1.0 + t) * th.sin().powi(3)
        };
        let num = tanh_sinh(|th, _, _| g(th), 0.0, std::f64::consts::PI, QuadOptions::default()).unwrap();
        let cp = 1.0 / beta(0.5, 2.0);
        assert!((got.value - cp * num.value).abs() < 1e-11, "{} vs {}", got.value, cp * num.value);
    }

    #[test]
    fn ball_moments_match_kappa_ratio() {
        // E Δ(I - v*v) = κ_{μ+1}/κ_μ
        for (f, q, mu) in [(Field::R, 1, 1.2), (Field::R, 2, 2.3), (Field::C, 2, 3.7)] {
            let idx = ConeIndex::new(f, q, mu).unwrap();
            let zeta = mu - idx.rho();
            let est = mc::estimate(McConfig::new(60_000, 3), 1, Method::MonteCarlo, |rng, out| {
                out[0] = sample_ball(rng, f, q, zeta)?.det_complement;
                Ok(())
            })
            .unwrap();
            let exact = kappa_mu(f, q, mu + 1.0).unwrap() / kappa_mu(f, q, mu).unwrap();
            assert!(est[0].z_against(exact) < 4.0, "{f} q={q}: {:?} vs {exact}", est[0]);
        }
    }

    #[test]
    fn neutral_element() {
        let idx = ConeIndex::new(Field::C, 2, 3.2).unwrap();
        let r = PsdMatrix::diag(Field::C, &[0.4, 1.1]).unwrap();
        let z = PsdMatrix::diag(Field::C, &[0.0, 0.0]).unwrap();
        let f = |t: &PsdMatrix| Ok(t.as_hermitian().trace());
        let e = convolve_point(&idx, &r, &z, &f, &Budget::new(1000, 1)).unwrap();
        assert_eq!(e.value, 1.5);
        let e = orbit_convolve(3, &z, &r, &[&f], &Budget::new(1000, 1)).unwrap();
        assert_eq!(e[0].value, 1.5);
    }

    #[test]
    fn haar_gaussian_is_one() {
        // ω_μ(e^{-tr t²/2}) = 1 for every cone and index.
        let g = RadialFunction::gaussian(0.5);
        for (f, q, mu) in [(Field::R, 1, 0.8), (Field::C, 1, 2.0), (Field::R, 2, 1.7), (Field::H, 2, 6.5)] {
            let idx = ConeIndex::new(f, q, mu).unwrap();
            let e = haar_integral(&idx, &g, &Budget::new(20_000, 2)).unwrap();
            assert!((e.value - 1.0).abs() < 1e-9 + 4.0 * e.std_error, "{f} q={q}: {e:?}");
        }
    }
}
