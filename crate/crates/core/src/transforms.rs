//! Test functions on the cone, the Hankel transform and the hypergroup
//! Fourier transforms on `Π_q` and on the chamber.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{psd_sqrt, sqrt_clamped, Field, PsdMatrix};
use crate::bessel::{ConeBessel, SeriesParams};
use crate::chamber::{ChamberPoint, Character};
use crate::cone_hypergroup::{character_phi, haar_integral, Budget, ConeIndex};
use crate::error::{Error, Result};
use crate::mc::{self, ConvolutionEstimate, Method};
use crate::quad::{gauss_kronrod, tanh_sinh, QuadOptions, ABS_FLOOR};
use crate::sampling::wishart;
use crate::special::{bessel_j_normalized, ln_gamma};

/// How fast a function decays; selects the integration strategy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Decay {
    /// Vanishes outside `{‖t‖ <= radius}`.
    Compact { radius: f64 },
    /// Bounded by a multiple of `e^{-rate tr t²}`.
    Gaussian { rate: f64 },
    /// Bounded by a multiple of `e^{-rate tr t}`.
    Exponential { rate: f64 },
}

type Callable = dyn Fn(&PsdMatrix) -> Result<f64> + Send + Sync;

/// A real function on `Π_q` with a declared decay class.
#[derive(Clone)]
pub struct RadialFunction {
    label: String,
    decay: Decay,
    f: Arc<Callable>,
}

impl fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialFunction").field("label", &self.label).field("decay", &self.decay).finish()
    }
}

impl RadialFunction {
    pub fn new<F>(label: impl Into<String>, decay: Decay, f: F) -> Self
    where
        F: Fn(&PsdMatrix) -> Result<f64> + Send + Sync + 'static,
    {
        RadialFunction { label: label.into(), decay, f: Arc::new(f) }
    }

    /// `e^{-c tr t²}`.
    pub fn gaussian(c: f64) -> Self {
        RadialFunction::new(format!("gaussian({c})"), Decay::Gaussian { rate: c }, move |t| {
            Ok((-c * tr_square(t)).exp())
        })
    }

    /// `e^{-c tr t}`.
    pub fn exponential(c: f64) -> Self {
        RadialFunction::new(format!("exponential({c})"), Decay::Exponential { rate: c }, move |t| {
            Ok((-c * t.as_hermitian().trace()).exp())
        })
    }

    /// `exp(1 - 1/(1 - |t|²/R²))` for `|t|² = tr t² < R²`, else 0. Smooth,
    /// equal to 1 at the origin.
    pub fn bump(radius: f64) -> Self {
        RadialFunction::new(format!("bump({radius})"), Decay::Compact { radius }, move |t| {
            Ok(bump_profile(tr_square(t) / (radius * radius)))
        })
    }

    /// `t ↦ f(c t)`.
    pub fn dilate(&self, c: f64) -> Self {
        let inner = self.f.clone();
        let decay = match self.decay {
            Decay::Compact { radius } => Decay::Compact { radius: radius / c },
            Decay::Gaussian { rate } => Decay::Gaussian { rate: rate * c * c },
            Decay::Exponential { rate } => Decay::Exponential { rate: rate * c },
        };
        RadialFunction::new(format!("{}∘({c}·)", self.label), decay, move |t| {
            let m = t.as_hermitian().scale(c);
            inner(&PsdMatrix::new(m)?)
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn decay(&self) -> Decay {
        self.decay
    }

    pub fn eval(&self, t: &PsdMatrix) -> Result<f64> {
        (self.f)(t)
    }

    /// Value at the `1x1` matrix `(xi)`.
    pub fn eval_rank1(&self, field: Field, xi: f64) -> Result<f64> {
        self.eval(&PsdMatrix::diag(field, &[xi])?)
    }

    pub fn as_fn(&self) -> &Callable {
        &*self.f
    }
}

/// `tr t²`, the squared Frobenius norm.
pub fn tr_square(t: &PsdMatrix) -> f64 {
    t.as_matrix().frobenius_norm().powi(2)
}

/// `exp(1 - 1/(1 - u))` on `[0, 1)`, 0 beyond.
pub fn bump_profile(u: f64) -> f64 {
    if u < 1.0 {
        (1.0 - 1.0 / (1.0 - u)).exp()
    } else {
        0.0
    }
}

/// Where a rank-one integrand lives: `[0, end)` with features on the
/// length `scale`.
#[derive(Clone, Copy, Debug)]
struct Extent {
    end: f64,
    scale: f64,
}

/// Logarithmic size below which a decay bound counts as zero.
const CUTOFF: f64 = 40.0;
const MAX_PANELS: usize = 20_000;
/// Consecutive negligible panels that end an unbounded integral.
const INNER_TOL_FLOOR: f64 = 1e-12;
const QUIET_PANELS: usize = 4;

impl Extent {
    /// Extent of `x ↦ g(x^power)` for `g` of the given decay class.
    fn of(decay: Decay, power: f64) -> Extent {
        let (end, len) = match decay {
            Decay::Compact { radius } => (radius.powf(1.0 / power), radius.powf(1.0 / power)),
            Decay::Gaussian { rate } => (f64::INFINITY, (CUTOFF / rate).powf(0.5 / power)),
            Decay::Exponential { rate } => (f64::INFINITY, (CUTOFF / rate).powf(1.0 / power)),
        };
        Extent { end, scale: len / 8.0 }
    }

    /// Effective support length.
    fn length(&self) -> f64 {
        if self.end.is_finite() {
            self.end
        } else {
            8.0 * self.scale
        }
    }
}

/// `∫_0^end g(x) x^β dx` for an oscillatory `g` whose fastest oscillation
/// has angular frequency `freq`, over panels of at most one period. An
/// unbounded range is marched until `QUIET_PANELS` consecutive panels
/// contribute less than `tol` relative to the running sum.
fn oscillatory_radial<G>(mut g: G, beta: f64, freq: f64, extent: Extent, tol: f64) -> Result<ConvolutionEstimate>
where
    G: FnMut(f64) -> Result<f64>,
{
    let mut width = extent.scale;
    if freq > 0.0 {
        width = width.min(2.0 * PI / freq);
    }
    let mut failure = None;
    let (mut sum, mut mass, mut err, mut evals, mut quiet) = (0.0, 0.0, 0.0, 0usize, 0usize);
    for k in 0..MAX_PANELS {
        let lo = k as f64 * width;
        if lo >= extent.end {
            break;
        }
        let hi = (lo + width).min(extent.end);
        // panels that cancel to nearly zero are judged against the mass so far
        let opts = QuadOptions { abs_tol: (tol * mass).max(ABS_FLOOR), ..QuadOptions::rel(tol) };
        let mut h = |x: f64, w: f64| match g(x) {
            Ok(v) if v == 0.0 => 0.0,
            Ok(v) => v * w,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        };
        // only the first panel can carry the endpoint singularity of x^β
        let r = if k == 0 {
            tanh_sinh(|x, da, _| h(x, da.powf(beta)), lo, hi, opts)?
        } else {
            gauss_kronrod(|x| h(x, x.powf(beta)), lo, hi, opts)?
        };
        if let Some(e) = failure.take() {
            return Err(e);
        }
        sum += r.value;
        mass += r.value.abs();
        err += r.error;
        evals += r.evaluations;
        if extent.end.is_finite() {
            continue;
        }
        if r.value.abs() <= tol * sum.abs() && hi > extent.length() {
            quiet += 1;
            if quiet == QUIET_PANELS {
                return Ok(quadrature_estimate(sum, err, evals));
            }
        } else {
            quiet = 0;
        }
    }
    if extent.end.is_finite() {
        Ok(quadrature_estimate(sum, err, evals))
    } else {
        Err(Error::QuadratureNonConvergence { error: err })
    }
}

fn quadrature_estimate(value: f64, error: f64, evals: usize) -> ConvolutionEstimate {
    ConvolutionEstimate { value, std_error: error, n_samples: evals as u64, method: Method::Quadrature, seed: None }
}

fn scaled(e: ConvolutionEstimate, c: f64) -> ConvolutionEstimate {
    ConvolutionEstimate { value: c * e.value, std_error: c.abs() * e.std_error, ..e }
}

/// Every admissible index has `γ > -1`, which is all the transforms need.
fn check_transform(idx: &ConeIndex, s: &PsdMatrix) -> Result<()> {
    if s.field() != idx.field || s.q() != idx.q {
        return Err(Error::Dimension(format!("expected a {0}x{0} matrix over {1}", idx.q, idx.field)));
    }
    if idx.q > 2 {
        return Err(Error::Unsupported("transforms are available for q <= 2".into()));
    }
    Ok(())
}

fn entry(s: &PsdMatrix) -> f64 {
    s.as_matrix().get(0, 0).a
}

/// Rank-one Hankel transform in the variable `ρ = √r`:
/// `U_μF(s) = 2/Γ(μ) ∫_0^∞ j_{μ-1}(2√s ρ) F(ρ²) ρ^{2μ-1} dρ`.
fn hankel_rank1<G>(mu: f64, g: G, s: f64, extent: Extent, tol: f64) -> Result<ConvolutionEstimate>
where
    G: Fn(f64) -> Result<f64>,
{
    let k = 2.0 * s.max(0.0).sqrt();
    let pref = (LN_2 - ln_gamma(mu)).exp();
    let r = oscillatory_radial(|rho| Ok(bessel_j_normalized(mu - 1.0, k * rho)? * g(rho * rho)?), 2.0 * mu - 1.0, k, extent, tol)?;
    Ok(scaled(r, pref))
}

/// The Hankel transform
/// `U_μF(s) = Γ_Ω(μ)⁻¹ ∫_{Ω_q} J_μ(√s r √s) F(r) Δ(r)^{μ-n/q} dr`.
///
/// `q = 1` by quadrature. `q = 2` by Monte Carlo with `r = W/(2a)`, `W`
/// Wishart of shape `μ`, which gives
/// `U_μF(s) = a^{-qμ} E[J_μ(√s r √s) F(r) e^{tr W/2}]`; `a` follows the
/// decay class of `F`.
pub fn hankel_transform(idx: &ConeIndex, big_f: &RadialFunction, s: &PsdMatrix, budget: &Budget) -> Result<ConvolutionEstimate> {
    check_transform(idx, s)?;
    let (field, q, mu) = (idx.field, idx.q, idx.mu);
    if q == 1 {
        return hankel_rank1(mu, |r| big_f.eval_rank1(field, r), entry(s), Extent::of(big_f.decay(), 2.0), budget.tol);
    }
    let qmu = q as f64 * mu;
    let a = match big_f.decay() {
        Decay::Exponential { rate } => rate,
        Decay::Compact { radius } => 2.0 * qmu / radius,
        Decay::Gaussian { rate } => qmu * (2.0 * rate / q as f64).sqrt(),
    };
    let bessel = ConeBessel::new(field, q, mu, SeriesParams::default())?;
    let root = psd_sqrt(s.as_hermitian())?;
    let log_pref = -qmu * a.ln();
    Ok(mc::estimate(budget.mc(), 1, Method::MonteCarlo, |rng, out| {
        let w = wishart(rng, field, q, mu)?;
        let r = PsdMatrix::new(w.as_hermitian().scale(0.5 / a))?;
        let fv = big_f.eval(&r)?;
        out[0] = if fv == 0.0 {
            0.0
        } else {
            let arg = PsdMatrix::new(r.as_hermitian().congruence(root.as_matrix()))?;
            bessel.eval(&arg)?.value * fv * (0.5 * w.as_hermitian().trace() + log_pref).exp()
        };
        Ok(())
    })?[0])
}

/// `U_μ(U_μF)(r)` at `q = 1` by nested quadrature; equals `F(r)`.
pub fn hankel_involution(idx: &ConeIndex, big_f: &RadialFunction, r: &PsdMatrix, budget: &Budget) -> Result<ConvolutionEstimate> {
    check_transform(idx, r)?;
    if idx.q != 1 {
        return Err(Error::Unsupported("the nested Hankel transform is rank-one only".into()));
    }
    let (field, mu) = (idx.field, idx.mu);
    let inner = Extent::of(big_f.decay(), 2.0);
    let inner_tol = budget.tol * 1e-2;
    // U_μF(σ²) oscillates with frequency up to 2 × the support of F(ρ²)
    let outer = Extent { end: f64::INFINITY, scale: PI / (2.0 * inner.length()) };
    let g = |sigma_sq: f64| Ok(hankel_rank1(mu, |x| big_f.eval_rank1(field, x), sigma_sq, inner, inner_tol)?.value);
    hankel_rank1(mu, g, entry(r), outer, budget.tol)
}

/// The Fourier transform `f̂(φ_s) = ∫_{Π_q} φ_s(r) f(r) dω_μ(r)` of the
/// cone hypergroup at the character `φ_s(r) = J_μ(¼ s r² s)`.
///
/// `q = 1` by quadrature with the kernel `j_{μ-1}(s r)`; `q = 2` by the
/// Monte Carlo Haar integral of `φ_s f`.
pub fn hypergroup_fourier_cone(idx: &ConeIndex, f: &RadialFunction, s: &PsdMatrix, budget: &Budget) -> Result<ConvolutionEstimate> {
    check_transform(idx, s)?;
    let (field, q, mu) = (idx.field, idx.q, idx.mu);
    if q == 1 {
        let sv = entry(s);
        let pref = ((1.0 - mu) * LN_2 - ln_gamma(mu)).exp();
        let g = |t: f64| Ok(bessel_j_normalized(mu - 1.0, sv * t)? * f.eval_rank1(field, t)?);
        return Ok(scaled(oscillatory_radial(g, 2.0 * mu - 1.0, sv, Extent::of(f.decay(), 1.0), budget.tol)?, pref));
    }
    let bessel = Arc::new(ConeBessel::new(field, q, mu, SeriesParams::default())?);
    let (s, inner) = (s.clone(), f.clone());
    let product = RadialFunction::new(format!("phi*{}", f.label()), f.decay(), move |t| {
        let fv = inner.eval(t)?;
        if fv == 0.0 {
            return Ok(0.0);
        }
        Ok(character_phi(&bessel, &s)(t)? * fv)
    });
    haar_integral(idx, &product, budget)
}

/// `2^{-qμ} U_μF(s²/4)` with `F(r) = f(√r)`, which equals
/// `hypergroup_fourier_cone(f, s)`.
pub fn hypergroup_fourier_cone_via_hankel(idx: &ConeIndex, f: &RadialFunction, s: &PsdMatrix, budget: &Budget) -> Result<ConvolutionEstimate> {
    check_transform(idx, s)?;
    let decay = match f.decay() {
        Decay::Compact { radius } => Decay::Compact { radius: radius * radius },
        Decay::Gaussian { rate } => Decay::Exponential { rate },
        Decay::Exponential { .. } => {
            return Err(Error::DecayInsufficient("the Hankel route needs Gaussian decay or compact support".into()))
        }
    };
    let inner = f.clone();
    let big_f = RadialFunction::new(format!("{}∘√", f.label()), decay, move |r| inner.eval(&sqrt_clamped(r.as_matrix())?));
    let arg = PsdMatrix::new(s.as_hermitian().square().scale(0.25))?;
    let u = hankel_transform(idx, &big_f, &arg, budget)?;
    Ok(scaled(u, (-(idx.q as f64) * idx.mu * LN_2).exp()))
}

/// The Fourier transform `f̂(η) = ∫_{Ξ_q} f(ξ) ψ_η(ξ) dω̃_μ(ξ)` of the
/// chamber hypergroup, `f` evaluated at diagonal matrices.
///
/// `q = 1` by quadrature. `q = 2` by Monte Carlo over the pushforward of
/// the Wishart proposal used for Haar integrals, with `ψ_η` from the
/// two-argument series.
pub fn hypergroup_fourier_chamber(idx: &ConeIndex, f: &RadialFunction, eta: &ChamberPoint, budget: &Budget) -> Result<ConvolutionEstimate> {
    let (field, q, mu) = (idx.field, idx.q, idx.mu);
    if eta.q() != q {
        return Err(Error::Dimension(format!("expected a chamber point with {q} coordinates")));
    }
    check_transform(idx, &eta.to_diag(field))?;
    if q == 1 {
        let e = eta.xi()[0];
        let pref = ((1.0 - mu) * LN_2 - ln_gamma(mu)).exp();
        let g = |x: f64| Ok(bessel_j_normalized(mu - 1.0, e * x)? * f.eval_rank1(field, x)?);
        return Ok(scaled(oscillatory_radial(g, 2.0 * mu - 1.0, e, Extent::of(f.decay(), 1.0), budget.tol)?, pref));
    }
    let c = match f.decay() {
        Decay::Gaussian { rate } => (0.5 / rate).sqrt(),
        Decay::Compact { radius } => radius / (4.0 * q as f64 * mu).sqrt(),
        Decay::Exponential { .. } => {
            return Err(Error::DecayInsufficient("Monte Carlo chamber integrals need Gaussian decay or compact support".into()))
        }
    };
    let psi = Character::new(idx, eta, SeriesParams::default())?;
    let log_c = 2.0 * q as f64 * mu * c.ln();
    Ok(mc::estimate(budget.mc(), 1, Method::MonteCarlo, |rng, out| {
        let w = wishart(rng, field, q, mu)?;
        let xi: Vec<f64> = w.spectrum()?.iter().map(|l| c * l.max(0.0).sqrt()).collect();
        let xi = ChamberPoint::representative(&xi);
        let fv = f.eval(&xi.to_diag(field))?;
        out[0] = if fv == 0.0 { 0.0 } else { fv * psi.eval(&xi)?.value * (0.5 * w.as_hermitian().trace() + log_c).exp() };
        Ok(())
    })?[0])
}

/// Both sides of `∫ |f|² dω_μ = ∫ |f̂(φ_s)|² dω_μ(s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plancherel {
    pub lhs: ConvolutionEstimate,
    pub rhs: ConvolutionEstimate,
}

impl Plancherel {
    pub fn relative_defect(&self) -> f64 {
        (self.lhs.value - self.rhs.value).abs() / self.lhs.value.abs()
    }
}

/// Plancherel identity at `q = 1`, both sides by quadrature; the right
/// side nests the transform inside an outer integral over `s`.
pub fn plancherel_rank1(idx: &ConeIndex, f: &RadialFunction, budget: &Budget) -> Result<Plancherel> {
    if idx.q != 1 {
        return Err(Error::Unsupported("the Plancherel check is rank-one only".into()));
    }
    let (field, mu) = (idx.field, idx.mu);
    let decay = match f.decay() {
        Decay::Gaussian { rate } => Decay::Gaussian { rate: 2.0 * rate },
        Decay::Exponential { rate } => Decay::Exponential { rate: 2.0 * rate },
        d => d,
    };
    let inner = f.clone();
    let square = RadialFunction::new(format!("{}²", f.label()), decay, move |t| Ok(inner.eval(t)?.powi(2)));
    let lhs = haar_integral(idx, &square, budget)?;
    let extent = Extent::of(f.decay(), 1.0);
    let outer = Extent { end: f64::INFINITY, scale: PI / extent.length() };
    // the Bessel kernel is good to about 1e-13, so tighter inner targets stall
    let inner_budget = budget.with_tol((budget.tol * 1e-2).max(INNER_TOL_FLOOR));
    let pref = ((1.0 - mu) * LN_2 - ln_gamma(mu)).exp();
    let g = |s: f64| Ok(hypergroup_fourier_cone(idx, f, &PsdMatrix::diag(field, &[s])?, &inner_budget)?.value.powi(2));
    let rhs = scaled(oscillatory_radial(g, 2.0 * mu - 1.0, 0.0, outer, budget.tol)?, pref);
    Ok(Plancherel { lhs, rhs })
}
