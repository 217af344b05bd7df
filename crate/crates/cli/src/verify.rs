use clap::{Args, ValueEnum};
use conebessel::bessel::{bessel_cone, SeriesParams};
use conebessel::chamber::{
    chamber_convolve, character_psi, character_psi_mc, dunkl_bessel_b, multiplicity_from_mu, ChamberPoint, Character,
};
use conebessel::cone_hypergroup::*;
use conebessel::jack::jack_normalization_residual;
use conebessel::mc::{ConvolutionEstimate, Method};
use conebessel::sampling::gaussian_matrix;
use conebessel::transforms::RadialFunction;
use conebessel::{Field, HermitianMatrix, PsdMatrix};
use num_complex::Complex64;
use rand::Rng;

use crate::config::{Common, RunConfig};
use crate::output::Table;
use crate::CliError;

/// Standard errors allowed between a Monte Carlo estimate and its reference.
pub const Z_LIMIT: f64 = 3.0;
/// Residual allowed for the rank-one quadrature product formula.
pub const QUADRATURE_LIMIT: f64 = 1e-8;
/// Relative defect allowed for the nested-quadrature Haar invariance check.
pub const HAAR_LIMIT: f64 = 1e-6;
/// Gap allowed between two series evaluations of the same quantity.
pub const SERIES_LIMIT: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    ProductFormula,
    OrbitEquivalence,
    LimitCase,
    JackNormalization,
    Bochner,
    HaarInvariance,
    ChamberMultiplicativity,
    CharacterChain,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Orbit dimension for orbit-equivalence (μ = pd/2).
    #[arg(long)]
    pub p: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

const COLUMNS: [&str; 10] =
    ["check", "statistic", "measured", "limit", "pass", "value", "reference", "method", "n_samples", "std_error"];

struct Report {
    table: Table,
    all_pass: bool,
}

impl Report {
    fn new(cfg: &RunConfig, suite: Suite) -> Report {
        let mut meta = cfg.meta("verify");
        let name = suite.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
        meta.insert(1, ("suite".into(), name));
        Report { table: Table::new(meta, COLUMNS.map(String::from).to_vec()), all_pass: true }
    }

    /// `statistic` is compared against `limit`; `value` and `reference` are
    /// the compared quantities.
    fn check(&mut self, name: &str, statistic: &str, measured: f64, limit: f64, value: f64, reference: f64, e: &ConvolutionEstimate) {
        let pass = measured <= limit;
        self.all_pass &= pass;
        self.table.push(vec![
            name.into(),
            statistic.into(),
            measured.into(),
            limit.into(),
            pass.into(),
            value.into(),
            reference.into(),
            e.method.name().into(),
            e.n_samples.into(),
            e.std_error.into(),
        ]);
    }

    fn z(&mut self, name: &str, e: &ConvolutionEstimate, reference: &ConvolutionEstimate) {
        let combined = ConvolutionEstimate { std_error: e.std_error.hypot(reference.std_error), ..*e };
        self.check(name, "|z|", e.z_score(reference), Z_LIMIT, e.value, reference.value, &combined);
    }
}

fn random_psd(field: Field, q: usize, seed: u64, norm: f64) -> Result<PsdMatrix, CliError> {
    let g = gaussian_matrix(&mut seeded_rng(seed), field, q, q);
    let m = HermitianMatrix::symmetrize(&g.adjoint().matmul(&g));
    let n = m.norm()?;
    Ok(PsdMatrix::new(m.scale(norm / n))?)
}

fn random_chamber(rng: &mut impl Rng, q: usize, hi: f64) -> ChamberPoint {
    ChamberPoint::representative(&(0..q).map(|_| rng.random_range(0.0..hi)).collect::<Vec<_>>())
}

type Functional = Box<dyn Fn(&PsdMatrix) -> conebessel::Result<f64> + Sync>;

fn functionals() -> Vec<(&'static str, Functional)> {
    vec![
        ("trace", Box::new(|t: &PsdMatrix| Ok(t.as_hermitian().trace()))),
        ("gaussian", Box::new(|t: &PsdMatrix| Ok((-0.5 * t.as_matrix().frobenius_norm().powi(2)).exp()))),
        ("top-eigenvalue", Box::new(|t: &PsdMatrix| Ok(t.spectrum()?[0]))),
        ("corner-entry", Box::new(|t: &PsdMatrix| Ok(t.as_matrix().get(0, 0).a))),
        ("cosine-of-trace", Box::new(|t: &PsdMatrix| Ok((1.3 * t.as_hermitian().trace()).cos()))),
    ]
}

/// Compares two convolution estimators on the shipped functionals.
fn compare_functionals<A, B>(report: &mut Report, label: &str, a: A, b: B) -> Result<(), CliError>
where
    A: FnOnce(&[&ConeFn]) -> conebessel::Result<Vec<ConvolutionEstimate>>,
    B: FnOnce(&[&ConeFn]) -> conebessel::Result<Vec<ConvolutionEstimate>>,
{
    let fs = functionals();
    let refs: Vec<&ConeFn> = fs.iter().map(|(_, f)| f.as_ref() as &ConeFn).collect();
    let (x, y) = (a(&refs)?, b(&refs)?);
    for ((name, _), (u, v)) in fs.iter().zip(x.iter().zip(&y)) {
        report.z(&format!("{label} {name}"), u, v);
    }
    Ok(())
}

pub fn run(args: &VerifyArgs) -> Result<(Table, RunConfig, bool), CliError> {
    let q = args.common.q;
    let cfg = match args.suite {
        Suite::OrbitEquivalence => {
            let p = args.p.ok_or_else(|| CliError::Validation("orbit-equivalence needs --p".into()))?;
            let cfg = RunConfig::resolve(&args.common, |f| Some(p as f64 * f.d() as f64 / 2.0))?;
            if cfg.mu != p as f64 * cfg.field.d() as f64 / 2.0 {
                return Err(CliError::Validation(format!("--mu {} differs from pd/2 for p = {p}", cfg.mu)));
            }
            cfg
        }
        Suite::LimitCase => RunConfig::resolve(&args.common, |f| Some((2 * q - 1) as f64 * f.d() as f64 / 2.0))?,
        Suite::JackNormalization => RunConfig::resolve(&args.common, |_| Some(1.0))?,
        _ => RunConfig::resolve(&args.common, |_| None)?,
    };
    let mut report = Report::new(&cfg, args.suite);
    let (field, seed, n) = (cfg.field, cfg.seed, cfg.samples);
    let params = SeriesParams { tol: cfg.tol.max(1e-15), ..SeriesParams::default() };
    match args.suite {
        Suite::ProductFormula => {
            let idx = cfg.cone_index()?;
            for i in 0..3u64 {
                let r = random_psd(field, q, seed.wrapping_add(2 * i), 1.4)?;
                let s = random_psd(field, q, seed.wrapping_add(2 * i + 1), 1.1)?;
                let res = product_formula_residual(&idx, &r, &s, Route::Auto, &Budget::new(n, seed.wrapping_add(i)).with_tol(cfg.tol))?;
                let name = format!("pair {}", i + 1);
                if res.estimate.method == Method::Quadrature {
                    report.check(&name, "residual", res.residual, QUADRATURE_LIMIT, res.estimate.value, res.product, &res.estimate);
                } else {
                    let e = ConvolutionEstimate { std_error: res.std_error, ..res.estimate };
                    report.check(&name, "|z|", res.z(), Z_LIMIT, res.estimate.value, res.product, &e);
                }
            }
        }
        Suite::OrbitEquivalence => {
            let p = args.p.unwrap_or_default();
            let idx = cfg.cone_index()?;
            let r = random_psd(field, q, seed, 1.0)?;
            let s = random_psd(field, q, seed.wrapping_add(1), 0.7)?;
            compare_functionals(
                &mut report,
                "interior vs orbit",
                |fs| convolve(&idx, &r, &s, fs, Route::Interior, &Budget::new(n, seed)),
                |fs| orbit_convolve(p, &r, &s, fs, &Budget::new(n, seed.wrapping_add(1))),
            )?;
        }
        Suite::LimitCase => {
            let idx = cfg.cone_index()?;
            if !idx.is_limit() {
                return Err(CliError::Validation(format!("mu = {} is not the limit index for this cone", cfg.mu)));
            }
            let r = random_psd(field, q, seed, 1.0)?;
            let s = random_psd(field, q, seed.wrapping_add(1), 0.9)?;
            compare_functionals(
                &mut report,
                "limit vs orbit",
                |fs| limit_convolve(&r, &s, fs, &Budget::new(n, seed)),
                |fs| orbit_convolve(2 * q - 1, &r, &s, fs, &Budget::new(n, seed.wrapping_add(1))),
            )?;
        }
        Suite::JackNormalization => {
            let mut rng = seeded_rng(seed);
            for qq in 1..=4 {
                for alpha in [0.5, 1.0, 2.0] {
                    let mut worst = 0.0f64;
                    for k in 0..=6 {
                        for _ in 0..100 {
                            let xi: Vec<f64> = (0..qq).map(|_| rng.random_range(-2.0..2.0)).collect();
                            worst = worst.max(jack_normalization_residual(k, alpha, &xi)?);
                        }
                    }
                    let e = ConvolutionEstimate::exact(worst);
                    report.check(&format!("q={qq} alpha={alpha}"), "relative residual", worst, SERIES_LIMIT, worst, 0.0, &e);
                }
            }
        }
        Suite::Bochner => {
            let idx = cfg.cone_index()?;
            for i in 0..2u64 {
                let x = gaussian_matrix(&mut seeded_rng(seed.wrapping_add(i)), field, q, q).scale(0.6);
                let est = bochner_eval(&idx, &x, &Budget::new(n, seed.wrapping_add(i)))?;
                let xx = PsdMatrix::new(HermitianMatrix::symmetrize(&x.adjoint().matmul(&x)))?;
                let series = bessel_cone(cfg.mu, &xx, params)?.value;
                report.z(&format!("point {} real part", i + 1), &est.re(), &ConvolutionEstimate::exact(series));
                report.z(&format!("point {} imaginary part", i + 1), &est.im(), &ConvolutionEstimate::exact(0.0));
            }
        }
        Suite::HaarInvariance => {
            if q != 1 {
                return Err(CliError::Validation("haar-invariance runs by nested quadrature at --q 1".into()));
            }
            let idx = cfg.cone_index()?;
            let b = Budget::default().with_tol(cfg.tol.max(1e-10));
            for radius in [0.7, 1.0, 2.5] {
                let f = RadialFunction::bump(radius);
                let plain = haar_integral(&idx, &f, &b)?;
                for s in [0.5, 1.0, 2.0] {
                    let tr = translated_haar_integral(&idx, &f, &PsdMatrix::diag(field, &[s])?, &b)?;
                    let defect = (tr.value - plain.value).abs() / plain.value.abs();
                    report.check(&format!("{} at s={s}", f.label()), "relative defect", defect, HAAR_LIMIT, tr.value, plain.value, &tr);
                }
            }
        }
        Suite::ChamberMultiplicativity => {
            let idx = cfg.cone_index()?;
            let mut rng = seeded_rng(seed);
            for i in 0..2u64 {
                let (zeta, xi, eta) = (random_chamber(&mut rng, q, 1.5), random_chamber(&mut rng, q, 1.5), random_chamber(&mut rng, q, 1.5));
                let psi = Character::new(&idx, &zeta, params)?;
                let f = |c: &ChamberPoint| Ok(psi.eval(c)?.value);
                let est = chamber_convolve(&idx, &xi, &eta, &[&f], &Budget::new(n, seed.wrapping_add(i)))?[0];
                let prod = f(&xi)? * f(&eta)?;
                report.z(&format!("case {}", i + 1), &est, &ConvolutionEstimate::exact(prod));
            }
        }
        Suite::CharacterChain => {
            let idx = cfg.cone_index()?;
            let k = multiplicity_from_mu(cfg.mu, field.d(), q)?;
            let mut rng = seeded_rng(seed);
            for i in 0..3u64 {
                let (xi, eta) = (random_chamber(&mut rng, q, 2.0), random_chamber(&mut rng, q, 2.0));
                let series = character_psi(&idx, &xi, &eta, params)?.value;
                let z: Vec<Complex64> = xi.xi().iter().map(|&x| Complex64::new(x, 0.0)).collect();
                let w: Vec<Complex64> = eta.xi().iter().map(|&x| Complex64::new(0.0, x)).collect();
                let dunkl = dunkl_bessel_b(k, &z, &w, params)?.value;
                let gap = (dunkl.re - series).abs().max(dunkl.im.abs());
                let name = format!("pair {}", i + 1);
                report.check(&format!("{name} series vs Dunkl"), "abs gap", gap, SERIES_LIMIT, dunkl.re, series, &ConvolutionEstimate::exact(gap));
                let mc = character_psi_mc(&idx, &xi, &eta, &Budget::new(n, seed.wrapping_add(i)))?;
                report.z(&format!("{name} unitary average vs series"), &mc, &ConvolutionEstimate::exact(series));
            }
        }
    }
    let Report { table, all_pass } = report;
    Ok((table, cfg, all_pass))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn functionals_are_distinct() {
        let x = PsdMatrix::diag(Field::R, &[2.0, 0.5]).unwrap();
        let values: Vec<f64> = functionals().iter().map(|(_, f)| f(&x).unwrap()).collect();
        assert_eq!(values[0], 2.5);
        assert_eq!(values[2], 2.0);
        assert_eq!(values[3], 2.0);
    }
}
