use clap::{Args, Subcommand};
use conebessel::bessel::{bessel_rank1, ConeBessel, SeriesParams};
use conebessel::chamber::{character_psi, dunkl_bessel_b, ChamberPoint, Character};
use num_complex::Complex64;

use crate::config::{Common, Grid, RunConfig};
use crate::output::{Cell, Table};
use crate::CliError;

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(subcommand)]
    pub what: EvalWhat,
}

#[derive(Subcommand, Debug)]
pub enum EvalWhat {
    /// Classical normalized Bessel function j_{μ-1}(z) = J_μ(z²/4) at rank one.
    Rank1 {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "0:10:101")]
        grid: Grid,
    },
    /// Cone Bessel function J_μ(t·diag(spectrum)).
    Cone {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        spectrum: Vec<f64>,
        #[arg(long, default_value = "0:2:21")]
        grid: Grid,
    },
    /// Chamber character ψ_η(t·ξ) together with the swapped pair ψ_{tξ}(η).
    Psi {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        xi: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        eta: Vec<f64>,
        #[arg(long, default_value = "0:2:11")]
        grid: Grid,
    },
    /// Dunkl-type Bessel function J_k^B(t·z, i·w).
    Dunkl {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        z: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        w: Vec<f64>,
        #[arg(long, default_value = "0:2:11")]
        grid: Grid,
    },
}

fn params(cfg: &RunConfig) -> SeriesParams {
    SeriesParams { tol: cfg.tol, ..SeriesParams::default() }
}

fn indexed(prefix: &str, q: usize) -> Vec<String> {
    (1..=q).map(|i| format!("{prefix}_{i}")).collect()
}

fn check_len(name: &str, v: &[f64], q: usize) -> Result<(), CliError> {
    if v.len() != q {
        return Err(CliError::Validation(format!("--{name} needs {q} values, got {}", v.len())));
    }
    Ok(())
}

/// Closed forms of `j_{μ-1}` available for comparison.
fn rank1_reference(mu: f64, z: f64) -> Option<f64> {
    if mu == 1.5 {
        Some(if z == 0.0 { 1.0 } else { z.sin() / z })
    } else if mu == 0.5 {
        Some(z.cos())
    } else {
        None
    }
}

pub fn run(args: &EvalArgs) -> Result<(Table, RunConfig), CliError> {
    match &args.what {
        EvalWhat::Rank1 { common, grid } => {
            let cfg = RunConfig::resolve(&Common { q: 1, ..common.clone() }, |_| None)?;
            let reference = rank1_reference(cfg.mu, 1.0).is_some();
            let mut cols = vec!["z".to_string(), "value".into(), "tail_bound".into()];
            if reference {
                cols.extend(["reference".into(), "abs_error".into()]);
            }
            cols.extend(["method".into(), "tolerance".into()]);
            let mut t = Table::new(cfg.meta("eval rank1"), cols);
            let mut worst = 0.0f64;
            for z in grid.points() {
                let v = bessel_rank1(cfg.mu - 1.0, z)?;
                let mut row: Vec<Cell> = vec![z.into(), v.into(), 0.0.into()];
                if let Some(r) = rank1_reference(cfg.mu, z) {
                    worst = worst.max((v - r).abs());
                    row.extend([r.into(), (v - r).abs().into()]);
                }
                row.extend(["special-function".into(), f64::EPSILON.into()]);
                t.push(row);
            }
            if reference {
                t.meta.push(("max_abs_error".into(), format!("{worst:e}")));
                eprintln!("max abs error against the closed form: {worst:e}");
            }
            Ok((t, cfg))
        }
        EvalWhat::Cone { common, spectrum, grid } => {
            let cfg = RunConfig::resolve(common, |_| None)?;
            check_len("spectrum", spectrum, cfg.q)?;
            if spectrum.iter().any(|&x| x < 0.0) {
                return Err(CliError::Validation("--spectrum must be nonnegative".into()));
            }
            cfg.cone_index()?;
            let bessel = ConeBessel::new(cfg.field, cfg.q, cfg.mu, params(&cfg))?;
            let mut cols = vec!["t".to_string()];
            cols.extend(indexed("xi", cfg.q));
            cols.extend(["value", "tail_bound", "weight", "method", "tolerance"].map(String::from));
            let mut t = Table::new(cfg.meta("eval cone"), cols);
            for s in grid.points() {
                let xi: Vec<f64> = spectrum.iter().map(|x| s * x).collect();
                let v = bessel.eval_spectrum(&xi)?;
                let mut row: Vec<Cell> = vec![s.into()];
                row.extend(xi.iter().map(|&x| Cell::from(x)));
                row.extend([v.value.into(), v.tail_bound.into(), v.weight.into(), "series".into(), cfg.tol.into()]);
                t.push(row);
            }
            Ok((t, cfg))
        }
        EvalWhat::Psi { common, xi, eta, grid } => {
            let cfg = RunConfig::resolve(common, |_| None)?;
            check_len("xi", xi, cfg.q)?;
            check_len("eta", eta, cfg.q)?;
            let idx = cfg.cone_index()?;
            let eta = ChamberPoint::representative(eta);
            let psi = Character::new(&idx, &eta, params(&cfg))?;
            let mut cols = vec!["t".to_string(), "order".into()];
            cols.extend(indexed("xi", cfg.q));
            cols.extend(indexed("eta", cfg.q));
            cols.extend(["value", "tail_bound", "method", "tolerance"].map(String::from));
            let mut t = Table::new(cfg.meta("eval psi"), cols);
            for s in grid.points() {
                let x = ChamberPoint::representative(&xi.iter().map(|v| s * v).collect::<Vec<_>>());
                let forward = psi.eval(&x)?;
                let swapped = character_psi(&idx, &eta, &x, params(&cfg))?;
                for (order, a, b, v) in [("xi,eta", &x, &eta, forward), ("eta,xi", &eta, &x, swapped)] {
                    let mut row: Vec<Cell> = vec![s.into(), order.into()];
                    row.extend(a.xi().iter().chain(b.xi()).map(|&v| Cell::from(v)));
                    row.extend([v.value.into(), v.tail_bound.into(), "series".into(), cfg.tol.into()]);
                    t.push(row);
                }
            }
            Ok((t, cfg))
        }
        EvalWhat::Dunkl { common, z, w, grid } => {
            let cfg = RunConfig::resolve(common, |_| None)?;
            check_len("z", z, cfg.q)?;
            check_len("w", w, cfg.q)?;
            let wi: Vec<Complex64> = w.iter().map(|&x| Complex64::new(0.0, x)).collect();
            let mut cols = vec!["t".to_string()];
            cols.extend(indexed("z", cfg.q));
            cols.extend(indexed("w", cfg.q));
            cols.extend(["re", "im", "tail_bound", "method", "tolerance"].map(String::from));
            let mut t = Table::new(cfg.meta("eval dunkl"), cols);
            for s in grid.points() {
                let zs: Vec<Complex64> = z.iter().map(|&x| Complex64::new(s * x, 0.0)).collect();
                let v = dunkl_bessel_b(cfg.k, &zs, &wi, params(&cfg))?;
                let mut row: Vec<Cell> = vec![s.into()];
                row.extend(zs.iter().map(|c| Cell::from(c.re)));
                row.extend(w.iter().map(|&x| Cell::from(x)));
                row.extend([v.value.re.into(), v.value.im.into(), v.tail_bound.into(), "series".into(), cfg.tol.into()]);
                t.push(row);
            }
            Ok((t, cfg))
        }
    }
}
