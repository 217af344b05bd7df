use clap::{Args, ValueEnum};
use conebessel::chamber::{sample_chamber_points, ChamberPoint};
use conebessel::cone_hypergroup::{sample_points, Route};
use conebessel::PsdMatrix;

use crate::config::{Common, RunConfig};
use crate::output::{Cell, Table};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Conv {
    /// Points of δ_r *_μ δ_s on the cone, for diagonal r and s.
    Cone,
    /// Points of δ_ξ ∘_μ δ_η on the chamber.
    Chamber,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Auto,
    Interior,
    Orbit,
    Limit,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub conv: Conv,
    /// First point: diagonal of r (cone) or ξ (chamber). Defaults to 1.2, 0.6, 0.4, ...
    #[arg(long, value_delimiter = ',')]
    pub r: Option<Vec<f64>>,
    /// Second point: diagonal of s (cone) or η (chamber). Defaults to 0.9, 0.45, 0.3, ...
    #[arg(long, value_delimiter = ',')]
    pub s: Option<Vec<f64>>,
    /// Cone sampler.
    #[arg(long, value_enum, default_value = "auto")]
    pub route: RouteArg,
    /// Orbit dimension for --route orbit.
    #[arg(long)]
    pub p: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

fn point(given: &Option<Vec<f64>>, lead: f64, q: usize, name: &str) -> Result<Vec<f64>, CliError> {
    match given {
        Some(v) if v.len() != q => Err(CliError::Validation(format!("--{name} needs {q} values, got {}", v.len()))),
        Some(v) if v.iter().any(|&x| !(x >= 0.0)) => Err(CliError::Validation(format!("--{name} must be nonnegative"))),
        Some(v) => Ok(v.clone()),
        None => Ok((0..q).map(|i| lead / (i + 1) as f64).collect()),
    }
}

pub fn run(args: &SampleArgs) -> Result<(Table, RunConfig), CliError> {
    let cfg = RunConfig::resolve(&args.common, |_| None)?;
    let idx = cfg.cone_index()?;
    let q = cfg.q;
    let (r, s) = (point(&args.r, 1.2, q, "r")?, point(&args.s, 0.9, q, "s")?);
    let mut meta = cfg.meta("sample");
    meta.push(("conv".into(), format!("{:?}", args.conv).to_lowercase()));
    match args.conv {
        Conv::Cone => {
            let route = match args.route {
                RouteArg::Auto => Route::Auto,
                RouteArg::Interior => Route::Interior,
                RouteArg::Limit => Route::Limit,
                RouteArg::Orbit => Route::Orbit(args.p.ok_or_else(|| CliError::Validation("--route orbit needs --p".into()))?),
            }
            .resolve(&idx)?;
            let (rm, sm) = (PsdMatrix::diag(cfg.field, &r)?, PsdMatrix::diag(cfg.field, &s)?);
            let bound = rm.as_hermitian().norm()? + sm.as_hermitian().norm()?;
            let mut cols = vec!["index".to_string(), "norm".into(), "bound".into(), "trace".into()];
            cols.extend((1..=q).map(|i| format!("lambda_{i}")));
            cols.extend(["method", "n_samples"].map(String::from));
            let mut t = Table::new(meta, cols);
            let method = match route {
                Route::Orbit(p) => format!("orbit-{p}"),
                other => format!("{other:?}").to_lowercase(),
            };
            for (i, x) in sample_points(&idx, &rm, &sm, route, cfg.samples, cfg.seed)?.iter().enumerate() {
                let mut row: Vec<Cell> = vec![i.into(), x.as_hermitian().norm()?.into(), bound.into(), x.as_hermitian().trace().into()];
                row.extend(x.spectrum()?.into_iter().map(Cell::from));
                row.extend([method.as_str().into(), cfg.samples.into()]);
                t.push(row);
            }
            Ok((t, cfg))
        }
        Conv::Chamber => {
            let (xi, eta) = (ChamberPoint::new(r)?, ChamberPoint::new(s)?);
            let mut cols = vec!["index".to_string()];
            cols.extend((1..=q).map(|i| format!("xi_{i}")));
            cols.extend(["method", "n_samples"].map(String::from));
            let mut t = Table::new(meta, cols);
            for (i, c) in sample_chamber_points(&idx, &xi, &eta, cfg.samples, cfg.seed)?.iter().enumerate() {
                let mut row: Vec<Cell> = vec![i.into()];
                row.extend(c.xi().iter().map(|&x| Cell::from(x)));
                row.extend(["chamber-projection".into(), cfg.samples.into()]);
                t.push(row);
            }
            Ok((t, cfg))
        }
    }
}
