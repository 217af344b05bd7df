use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use conebessel::chamber::{mu_from_multiplicity, multiplicity_from_mu, MultiplicityB};
use conebessel::cone_hypergroup::ConeIndex;
use conebessel::Field;

use crate::CliError;

/// Seed used when `--seed` is absent.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    R,
    C,
    H,
}

impl From<FieldArg> for Field {
    fn from(f: FieldArg) -> Field {
        match f {
            FieldArg::R => Field::R,
            FieldArg::C => Field::C,
            FieldArg::H => Field::H,
        }
    }
}

/// `start:end:n`, `n` equally spaced points including both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub n: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.start];
        }
        let h = (self.end - self.start) / (self.n - 1) as f64;
        (0..self.n).map(|i| self.start + h * i as f64).collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Grid, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("expected start:end:n, got {s:?}"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
        let n: usize = n.trim().parse().map_err(|e| format!("{n:?}: {e}"))?;
        if n == 0 {
            return Err("a grid needs at least one point".into());
        }
        Ok(Grid { start: num(a)?, end: num(b)?, n })
    }
}

/// Flags shared by every subcommand.
#[derive(Args, Clone, Debug)]
pub struct Common {
    /// Division algebra.
    #[arg(long, value_enum, ignore_case = true)]
    pub field: Option<FieldArg>,
    /// Real dimension of the field (1, 2 or 4); alternative to --field.
    #[arg(long)]
    pub d: Option<usize>,
    /// Rank.
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    /// Index of the convolution.
    #[arg(long, conflicts_with_all = ["k1", "k2"])]
    pub mu: Option<f64>,
    /// Multiplicity on the short roots of B_q.
    #[arg(long, requires = "k2")]
    pub k1: Option<f64>,
    /// Multiplicity on the long roots of B_q.
    #[arg(long, requires = "k1")]
    pub k2: Option<f64>,
    /// Sample budget for Monte Carlo estimates (accepts 1e6).
    #[arg(long, default_value = "1e5", value_parser = parse_count)]
    pub samples: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Relative tolerance for series and quadrature.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv", ignore_case = true)]
    pub format: Format,
}

/// Parses `100000`, `1e5` or `2.5e4` as a sample count.
pub fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("{s:?} is not a count"))?;
    if x >= 1.0 && x.fract() == 0.0 && x <= u64::MAX as f64 {
        Ok(x as u64)
    } else {
        Err(format!("{s:?} is not a positive whole number"))
    }
}

/// Validated parameters resolved from [`Common`].
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub field: Field,
    pub q: usize,
    pub mu: f64,
    pub k: MultiplicityB,
    pub samples: u64,
    pub seed: u64,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    /// Resolves the field and the (μ, k) pair. `default_mu` supplies μ from
    /// the field when neither `--mu` nor `--k1/--k2` is given.
    pub fn resolve(c: &Common, default_mu: impl FnOnce(Field) -> Option<f64>) -> Result<RunConfig, CliError> {
        if c.q == 0 {
            return Err(CliError::Validation("--q must be at least 1".into()));
        }
        if !(c.tol > 0.0 && c.tol < 1.0) {
            return Err(CliError::Validation(format!("--tol {} must lie in (0, 1)", c.tol)));
        }
        let from_d = match c.d {
            None => None,
            Some(1) => Some(Field::R),
            Some(2) => Some(Field::C),
            Some(4) => Some(Field::H),
            Some(d) => return Err(CliError::Validation(format!("--d {d} is not one of 1, 2, 4"))),
        };
        let from_k2 = match c.k2 {
            Some(k2) if k2 == 0.5 => Some(Field::R),
            Some(k2) if k2 == 1.0 => Some(Field::C),
            Some(k2) if k2 == 2.0 => Some(Field::H),
            _ => None,
        };
        let mut field = None;
        for f in [c.field.map(Field::from), from_d, from_k2].into_iter().flatten() {
            match field {
                Some(g) if g != f => {
                    return Err(CliError::Validation(format!("conflicting field choices {g} and {f}")));
                }
                _ => field = Some(f),
            }
        }
        let field = field.unwrap_or(Field::R);
        let (mu, k) = match (c.mu, c.k1, c.k2) {
            (Some(mu), _, _) => (mu, multiplicity_from_mu(mu, field.d(), c.q)?),
            (None, Some(k1), Some(k2)) => {
                if (c.field.is_some() || c.d.is_some()) && k2 != field.d() as f64 / 2.0 {
                    return Err(CliError::Validation(format!("--k2 {k2} does not match field {field}")));
                }
                let k = MultiplicityB { k1, k2 };
                (mu_from_multiplicity(k, c.q)?.0, k)
            }
            _ => match default_mu(field) {
                Some(mu) => (mu, multiplicity_from_mu(mu, field.d(), c.q)?),
                None => return Err(CliError::Validation("give either --mu or both --k1 and --k2".into())),
            },
        };
        Ok(RunConfig { field, q: c.q, mu, k, samples: c.samples, seed: c.seed, tol: c.tol, out: c.out.clone(), format: c.format })
    }

    /// The cone index; fails unless `k2 = d/2` for a division algebra.
    pub fn cone_index(&self) -> Result<ConeIndex, CliError> {
        if self.k.k2 != self.field.d() as f64 / 2.0 {
            return Err(CliError::Validation(format!("k2 = {} is not d/2 for any division algebra", self.k.k2)));
        }
        Ok(ConeIndex::new(self.field, self.q, self.mu)?)
    }

    pub fn meta(&self, command: &str) -> Vec<(String, String)> {
        vec![
            ("command".into(), command.into()),
            ("field".into(), self.field.to_string()),
            ("q".into(), self.q.to_string()),
            ("mu".into(), format!("{:.16e}", self.mu)),
            ("k1".into(), format!("{:.16e}", self.k.k1)),
            ("k2".into(), format!("{:.16e}", self.k.k2)),
            ("samples".into(), self.samples.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("tol".into(), format!("{:e}", self.tol)),
        ]
    }
}
