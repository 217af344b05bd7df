//! Reproducible parallel Monte Carlo.
//!
//! A run with `n` samples is cut into chunks of [`CHUNK`] samples. Chunk `c`
//! draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `c`, so each
//! chunk's samples depend only on `(seed, c)`. Per-chunk moments are merged
//! in a fixed pairwise tree, which makes estimates bit-identical for any
//! number of worker threads.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const CHUNK: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    MonteCarlo,
    SphereLimit,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte_carlo",
            Method::SphereLimit => "sphere_limit",
        }
    }
}

/// A numerical integral with its error. For quadrature `std_error` holds
/// the deterministic error estimate, `n_samples` the number of integrand
/// evaluations and `seed` is `None`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub method: Method,
    pub seed: Option<u64>,
}

impl ConvolutionEstimate {
    pub fn exact(value: f64) -> Self {
        ConvolutionEstimate { value, std_error: 0.0, n_samples: 0, method: Method::Quadrature, seed: None }
    }

    /// `|self - other|` in units of the combined error, treating the two
    /// estimates as independent.
    pub fn z_score(&self, other: &ConvolutionEstimate) -> f64 {
        z_score(self.value - other.value, self.std_error.hypot(other.std_error))
    }

    /// `|self - x|` in units of `self.std_error`, with `x` exact.
    pub fn z_against(&self, x: f64) -> f64 {
        z_score(self.value - x, self.std_error)
    }
}

fn z_score(diff: f64, err: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else if err == 0.0 {
        f64::INFINITY
    } else {
        diff.abs() / err
    }
}

/// Complex-valued estimate; `std_error` bounds each component separately.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexEstimate {
    pub value: Complex64,
    pub std_error_re: f64,
    pub std_error_im: f64,
    pub n_samples: u64,
    pub method: Method,
    pub seed: Option<u64>,
}

impl ComplexEstimate {
    pub fn re(&self) -> ConvolutionEstimate {
        ConvolutionEstimate {
            value: self.value.re,
            std_error: self.std_error_re,
            n_samples: self.n_samples,
            method: self.method,
            seed: self.seed,
        }
    }

    pub fn im(&self) -> ConvolutionEstimate {
        ConvolutionEstimate {
            value: self.value.im,
            std_error: self.std_error_im,
            n_samples: self.n_samples,
            method: self.method,
            seed: self.seed,
        }
    }
}

/// Sample budget and seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        McConfig { samples, seed }
    }
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { samples: 100_000, seed: 0 }
    }
}

/// The generator for chunk `chunk` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Count, mean and centered second moment of a sample.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise update.
    pub fn merge(&self, other: &Moments) -> Moments {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let (na, nb) = (self.n as f64, other.n as f64);
        let delta = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * nb / n as f64,
            m2: self.m2 + other.m2 + delta * delta * na * nb / n as f64,
        }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    pub fn estimate(&self, method: Method, seed: u64) -> ConvolutionEstimate {
        ConvolutionEstimate {
            value: self.mean,
            std_error: self.std_error(),
            n_samples: self.n,
            method,
            seed: Some(seed),
        }
    }
}

fn tree_reduce(mut level: Vec<Vec<Moments>>) -> Vec<Moments> {
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|pair| match pair {
                [a, b] => a.iter().zip(b).map(|(x, y)| x.merge(y)).collect(),
                [a] => a.clone(),
                _ => unreachable!(),
            })
            .collect();
    }
    level.pop().unwrap_or_default()
}

/// Runs `sample` `cfg.samples` times, each call writing `dim` outputs, and
/// returns the moments of every output. The sampler may use the generator
/// freely; it sees the same stream for the same `(seed, chunk)`.
pub fn run<F>(cfg: McConfig, dim: usize, sample: F) -> Result<Vec<Moments>>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) -> Result<()> + Sync,
{
    let n_chunks = cfg.samples.div_ceil(CHUNK);
    let per_chunk: Result<Vec<Vec<Moments>>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(cfg.seed, c);
            let count = CHUNK.min(cfg.samples - c * CHUNK);
            let mut acc = vec![Moments::default(); dim];
            let mut buf = vec![0.0; dim];
            for _ in 0..count {
                sample(&mut rng, &mut buf)?;
                for (m, &x) in acc.iter_mut().zip(&buf) {
                    m.push(x);
                }
            }
            Ok(acc)
        })
        .collect();
    let per_chunk = per_chunk?;
    if per_chunk.is_empty() {
        return Ok(vec![Moments::default(); dim]);
    }
    Ok(tree_reduce(per_chunk))
}

/// [`run`] followed by conversion to estimates.
pub fn estimate<F>(cfg: McConfig, dim: usize, method: Method, sample: F) -> Result<Vec<ConvolutionEstimate>>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) -> Result<()> + Sync,
{
    Ok(run(cfg, dim, sample)?.iter().map(|m| m.estimate(method, cfg.seed)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        let m = a.merge(&b);
        assert_eq!(m.n, all.n);
        assert!((m.mean - all.mean).abs() < 1e-12);
        assert!((m.m2 - all.m2).abs() < 1e-9 * all.m2);
    }

    #[test]
    fn uniform_mean_and_thread_independence() {
        let cfg = McConfig::new(50_000, 7);
        let f = |rng: &mut ChaCha8Rng, out: &mut [f64]| {
            let u: f64 = rng.random();
            out[0] = u;
            out[1] = u * u;
            Ok(())
        };
        let est = estimate(cfg, 2, Method::MonteCarlo, f).unwrap();
        assert!(est[0].z_against(0.5) < 4.0);
        assert!(est[1].z_against(1.0 / 3.0) < 4.0);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| estimate(cfg, 2, Method::MonteCarlo, f).unwrap());
        assert_eq!(single, est);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let three = pool.install(|| estimate(cfg, 2, Method::MonteCarlo, f).unwrap());
        assert_eq!(three, est);
    }

    #[test]
    fn estimate_json_shape() {
        let e = ConvolutionEstimate { value: 1.5, std_error: 0.1, n_samples: 10, method: Method::MonteCarlo, seed: Some(3) };
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(s, r#"{"value":1.5,"std_error":0.1,"n_samples":10,"method":"monte_carlo","seed":3}"#);
    }
}
