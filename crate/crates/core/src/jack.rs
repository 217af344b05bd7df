//! Jack polynomials `C_λ^α` in `C`-normalization, `(Σ ξ_i)^k = Σ_{|λ|=k} C_λ^α(ξ)`.
//!
//! For each weight `k` and number of variables `q` the monomial
//! coefficients of all `C_λ^α` are computed at once. `P_λ` is the unique
//! eigenfunction of
//!
//! ```text
//! D = (α/2) Σ_i x_i² ∂_i² + Σ_{i≠j} x_i² / (x_i - x_j) ∂_i
//! ```
//!
//! that is monic and triangular in the monomial basis, so its coefficients
//! follow from a triangular solve over partitions in reverse lexicographic
//! order. All quantities in the solve are nonnegative, so there is no
//! cancellation. `C_λ = α^k k! / Π_s (l(s) + α (a(s)+1)) · P_λ`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::algebra::HermitianMatrix;
use crate::error::{Error, Result};
use crate::partition::{partitions, Partition};
use crate::scalar::Scalar;

/// Monomial expansions of every `C_λ^α` of one weight.
#[derive(Debug)]
pub struct JackLayer {
    pub weight: usize,
    pub partitions: Vec<Partition>,
    /// Exponent vectors of the monomial symmetric function `m_κ`, per `κ`.
    pub monomials: Vec<Vec<Vec<u32>>>,
    /// `C_λ = Σ coeffs[λ][..].1 · m_{coeffs[λ][..].0}`.
    pub coeffs: Vec<Vec<(usize, f64)>>,
}

impl JackLayer {
    fn build(alpha: f64, q: usize, k: usize) -> JackLayer {
        let parts = partitions(q, k);
        let m = parts.len();
        let index: HashMap<Vec<u32>, usize> =
            parts.iter().enumerate().map(|(i, p)| (p.parts().to_vec(), i)).collect();
        let monomials: Vec<Vec<Vec<u32>>> = parts.iter().map(|p| p.distinct_permutations()).collect();

        let (diag, off) = off_diagonal_operator(q, &index, &monomials);

        let eig: Vec<f64> = parts
            .iter()
            .zip(&diag)
            .map(|(p, &b)| {
                let a: f64 = p.parts().iter().map(|&x| (x as f64) * (x as f64 - 1.0)).sum();
                0.5 * alpha * a + b
            })
            .collect();

        let log_fact_k = crate::special::ln_gamma(k as f64 + 1.0);
        let mut coeffs = Vec::with_capacity(m);
        let mut u = vec![0.0; m];
        for li in 0..m {
            u.iter_mut().for_each(|x| *x = 0.0);
            u[li] = 1.0;
            for mi in li + 1..m {
                let mut s = 0.0;
                for &(ki, c) in &off[mi] {
                    if ki >= li && ki < mi {
                        s += u[ki] * c;
                    }
                }
                if s != 0.0 {
                    u[mi] = s / (eig[li] - eig[mi]);
                }
            }
            let log_scale =
                k as f64 * alpha.ln() + log_fact_k - log_upper_hook(&parts[li], alpha);
            let scale = log_scale.exp();
            coeffs.push(
                (li..m).filter(|&i| u[i] != 0.0).map(|i| (i, u[i] * scale)).collect::<Vec<_>>(),
            );
        }
        JackLayer { weight: k, partitions: parts, monomials, coeffs }
    }

    pub fn index_of(&self, lambda: &Partition) -> Option<usize> {
        self.partitions.iter().position(|p| p == lambda)
    }

    /// `m_κ(x)` for every `κ` of this weight.
    pub fn monomial_values<T: Scalar>(&self, pows: &PowerTable<T>) -> Vec<T> {
        self.monomials
            .iter()
            .map(|perms| {
                let mut acc = T::from(0.0);
                for e in perms {
                    let mut t = T::from(1.0);
                    for (i, &ei) in e.iter().enumerate() {
                        if ei > 0 {
                            t = t * pows.get(i, ei as usize);
                        }
                    }
                    acc = acc + t;
                }
                acc
            })
            .collect()
    }

    /// `C_λ(x)` for every `λ` of this weight, given monomial values.
    pub fn jack_values<T: Scalar>(&self, mono: &[T]) -> Vec<T> {
        self.coeffs
            .iter()
            .map(|row| row.iter().fold(T::from(0.0), |acc, &(k, c)| acc + mono[k] * c))
            .collect()
    }
}

/// The `α`-free part `Σ_{i<j} (x_i² ∂_i - x_j² ∂_j) / (x_i - x_j)` of the
/// operator on monomial symmetric functions: its diagonal and, for each
/// `ν`, the list of `(κ, coefficient of m_ν in B m_κ)` with `κ ≠ ν`.
fn off_diagonal_operator(
    q: usize,
    index: &HashMap<Vec<u32>, usize>,
    monomials: &[Vec<Vec<u32>>],
) -> (Vec<f64>, Vec<Vec<(usize, f64)>>) {
    let m = monomials.len();
    let mut diag = vec![0.0; m];
    let mut off: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    let mut f = vec![0u32; q];
    for (ki, perms) in monomials.iter().enumerate() {
        let mut acc: HashMap<usize, f64> = HashMap::new();
        for e in perms {
            for i in 0..q {
                for j in i + 1..q {
                    let (a, b) = (e[i], e[j]);
                    if a == b {
                        if a > 0 && is_nonincreasing(e) {
                            *acc.entry(index[e]).or_insert(0.0) += a as f64;
                        }
                    } else if a > b {
                        // the pair x_i^a x_j^b + x_i^b x_j^a maps to
                        // a Σ_{l=0}^{a-b} x_i^{b+l} x_j^{a-l} - b Σ_{l=1}^{a-b-1} (same)
                        for l in 0..=(a - b) {
                            f.copy_from_slice(e);
                            f[i] = b + l;
                            f[j] = a - l;
                            if !is_nonincreasing(&f) {
                                continue;
                            }
                            let c = if l == 0 || l == a - b { a } else { a - b };
                            *acc.entry(index[&f]).or_insert(0.0) += c as f64;
                        }
                    }
                }
            }
        }
        for (ni, c) in acc {
            if ni == ki {
                diag[ki] = c;
            } else {
                off[ni].push((ki, c));
            }
        }
    }
    for row in off.iter_mut() {
        row.sort_by_key(|&(k, _)| k);
    }
    (diag, off)
}

fn is_nonincreasing(e: &[u32]) -> bool {
    e.windows(2).all(|w| w[0] >= w[1])
}

/// `ln Π_{s∈λ} (l(s) + α (a(s)+1))`.
fn log_upper_hook(lambda: &Partition, alpha: f64) -> f64 {
    let conj = lambda.conjugate();
    let mut acc = 0.0;
    for (i, &row) in lambda.parts().iter().enumerate() {
        for j in 0..row as usize {
            let arm = (row as usize - j - 1) as f64;
            let leg = (conj[j] as usize - i - 1) as f64;
            acc += (leg + alpha * (arm + 1.0)).ln();
        }
    }
    acc
}

/// `ln Π_{s∈λ} (l(s) + 1 + α a(s))`.
fn log_lower_hook(lambda: &Partition, alpha: f64) -> f64 {
    let conj = lambda.conjugate();
    let mut acc = 0.0;
    for (i, &row) in lambda.parts().iter().enumerate() {
        for j in 0..row as usize {
            let arm = (row as usize - j - 1) as f64;
            let leg = (conj[j] as usize - i - 1) as f64;
            acc += (leg + 1.0 + alpha * arm).ln();
        }
    }
    acc
}

/// Powers `x_i^e` for `e <= max_exp`.
pub struct PowerTable<T> {
    stride: usize,
    data: Vec<T>,
}

impl<T: Scalar> PowerTable<T> {
    pub fn new(x: &[T], max_exp: usize) -> Self {
        let stride = max_exp + 1;
        let mut data = Vec::with_capacity(x.len() * stride);
        for &xi in x {
            let mut p = T::from(1.0);
            data.push(p);
            for _ in 0..max_exp {
                p = p * xi;
                data.push(p);
            }
        }
        PowerTable { stride, data }
    }

    #[inline]
    pub fn get(&self, i: usize, e: usize) -> T {
        self.data[i * self.stride + e]
    }

    pub fn max_exp(&self) -> usize {
        self.stride - 1
    }
}

/// Cached Jack layers for one `(α, q)`.
#[derive(Debug)]
pub struct JackContext {
    alpha: f64,
    q: usize,
    layers: Mutex<Vec<Option<Arc<JackLayer>>>>,
}

impl JackContext {
    /// Shared context for `(α, q)`.
    pub fn get(alpha: f64, q: usize) -> Arc<JackContext> {
        static REGISTRY: OnceLock<Mutex<HashMap<(u64, usize), Arc<JackContext>>>> = OnceLock::new();
        let reg = REGISTRY.get_or_init(|| Mutex::new(HashMap::new()));
        let mut reg = reg.lock().expect("jack registry poisoned");
        reg.entry((alpha.to_bits(), q))
            .or_insert_with(|| Arc::new(JackContext { alpha, q, layers: Mutex::new(Vec::new()) }))
            .clone()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn layer(&self, k: usize) -> Arc<JackLayer> {
        {
            let layers = self.layers.lock().expect("jack cache poisoned");
            if let Some(Some(l)) = layers.get(k) {
                return l.clone();
            }
        }
        let built = Arc::new(JackLayer::build(self.alpha, self.q, k));
        let mut layers = self.layers.lock().expect("jack cache poisoned");
        if layers.len() <= k {
            layers.resize(k + 1, None);
        }
        layers[k].get_or_insert(built).clone()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("Jack parameter must be positive, got {alpha}")));
    }
    Ok(())
}

/// Monomial expansion `C_λ^α = Σ_κ c_κ m_κ` in `q` variables.
pub fn monomial_coefficients(lambda: &Partition, alpha: f64, q: usize) -> Result<Vec<(Partition, f64)>> {
    check_alpha(alpha)?;
    let lambda = Partition::with_len(lambda.parts().to_vec(), q)?;
    let layer = JackContext::get(alpha, q).layer(lambda.weight());
    let li = layer.index_of(&lambda).expect("partition enumerated");
    Ok(layer.coeffs[li].iter().map(|&(k, c)| (layer.partitions[k].clone(), c)).collect())
}

/// `C_λ^α(ξ)`. `λ` may have fewer than `len(ξ)` parts.
pub fn jack_c<T: Scalar>(lambda: &Partition, alpha: f64, xi: &[T]) -> Result<T> {
    check_alpha(alpha)?;
    let q = xi.len();
    let lambda = Partition::with_len(lambda.parts().to_vec(), q)?;
    let k = lambda.weight();
    let layer = JackContext::get(alpha, q).layer(k);
    let li = layer.index_of(&lambda).expect("partition enumerated");
    let pows = PowerTable::new(xi, k);
    let mut acc = T::from(0.0);
    for &(ki, c) in &layer.coeffs[li] {
        let mut m = T::from(0.0);
        for e in &layer.monomials[ki] {
            let mut t = T::from(1.0);
            for (i, &ei) in e.iter().enumerate() {
                t = t * pows.get(i, ei as usize);
            }
            m = m + t;
        }
        acc = acc + m * c;
    }
    Ok(acc)
}

/// `C_λ^α(1, ..., 1)` with `q` ones, from the closed form
/// `α^k k! Π_{(i,j)∈λ} (q - i + 1 + α (j-1)) / (h^*_λ h_*^λ)`.
pub fn jack_c_at_ones(lambda: &Partition, alpha: f64, q: usize) -> Result<f64> {
    check_alpha(alpha)?;
    let lambda = Partition::with_len(lambda.parts().to_vec(), q)?;
    let k = lambda.weight();
    let mut log_num = k as f64 * alpha.ln() + crate::special::ln_gamma(k as f64 + 1.0);
    for (i, &row) in lambda.parts().iter().enumerate() {
        for j in 0..row as usize {
            log_num += (q as f64 - i as f64 + alpha * j as f64).ln();
        }
    }
    Ok((log_num - log_upper_hook(&lambda, alpha) - log_lower_hook(&lambda, alpha)).exp())
}

/// `(c)_λ^α = Π_j (c - (j-1)/α)_{λ_j}`.
pub fn pochhammer(c: Complex64, lambda: &Partition, alpha: f64) -> Complex64 {
    let mut out = Complex64::new(1.0, 0.0);
    for (j, &lj) in lambda.parts().iter().enumerate() {
        let base = c - j as f64 / alpha;
        for i in 0..lj {
            out *= base + i as f64;
        }
    }
    out
}

pub fn pochhammer_real(c: f64, lambda: &Partition, alpha: f64) -> f64 {
    let mut out = 1.0;
    for (j, &lj) in lambda.parts().iter().enumerate() {
        let base = c - j as f64 / alpha;
        for i in 0..lj {
            out *= base + i as f64;
        }
    }
    out
}

/// Spherical polynomial `Z_λ(x) = C_λ^{2/d}(spec x)`.
pub fn zonal_z(lambda: &Partition, x: &HermitianMatrix) -> Result<f64> {
    let alpha = 2.0 / x.field().d() as f64;
    jack_c(lambda, alpha, &x.spectrum()?)
}

/// Relative defect of `Σ_{|λ|=k} C_λ^α(ξ) = (Σ ξ_i)^k`.
pub fn jack_normalization_residual(k: usize, alpha: f64, xi: &[f64]) -> Result<f64> {
    check_alpha(alpha)?;
    let layer = JackContext::get(alpha, xi.len()).layer(k);
    let pows = PowerTable::new(xi, k);
    let mono = layer.monomial_values(&pows);
    let total: f64 = layer.jack_values(&mono).iter().sum();
    let s: f64 = xi.iter().sum();
    let target = s.powi(k as i32);
    let scale = xi.iter().map(|x| x.abs()).sum::<f64>().powi(k as i32).max(f64::MIN_POSITIVE);
    Ok((total - target).abs() / scale)
}
