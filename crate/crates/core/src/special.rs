//! Scalar special functions: complex gamma, the normalized classical
//! Bessel function and an exponential tail sum.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// True when `z` is a pole of the gamma function.
pub fn is_gamma_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// `ln Γ(z)` on the principal branch (Lanczos, with reflection for
/// `Re z < 1/2`).
pub fn ln_gamma_complex(z: Complex64) -> Result<Complex64> {
    if is_gamma_pole(z) {
        return Err(Error::Pole(z.re));
    }
    if z.im == 0.0 {
        let (lg, sign) = ln_gamma_signed(z.re);
        let im = if sign < 0.0 { PI } else { 0.0 };
        return Ok(Complex64::new(lg, im));
    }
    if z.re < 0.5 {
        // Γ(z) Γ(1-z) = π / sin(π z)
        let s = (z * PI).sin();
        return Ok(Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma_complex(1.0 - z)?);
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln())
}

pub fn gamma_complex(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 {
        if is_gamma_pole(z) {
            return Err(Error::Pole(z.re));
        }
        return Ok(Complex64::new(statrs::function::gamma::gamma(z.re), 0.0));
    }
    Ok(ln_gamma_complex(z)?.exp())
}

/// `(ln |Γ(x)|, sign Γ(x))` for real `x` away from poles.
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    let lg = statrs::function::gamma::ln_gamma(x);
    let sign = if x > 0.0 || (x.floor() as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    (lg, sign)
}

pub fn gamma(x: f64) -> Result<f64> {
    if x <= 0.0 && x == x.round() {
        return Err(Error::Pole(x));
    }
    Ok(statrs::function::gamma::gamma(x))
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `Σ_{k>K} s^k / k!` for `s >= 0`.
pub fn exp_tail(s: f64, k_max: usize) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let k0 = k_max + 1;
    // log of the first omitted term
    let mut log_term = k0 as f64 * s.ln() - ln_gamma(k0 as f64 + 1.0);
    let mut k = k0;
    // sum from the first omitted term; terms rise until k ~ s then fall
    let mut acc = 0.0;
    let mut peak = f64::NEG_INFINITY;
    loop {
        let t = log_term.exp();
        acc += t;
        peak = peak.max(log_term);
        k += 1;
        log_term += s.ln() - (k as f64).ln();
        if k as f64 > s && log_term < peak - 40.0 {
            break;
        }
        if k > k0 + 100_000 {
            break;
        }
    }
    acc
}

/// Normalized Bessel function `j_a(z) = Γ(a+1) (2/z)^a J_a(z)
/// = Σ_n (-z²/4)^n / (n! (a+1)_n)`.
///
/// Real order and argument with `|z| > 6` use Miller's backward
/// recurrence, or Hankel's asymptotic expansion once `|z| >= 25 + a²`;
/// everything else sums the power series.
pub fn bessel_j_normalized(a: f64, z: f64) -> Result<f64> {
    if a + 1.0 <= 0.0 && a + 1.0 == (a + 1.0).round() {
        return Err(Error::PochhammerZero);
    }
    if z.abs() <= 6.0 || a <= -1.0 {
        return bessel_j_normalized_series(Complex64::new(a, 0.0), Complex64::new(z, 0.0))
            .map(|v| v.re);
    }
    if z.abs() >= 25.0 + a * a {
        return Ok(asymptotic_j_normalized(a, z.abs()));
    }
    Ok(miller_j_normalized(a, z.abs()))
}

/// `j_a(z)` from `J_a(z) ~ √(2/(πz)) (P cos χ - Q sin χ)`,
/// `χ = z - (a/2 + 1/4)π`, summed to the smallest term.
fn asymptotic_j_normalized(a: f64, z: f64) -> f64 {
    let mu4 = 4.0 * a * a;
    let (mut p, mut q) = (1.0, 0.0);
    let mut term = 1.0_f64;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu4 - odd * odd) / (8.0 * k as f64 * z);
        if next.abs() > term.abs() && k as f64 > a {
            break;
        }
        term = next;
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let phase = (0.5 * a + 0.25) * std::f64::consts::PI;
    let (sz, cz) = z.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let (cos_chi, sin_chi) = (cz * cp + sz * sp, sz * cp - cz * sp);
    let j = (2.0 / (std::f64::consts::PI * z)).sqrt() * (p * cos_chi - q * sin_chi);
    (ln_gamma(a + 1.0) + a * (2.0 / z).ln()).exp() * j
}

/// Power series for `j_a(z)`, complex order and argument.
pub fn bessel_j_normalized_series(a: Complex64, z: Complex64) -> Result<Complex64> {
    let w = -z * z / 4.0;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut small = 0;
    for n in 1..10_000 {
        let den = (a + n as f64) * n as f64;
        if den.norm() == 0.0 {
            return Err(Error::PochhammerZero);
        }
        term = term * w / den;
        sum += term;
        if term.norm() <= 1e-17 * sum.norm().max(1e-300) {
            small += 1;
            if small >= 2 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::SeriesCapExceeded { cap: 10_000 })
}

/// `j_a(z)` for real `a > -1`, `z > 0` by Miller's algorithm with the
/// Neumann normalization `(z/2)^a = Σ_k (a+2k) Γ(a+k)/k! J_{a+2k}(z)`.
fn miller_j_normalized(a: f64, z: f64) -> f64 {
    if a < 0.0 {
        // one downward step from the positive orders a+1, a+2
        let b = a + 1.0;
        let (pb, pb1, norm) = miller_ratio_parts(b, z);
        let pa = 2.0 * b / z * pb - pb1;
        return (z / 2.0) * pa / (norm * b);
    }
    let (p0, _, norm) = miller_ratio_parts(a, z);
    p0 / norm
}

/// Runs the backward recurrence for orders `a + n` and returns
/// `(p_a, p_{a+1}, N)` where `N = Σ_k w_k p_{a+2k}`,
/// `w_0 = 1`, `w_k = (a+2k)(a+1)_{k-1}/k!`.
fn miller_ratio_parts(a: f64, z: f64) -> (f64, f64, f64) {
    let start = (z + 30.0 + (40.0 * z).sqrt() + a.abs()).ceil() as usize;
    let start = start + (start % 2);
    let mut p_next = 0.0; // p_{a+n+1}
    let mut p = 1e-280; // p_{a+n}
    let mut values = vec![0.0; start + 2];
    values[start] = p;
    for n in (1..=start).rev() {
        let order = a + n as f64;
        let p_prev = 2.0 * order / z * p - p_next;
        p_next = p;
        p = p_prev;
        values[n - 1] = p;
        if p.abs() > 1e250 {
            for v in values.iter_mut().skip(n - 1) {
                *v *= 1e-250;
            }
            p *= 1e-250;
            p_next *= 1e-250;
        }
    }
    let mut norm = values[0];
    let mut w = 1.0;
    let mut k = 1;
    while 2 * k <= start {
        if k > 1 {
            w *= (a + (k - 1) as f64) / k as f64;
        }
        norm += (a + 2.0 * k as f64) * w * values[2 * k];
        k += 1;
    }
    (values[0], values[1], norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_gamma_agrees_with_real_gamma() {
        for &x in &[0.3, 1.0, 2.5, 7.25, -0.5, -2.7] {
            let g = ln_gamma_complex(Complex64::new(x, 1e-300)).unwrap().exp();
            let r = statrs::function::gamma::gamma(x);
            assert!((g.re - r).abs() < 1e-12 * r.abs().max(1.0), "{x}: {g} vs {r}");
        }
        // Γ(1 + i) from the reflection/recurrence-free value |Γ(1+i)|² = π / sinh π
        let g = gamma_complex(Complex64::new(1.0, 1.0)).unwrap();
        assert!((g.norm_sqr() - PI / PI.sinh()).abs() < 1e-13);
        let g = gamma_complex(Complex64::new(-1.5, 0.7)).unwrap();
        let g1 = gamma_complex(Complex64::new(-0.5, 0.7)).unwrap();
        assert!((g1 - g * Complex64::new(-1.5, 0.7)).norm() < 1e-12);
    }

    #[test]
    fn gamma_poles_are_errors() {
        assert_eq!(gamma(-2.0), Err(Error::Pole(-2.0)));
        assert!(gamma_complex(Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn exp_tail_small_cases() {
        let t = exp_tail(1.0, 10);
        let direct = std::f64::consts::E - (0..=10).map(|k| 1.0 / statrs::function::factorial::factorial(k)).sum::<f64>();
        assert!((t - direct).abs() < 1e-20 + 1e-6 * direct);
        assert!((t - 2.731266e-8).abs() < 1e-13);
        let head: f64 = (0..=5u64).map(|k| 30f64.powi(k as i32) / statrs::function::factorial::factorial(k)).sum();
        let big = exp_tail(30.0, 5);
        assert!((big - (30.0f64.exp() - head)).abs() < 1e-12 * big);
    }

    #[test]
    fn half_integer_orders_are_elementary() {
        for i in 0..200 {
            let z = 0.25 * i as f64;
            let s = if z == 0.0 { 1.0 } else { z.sin() / z };
            assert!((bessel_j_normalized(0.5, z).unwrap() - s).abs() < 1e-13, "z={z}");
            assert!((bessel_j_normalized(-0.5, z).unwrap() - z.cos()).abs() < 1e-13, "z={z}");
            let j32 = if z < 1e-3 { 1.0 - z * z / 10.0 } else { 3.0 * (z.sin() - z * z.cos()) / (z * z * z) };
            assert!((bessel_j_normalized(1.5, z).unwrap() - j32).abs() < 1e-12, "z={z}");
        }
    }

    #[test]
    fn asymptotic_and_miller_agree() {
        for &a in &[-0.5, 0.0, 0.3, 1.0, 2.7, 5.0] {
            for &z in &[40.0, 61.3, 100.0, 257.0, 900.0] {
                if z < 25.0 + a * a {
                    continue;
                }
                let envelope = (ln_gamma(a + 1.0) + a * (2.0 / z).ln()).exp() * (2.0 / (std::f64::consts::PI * z)).sqrt();
                let (x, y) = (asymptotic_j_normalized(a, z), miller_j_normalized(a, z));
                assert!((x - y).abs() < 1e-13 * envelope, "a={a} z={z}: {x} {y}");
            }
        }
    }

    #[test]
    fn miller_and_series_agree_in_overlap() {
        for &a in &[0.0, 0.3, 1.0, 2.7, 5.0] {
            for &z in &[6.5, 8.0, 10.0] {
                let m = miller_j_normalized(a, z);
                let s = bessel_j_normalized_series(Complex64::new(a, 0.0), Complex64::new(z, 0.0)).unwrap().re;
                assert!((m - s).abs() < 1e-10, "a={a} z={z}: {m} vs {s}");
            }
        }
    }
}
