use conebessel::algebra::HermitianMatrix;
use conebessel::bessel::SeriesParams;
use conebessel::chamber::*;
use conebessel::cone_hypergroup::{seeded_rng, Budget, ConeIndex};
use conebessel::mc::{self, McConfig, Method};
use conebessel::sampling::stiefel;
use conebessel::{Field, MatrixF, Quaternion};
use num_complex::Complex64;
use rand::Rng;
use statrs::distribution::{Beta, ContinuousCDF};

fn cp(x: &[f64]) -> ChamberPoint {
    ChamberPoint::new(x.to_vec()).unwrap()
}

#[test]
fn character_chain() {
    let params = SeriesParams::default();
    for (field, mu, xi, eta) in [
        (Field::R, 2.2, cp(&[1.4, 0.3]), cp(&[0.9, 0.7])),
        (Field::C, 3.3, cp(&[1.1, 0.5]), cp(&[1.7, 0.2])),
    ] {
        let idx = ConeIndex::new(field, 2, mu).unwrap();
        let series = character_psi(&idx, &xi, &eta, params).unwrap().value;
        let swapped = character_psi(&idx, &eta, &xi, params).unwrap().value;
        assert!((series - swapped).abs() < 1e-10);
        let cached = Character::new(&idx, &eta, params).unwrap().eval(&xi).unwrap().value;
        assert!((series - cached).abs() < 1e-10);
        let k = multiplicity_from_mu(mu, field.d(), 2).unwrap();
        let z: Vec<Complex64> = xi.xi().iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let w: Vec<Complex64> = eta.xi().iter().map(|&x| Complex64::new(0.0, x)).collect();
        let dunkl = dunkl_bessel_b(k, &z, &w, params).unwrap().value;
        assert!((dunkl.re - series).abs() < 1e-10 && dunkl.im.abs() < 1e-10, "{dunkl} vs {series}");
        let mc = character_psi_mc(&idx, &xi, &eta, &Budget::new(40_000, 3)).unwrap();
        assert!(mc.z_against(series) < 3.5, "{mc:?} vs {series}");
        assert!(series.abs() <= 1.0);
    }
}

#[test]
fn character_at_zero_is_one() {
    let idx = ConeIndex::new(Field::H, 2, 7.0).unwrap();
    let v = character_psi(&idx, &cp(&[2.0, 1.0]), &ChamberPoint::zero(2), SeriesParams::default()).unwrap();
    assert_eq!(v.value, 1.0);
}

#[test]
fn chamber_multiplicativity() {
    let idx = ConeIndex::new(Field::R, 2, 2.1).unwrap();
    let zeta = cp(&[1.2, 0.6]);
    let psi = Character::new(&idx, &zeta, SeriesParams::default()).unwrap();
    let f = |c: &ChamberPoint| Ok(psi.eval(c)?.value);
    let (xi, eta) = (cp(&[1.0, 0.4]), cp(&[0.8, 0.5]));
    let e = chamber_convolve(&idx, &xi, &eta, &[&f], &Budget::new(40_000, 1)).unwrap()[0];
    let prod = f(&xi).unwrap() * f(&eta).unwrap();
    assert!(e.z_against(prod) < 3.5, "{e:?} vs {prod}");
    let alias = translate_invariant(&idx, &f, &[-0.4, 1.0], &[0.5, -0.8], &Budget::new(40_000, 1)).unwrap();
    assert_eq!(alias, e);
}

#[test]
fn chamber_neutral_and_mass() {
    let idx = ConeIndex::new(Field::C, 2, 2.0).unwrap();
    let f = |c: &ChamberPoint| Ok(c.xi()[0] + 2.0 * c.xi()[1]);
    let xi = cp(&[1.5, 0.5]);
    let e = chamber_convolve(&idx, &xi, &ChamberPoint::zero(2), &[&f], &Budget::new(10, 0)).unwrap()[0];
    assert_eq!(e.value, 2.5);
    let one = |_: &ChamberPoint| Ok(1.0);
    let e = chamber_convolve(&idx, &xi, &cp(&[1.0, 0.1]), &[&one], &Budget::new(1000, 0)).unwrap()[0];
    assert_eq!(e.value, 1.0);
}

/// Singular values of `x + y` with `x = σ₀ ξ` and `y = U σ₀ η V`.
fn gelfand_pair_sample(rng: &mut impl Rng, field: Field, p: usize, xi: &[f64], eta: &[f64]) -> ChamberPoint {
    let q = xi.len();
    let mut x = MatrixF::zeros(field, p, q);
    let mut y = MatrixF::zeros(field, p, q);
    for j in 0..q {
        x.set(j, j, Quaternion::real(xi[j]));
        y.set(j, j, Quaternion::real(eta[j]));
    }
    let u = stiefel(rng, field, p, p).unwrap();
    let v = stiefel(rng, field, q, q).unwrap();
    let s = x.add(&u.matmul(&y).matmul(&v));
    let g = HermitianMatrix::symmetrize(&s.adjoint().matmul(&s));
    ChamberPoint::representative(&g.spectrum().unwrap().iter().map(|l| l.max(0.0).sqrt()).collect::<Vec<_>>())
}

#[test]
fn orbit_index_matches_gelfand_pair() {
    for (field, p) in [(Field::R, 3), (Field::C, 2), (Field::R, 5)] {
        let mu = p as f64 * field.d() as f64 / 2.0;
        let idx = ConeIndex::new(field, 2, mu).unwrap();
        let (xi, eta) = (cp(&[1.3, 0.4]), cp(&[0.9, 0.6]));
        let fa = |c: &ChamberPoint| Ok(c.xi()[0]);
        let fb = |c: &ChamberPoint| Ok((-c.norm().powi(2)).exp());
        let a = chamber_convolve(&idx, &xi, &eta, &[&fa, &fb], &Budget::new(40_000, 1)).unwrap();
        let b = mc::estimate(McConfig::new(40_000, 2), 2, Method::MonteCarlo, |rng, out| {
            let c = gelfand_pair_sample(rng, field, p, xi.xi(), eta.xi());
            out[0] = fa(&c)?;
            out[1] = fb(&c)?;
            Ok(())
        })
        .unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(x.z_score(y) < 3.5, "{field} p={p}: {x:?} vs {y:?}");
        }
    }
}

#[test]
fn singular_spectra_support() {
    // μ = pd/2: the convolution points are singular spectra of x + y, so
    // ξ_1 <= |ξ| + |η| componentwise bounds hold, and the largest value is
    // at least |ξ_1 - η_1|.
    let idx = ConeIndex::new(Field::R, 2, 1.5).unwrap();
    let (xi, eta) = (cp(&[1.3, 0.4]), cp(&[0.9, 0.6]));
    for c in sample_chamber_points(&idx, &xi, &eta, 3000, 4).unwrap() {
        assert!(c.xi()[0] <= 1.3 + 0.9 + 1e-9);
        assert!(c.xi()[0] >= 0.4 - 1e-9);
    }
}

#[test]
fn haar_unitary_first_column_law() {
    // a real coordinate of a uniform unit vector in R^n: x² ~ Beta(1/2, (n-1)/2)
    for (field, q) in [(Field::R, 3), (Field::C, 2), (Field::H, 2)] {
        let n = (field.d() * q) as f64;
        let law = Beta::new(0.5, (n - 1.0) / 2.0).unwrap();
        let mut rng = seeded_rng(5);
        let w = sample_uq_haar(&mut seeded_rng(99), field, q).unwrap();
        for left in [false, true] {
            let mut xs: Vec<f64> = (0..4000)
                .map(|_| {
                    let mut u = sample_uq_haar(&mut rng, field, q).unwrap();
                    if left {
                        u = w.matmul(&u);
                    }
                    u.get(0, 0).a.powi(2)
                })
                .collect();
            xs.sort_by(f64::total_cmp);
            let m = xs.len() as f64;
            let ks = xs
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let c = law.cdf(x);
                    (c - i as f64 / m).abs().max(((i + 1) as f64 / m - c).abs())
                })
                .fold(0.0, f64::max);
            assert!(ks < 1.628 / m.sqrt(), "{field} left={left}: KS {ks}");
        }
    }
}

#[test]
fn haar_unitary_mean_zero() {
    let field = Field::C;
    let est = mc::estimate(McConfig::new(20_000, 8), 8, Method::MonteCarlo, |rng, out| {
        let u = sample_uq_haar(rng, field, 2).unwrap();
        for (k, e) in u.data().iter().enumerate() {
            out[2 * k] = e.a;
            out[2 * k + 1] = e.b;
        }
        Ok(())
    })
    .unwrap();
    for e in est {
        assert!(e.z_against(0.0) < 4.0, "{e:?}");
    }
}

#[test]
fn weight_proportional_to_density() {
    let mut rng = seeded_rng(6);
    for (field, q, mu) in [(Field::R, 2, 2.3), (Field::C, 3, 5.5), (Field::H, 2, 6.1)] {
        let idx = ConeIndex::new(field, q, mu).unwrap();
        let k = multiplicity_from_mu(mu, field.d(), q).unwrap();
        let mut ratios = Vec::new();
        for _ in 0..100 {
            let x: Vec<f64> = (0..q).map(|_| rng.random_range(0.05..2.0)).collect();
            let c = ChamberPoint::representative(&x);
            ratios.push(chamber_haar_density(&idx, &c) / dunkl_weight_b(k, c.xi()));
        }
        let r0 = ratios[0];
        assert!(ratios.iter().all(|r| (r / r0 - 1.0).abs() < 1e-12), "{ratios:?}");
        assert!((r0 - 1.0).abs() < 1e-12);
    }
}

#[test]
fn dunkl_bessel_invariances() {
    let k = MultiplicityB { k1: 0.7, k2: 0.5 };
    let p = SeriesParams::default();
    let c = |a: f64, b: f64| Complex64::new(a, b);
    let z = [c(0.8, 0.1), c(-0.3, 0.4)];
    let w = [c(0.2, -0.5), c(1.1, 0.0)];
    let base = dunkl_bessel_b(k, &z, &w, p).unwrap().value;
    for zz in [[z[1], z[0]], [-z[0], z[1]], [z[1], -z[0]]] {
        let v = dunkl_bessel_b(k, &zz, &w, p).unwrap().value;
        assert!((v - base).norm() < 1e-12);
    }
    let zero = dunkl_bessel_b(k, &z, &[c(0.0, 0.0); 2], p).unwrap().value;
    assert_eq!(zero, c(1.0, 0.0));
    // holomorphy: derivatives along the real and imaginary directions agree
    let h = 1e-4;
    let f = |dz: Complex64| dunkl_bessel_b(k, &[z[0] + dz, z[1]], &w, p).unwrap().value;
    let d_re = (f(c(h, 0.0)) - f(c(-h, 0.0))) / (2.0 * h);
    let d_im = (f(c(0.0, h)) - f(c(0.0, -h))) / c(0.0, 2.0 * h);
    assert!((d_re - d_im).norm() < 1e-6, "{d_re} {d_im}");
}

#[test]
fn d_mu_q2_matches_pushforward_constant() {
    // for q=2, d=1 the Gaussian-weighted integral separates in polar
    // coordinates: ∫ R^{4μ-1} e^{-R²/2} dR · ∫_0^{π/4} (sin 2θ / 2)^{2γ+1} cos(2θ)^d dθ
    let mu = 2.4;
    let idx = ConeIndex::new(Field::R, 2, mu).unwrap();
    let e = 2.0 * idx.gamma() + 1.0;
    let radial = 2f64.powf(2.0 * mu - 1.0) * statrs::function::gamma::gamma(2.0 * mu);
    let angular = conebessel::quad::integrate(
        |t| (0.5 * (2.0 * t).sin()).powf(e) * (2.0 * t).cos(),
        0.0,
        std::f64::consts::FRAC_PI_4,
        Default::default(),
    )
    .unwrap()
    .value;
    let exact = 1.0 / (radial * angular);
    let d = d_mu_normalization(&idx, &Budget::new(200_000, 1)).unwrap();
    assert!(d.z_against(exact) < 3.5, "{d:?} vs {exact}");
}
