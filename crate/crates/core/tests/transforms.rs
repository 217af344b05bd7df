use conebessel::bessel::{ConeBessel, SeriesParams};
use conebessel::chamber::ChamberPoint;
use conebessel::cone_hypergroup::{character_phi, convolve, haar_integral, Budget, ConeIndex, Route};
use conebessel::special::ln_gamma;
use conebessel::transforms::*;
use conebessel::{Error, Field, PsdMatrix};

fn diag(field: Field, x: &[f64]) -> PsdMatrix {
    PsdMatrix::diag(field, x).unwrap()
}

/// `∫_0^∞ j_{μ-1}(2√(sr)) e^{-r²} r^{μ-1} dr / Γ(μ)` by termwise
/// integration of the kernel series.
fn hankel_gaussian_series(mu: f64, s: f64) -> f64 {
    let mut sum = 0.0;
    for k in 0..200 {
        let kf = k as f64;
        let ln = ln_gamma((kf + mu) / 2.0) - ln_gamma(kf + 1.0) - ln_gamma(mu + kf);
        let term = 0.5 * (-s).powi(k) * ln.exp();
        sum += term;
        if k > 10 && term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

fn gaussian_in_r(c: f64) -> RadialFunction {
    RadialFunction::new("gaussian-in-r", Decay::Gaussian { rate: c }, move |r| {
        Ok((-c * r.as_matrix().frobenius_norm().powi(2)).exp())
    })
}

#[test]
fn rank_one_hankel_closed_forms() {
    let b = Budget::default();
    for mu in [0.7, 1.0, 2.5, 4.2] {
        let idx = ConeIndex::new(Field::R, 1, mu).unwrap();
        for a in [0.5, 1.0, 2.0] {
            for s in [0.0, 0.3, 2.0, 7.5] {
                let u = hankel_transform(&idx, &RadialFunction::exponential(a), &diag(Field::R, &[s]), &b).unwrap();
                let exact = a.powf(-mu) * (-s / a).exp();
                assert!((u.value - exact).abs() < 1e-10 * exact.max(1e-3), "mu={mu} a={a} s={s}: {} vs {exact}", u.value);
            }
        }
        for s in [0.0, 0.5, 1.7, 3.0] {
            let u = hankel_transform(&idx, &gaussian_in_r(1.0), &diag(Field::R, &[s]), &b).unwrap();
            let exact = hankel_gaussian_series(mu, s);
            assert!((u.value - exact).abs() < 1e-9, "mu={mu} s={s}: {} vs {exact}", u.value);
        }
    }
}

#[test]
fn q2_hankel_laplace_identity() {
    // U_μ(e^{-a tr r})(s) = a^{-qμ} e^{-tr s / a}
    for (field, mu, a) in [(Field::R, 2.3, 1.0), (Field::C, 3.1, 0.7)] {
        let idx = ConeIndex::new(field, 2, mu).unwrap();
        let s = diag(field, &[1.2, 0.4]);
        let u = hankel_transform(&idx, &RadialFunction::exponential(a), &s, &Budget::new(20_000, 4)).unwrap();
        let exact = a.powf(-2.0 * mu) * (-1.6 / a).exp();
        assert!(u.z_against(exact) < 3.5, "{u:?} vs {exact}");
        assert!(u.std_error < 1e-2 * exact);
    }
}

#[test]
fn hankel_linearity_matched_seeds() {
    let idx = ConeIndex::new(Field::R, 2, 2.6).unwrap();
    let s = diag(Field::R, &[0.8, 0.3]);
    let b = Budget::new(5000, 11);
    let f = RadialFunction::exponential(1.0);
    let g = RadialFunction::new("g", Decay::Exponential { rate: 1.0 }, |r| {
        Ok((-r.as_hermitian().trace()).exp() * (1.0 + r.as_hermitian().trace()))
    });
    let (f2, g2) = (f.clone(), g.clone());
    let h = RadialFunction::new("h", Decay::Exponential { rate: 1.0 }, move |r| Ok(2.0 * f2.eval(r)? - 0.5 * g2.eval(r)?));
    let uf = hankel_transform(&idx, &f, &s, &b).unwrap().value;
    let ug = hankel_transform(&idx, &g, &s, &b).unwrap().value;
    let uh = hankel_transform(&idx, &h, &s, &b).unwrap().value;
    assert!((uh - (2.0 * uf - 0.5 * ug)).abs() < 1e-12 * uh.abs().max(1.0));
}

#[test]
fn rank_one_involution() {
    let b = Budget::default().with_tol(1e-8);
    for mu in [1.0, 2.5] {
        let idx = ConeIndex::new(Field::R, 1, mu).unwrap();
        for f in [RadialFunction::exponential(0.8), gaussian_in_r(1.5), RadialFunction::bump(2.0)] {
            for r in [0.2, 1.6] {
                let rr = diag(Field::R, &[r]);
                let back = hankel_involution(&idx, &f, &rr, &b).unwrap().value;
                let orig = f.eval(&rr).unwrap();
                assert!((back - orig).abs() < 1e-6, "{} mu={mu} r={r}: {back} vs {orig}", f.label());
            }
        }
    }
}

#[test]
fn cone_fourier_gaussian_closed_form() {
    // ω_μ(φ_s e^{-c tr t²}) = (2c)^{-qμ} e^{-tr s² / (4c)}
    let b = Budget::default();
    let idx = ConeIndex::new(Field::R, 1, 1.8).unwrap();
    for c in [0.5, 1.3] {
        for s in [0.0, 0.7, 2.4] {
            let v = hypergroup_fourier_cone(&idx, &RadialFunction::gaussian(c), &diag(Field::R, &[s]), &b).unwrap();
            let exact = (2.0 * c).powf(-1.8) * (-s * s / (4.0 * c)).exp();
            assert!((v.value - exact).abs() < 1e-10, "{v:?} vs {exact}");
        }
    }
    for (field, mu) in [(Field::R, 2.4), (Field::C, 3.3)] {
        let idx = ConeIndex::new(field, 2, mu).unwrap();
        let s = diag(field, &[1.1, 0.5]);
        let v = hypergroup_fourier_cone(&idx, &RadialFunction::gaussian(0.5), &s, &Budget::new(20_000, 2)).unwrap();
        let exact = (-(1.21 + 0.25) / 2.0f64).exp();
        assert!(v.z_against(exact) < 3.5, "{v:?} vs {exact}");
    }
}

#[test]
fn cone_fourier_matches_hankel_route() {
    let b = Budget::default();
    let idx = ConeIndex::new(Field::R, 1, 2.2).unwrap();
    for f in [RadialFunction::bump(1.5), RadialFunction::gaussian(0.9)] {
        for s in [0.0, 1.0, 3.5] {
            let s = diag(Field::R, &[s]);
            let a = hypergroup_fourier_cone(&idx, &f, &s, &b).unwrap().value;
            let h = hypergroup_fourier_cone_via_hankel(&idx, &f, &s, &b).unwrap().value;
            assert!((a - h).abs() < 1e-9, "{a} vs {h}");
        }
    }
    let idx = ConeIndex::new(Field::C, 2, 3.0).unwrap();
    let s = diag(Field::C, &[1.4, 0.3]);
    let f = RadialFunction::gaussian(0.7);
    let a = hypergroup_fourier_cone(&idx, &f, &s, &Budget::new(20_000, 1)).unwrap();
    let h = hypergroup_fourier_cone_via_hankel(&idx, &f, &s, &Budget::new(20_000, 2)).unwrap();
    assert!(a.z_score(&h) < 3.5, "{a:?} vs {h:?}");
}

#[test]
fn fourier_at_trivial_character_is_haar() {
    let b = Budget::new(10_000, 3);
    for (q, mu) in [(1, 1.4), (2, 2.5)] {
        let idx = ConeIndex::new(Field::R, q, mu).unwrap();
        let f = RadialFunction::bump(1.2);
        let zero = diag(Field::R, &vec![0.0; q]);
        let a = hypergroup_fourier_cone(&idx, &f, &zero, &b).unwrap();
        let h = haar_integral(&idx, &f, &b).unwrap();
        assert!((a.value - h.value).abs() <= 1e-12 * h.value.abs(), "{a:?} vs {h:?}");
        let c = hypergroup_fourier_chamber(&idx, &f, &ChamberPoint::zero(q), &b).unwrap();
        assert!((c.value - h.value).abs() <= 1e-9 * h.value.abs() + 3.5 * h.std_error, "{c:?} vs {h:?}");
    }
}

#[test]
fn delta_at_origin_has_unit_transform() {
    for (field, q, mu) in [(Field::R, 1, 0.8), (Field::C, 2, 2.5), (Field::H, 2, 6.5)] {
        let bessel = ConeBessel::new(field, q, mu, SeriesParams::default()).unwrap();
        for s in [0.0, 1.0, 5.0] {
            let phi = character_phi(&bessel, &diag(field, &vec![s; q]));
            assert_eq!(phi(&diag(field, &vec![0.0; q])).unwrap(), 1.0);
        }
    }
}

#[test]
fn chamber_fourier_consistent_with_cone() {
    let idx = ConeIndex::new(Field::R, 2, 2.7).unwrap();
    let eta = ChamberPoint::new(vec![1.3, 0.6]).unwrap();
    let f = RadialFunction::gaussian(0.6);
    let b = Budget::new(20_000, 5);
    let ch = hypergroup_fourier_chamber(&idx, &f, &eta, &b).unwrap();
    let co = hypergroup_fourier_cone(&idx, &f, &eta.to_diag(Field::R), &Budget::new(20_000, 6)).unwrap();
    assert!(ch.z_score(&co) < 3.5, "{ch:?} vs {co:?}");
    let exact = 1.2f64.powf(-2.0 * 2.7) * (-(1.69 + 0.36) / 2.4f64).exp();
    assert!(ch.z_against(exact) < 3.5, "{ch:?} vs {exact}");
}

#[test]
fn chamber_fourier_rank_one_reduction() {
    // weight ξ^{2μ-1}: ∫ j_{μ-1}(ηξ) e^{-cξ²} ξ^{2μ-1} dξ = (2c)^{-μ} Γ(μ) 2^{μ-1} e^{-η²/(4c)}
    let mu = 1.6;
    let idx = ConeIndex::new(Field::C, 1, mu).unwrap();
    for (c, e) in [(0.5, 0.4), (2.0, 3.0)] {
        let v = hypergroup_fourier_chamber(&idx, &RadialFunction::gaussian(c), &ChamberPoint::new(vec![e]).unwrap(), &Budget::default())
            .unwrap()
            .value;
        let integral = (2.0 * c).powf(-mu) * ln_gamma(mu).exp() * 2f64.powf(mu - 1.0) * (-e * e / (4.0 * c)).exp();
        let weight_norm = 2f64.powf(1.0 - mu) / ln_gamma(mu).exp();
        assert!((v - weight_norm * integral).abs() < 1e-10);
    }
}

#[test]
fn rank_one_plancherel() {
    for mu in [1.0, 2.3] {
        let idx = ConeIndex::new(Field::R, 1, mu).unwrap();
        for f in [RadialFunction::gaussian(0.5), RadialFunction::gaussian(1.7), RadialFunction::bump(1.0), RadialFunction::bump(2.5)] {
            let p = plancherel_rank1(&idx, &f, &Budget::default()).unwrap();
            assert!(p.relative_defect() < 1e-5, "{} mu={mu}: {p:?}", f.label());
        }
    }
}

/// `x ↦ (f *_μ g)(x) = ∫ f(y) (δ_x *_μ δ_y)(g) dω_μ(y)` at `q = 1`.
fn rank_one_convolution(idx: ConeIndex, f: RadialFunction, g: RadialFunction, rf: f64, rg: f64) -> RadialFunction {
    RadialFunction::new("f*g", Decay::Compact { radius: rf + rg }, move |x| {
        let inner = RadialFunction::new("inner", Decay::Compact { radius: rf }, {
            let (x, f, g) = (x.clone(), f.clone(), g.clone());
            move |y| {
                let fy = f.eval(y)?;
                if fy == 0.0 {
                    return Ok(0.0);
                }
                let b = Budget::default().with_tol(1e-10);
                Ok(fy * convolve(&idx, &x, y, &[g.as_fn()], Route::Interior, &b)?[0].value)
            }
        });
        Ok(haar_integral(&idx, &inner, &Budget::default().with_tol(1e-9))?.value)
    })
}

#[test]
fn rank_one_convolution_theorem() {
    let idx = ConeIndex::new(Field::R, 1, 1.7).unwrap();
    let (f, g) = (RadialFunction::bump(1.0), RadialFunction::bump(1.5));
    let fg = rank_one_convolution(idx, f.clone(), g.clone(), 1.0, 1.5);
    let ff = rank_one_convolution(idx, f.clone(), f.clone(), 1.0, 1.0);
    let b = Budget::default().with_tol(1e-8);
    for s in [0.0, 1.6, 4.0] {
        let s = diag(Field::R, &[s]);
        let lhs = hypergroup_fourier_cone(&idx, &fg, &s, &b).unwrap().value;
        let fh = hypergroup_fourier_cone(&idx, &f, &s, &b).unwrap().value;
        let gh = hypergroup_fourier_cone(&idx, &g, &s, &b).unwrap().value;
        assert!((lhs - fh * gh).abs() < 1e-5 * (fh * gh).abs().max(1e-3), "{lhs} vs {}", fh * gh);
    }
    // an autocorrelation has a nonnegative transform
    for s in [2.9, 5.3] {
        let auto = hypergroup_fourier_cone(&idx, &ff, &diag(Field::R, &[s]), &b).unwrap().value;
        assert!(auto >= -1e-9, "{auto}");
    }
}

#[test]
fn unsupported_configurations() {
    let idx = ConeIndex::new(Field::R, 2, 2.5).unwrap();
    let e = haar_integral(&idx, &RadialFunction::exponential(1.0), &Budget::new(10, 0)).unwrap_err();
    assert!(matches!(e, Error::DecayInsufficient(_)));
    let idx3 = ConeIndex::new(Field::R, 3, 3.0).unwrap();
    let e = hankel_transform(&idx3, &RadialFunction::gaussian(1.0), &diag(Field::R, &[1.0, 1.0, 1.0]), &Budget::new(10, 0)).unwrap_err();
    assert!(matches!(e, Error::Unsupported(_)));
    let orbit = ConeIndex::new(Field::R, 2, 1.0).unwrap();
    let v = hankel_transform(&orbit, &RadialFunction::exponential(1.0), &diag(Field::R, &[0.5, 0.5]), &Budget::new(4000, 0)).unwrap();
    assert!(v.z_against((-1.0f64).exp()) < 3.5, "{v:?}");
}
