mod common;

use cbop::measure::{Density, DensityMeasure, Potential, QuadratureRule};
use cbop::rhp::*;
use cbop::scalar::ratio;
use cbop::{Bundle, Frame, Rational};
use common::*;
use num_complex::Complex64;
use num_traits::{One, Zero};

fn points() -> Vec<Rational> {
    vec![ratio(1, 3), ratio(-13, 2), ratio(101, 1), ratio(-1, 9), ratio(23, 4)]
}

#[test]
fn unit_determinant_exact() {
    let bundle = exact_bundle(6);
    for n in 2..=5 {
        for w in points() {
            let g = assemble_gamma(&bundle, n, &w, GammaSign::Corrected).unwrap();
            assert!(g.det().is_one(), "n={n} w={w}");
            let p = assemble_gamma(&bundle, n, &w, GammaSign::AsPrinted).unwrap();
            assert_eq!(p.det(), -Rational::one());
        }
    }
    for n in 1..=5 {
        for z in points() {
            let g = assemble_gamma_hat(&bundle, n, &z).unwrap();
            assert!(g.det().is_one(), "n={n} z={z}");
        }
    }
}

#[test]
fn both_routes_agree_exact() {
    let bundle = exact_bundle(6);
    for n in 2..=5 {
        for w in points() {
            for sign in [GammaSign::Corrected, GammaSign::AsPrinted] {
                let a = assemble_gamma(&bundle, n, &w, sign).unwrap();
                let b = assemble_gamma_prefactor(&bundle, n, &w, sign).unwrap();
                assert_eq!(a, b);
            }
        }
    }
    for n in 1..=5 {
        for z in points() {
            assert_eq!(assemble_gamma_hat(&bundle, n, &z).unwrap(), assemble_gamma_hat_prefactor(&bundle, n, &z).unwrap());
        }
    }
}

#[test]
fn frame_independent() {
    let (a, b) = six_atom_pair();
    let monic = Bundle::new(a.clone(), b.clone(), 5, Frame::MonicDual).unwrap();
    let float = Bundle::new(a.to_f64(), b.to_f64(), 5, Frame::Normalized).unwrap();
    for n in 2..=4 {
        let w = ratio(7, 3);
        let e = assemble_gamma(&monic, n, &w, GammaSign::Corrected).unwrap();
        let f = assemble_gamma(&float, n, &(7.0 / 3.0), GammaSign::Corrected).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let (x, y) = (cbop::scalar::Scalar::to_f64(&e.entries[i][j]), f.entries[i][j]);
                assert!((x - y).abs() <= 1e-8 * x.abs().max(1e-3), "n={n} ({i},{j}) {x} {y}");
            }
        }
    }
}

#[test]
fn float_determinant_complex() {
    let bundle = float_bundle(5);
    for w in [Complex64::new(0.5, 1.0), Complex64::new(-4.0, 0.3), Complex64::new(20.0, -7.0)] {
        for n in 2..=4 {
            let g = assemble_gamma(&bundle, n, &w, GammaSign::Corrected).unwrap();
            assert!((g.det() - 1.0).norm() < 1e-12, "{}", g.det());
        }
        for n in 1..=4 {
            let g = assemble_gamma_hat(&bundle, n, &w).unwrap();
            assert!((g.det() - 1.0).norm() < 1e-12, "{}", g.det());
        }
    }
}

#[test]
fn asymptotics_exact() {
    let bundle = exact_bundle(6);
    for n in 2..=5 {
        let c = asymptotic_check(&bundle, n, Which::Gamma, GammaSign::Corrected).unwrap();
        assert!(c.passed, "n={n} {:?}", c.limit);
        assert_eq!(c.leading_powers[0][0], Some(n as i64));
        assert_eq!(c.leading_powers[1][1], Some(-1));
        assert_eq!(c.leading_powers[2][2], Some(1 - n as i64));
        let printed = asymptotic_check(&bundle, n, Which::Gamma, GammaSign::AsPrinted).unwrap();
        assert!(!printed.passed);
        assert_eq!(printed.limit[2][2], -Rational::one());
    }
    for n in 1..=5 {
        let c = asymptotic_check(&bundle, n, Which::GammaHat, GammaSign::Corrected).unwrap();
        assert!(c.passed, "n={n}");
        assert_eq!(c.leading_powers[0][0], Some(n as i64));
        assert_eq!(c.leading_powers[1][1], Some(0));
        assert!(c.limit[1][1].is_one());
    }
}

#[test]
fn asymptotics_float() {
    // the certificate proper is exact; in floating point the structural
    // zeros of the tail are only cancellation-accurate, so compare limits
    let float = float_bundle(5);
    let exact = exact_bundle(5);
    for n in 2..=4 {
        for which in [Which::Gamma, Which::GammaHat] {
            let f = asymptotic_check(&float, n, which, GammaSign::Corrected).unwrap();
            let e = asymptotic_check(&exact, n, which, GammaSign::Corrected).unwrap();
            assert!(e.passed);
            for i in 0..3 {
                for j in 0..3 {
                    let want = cbop::scalar::ratio_to_f64(&e.limit[i][j]);
                    assert!((f.limit[i][j] - want).abs() < 1e-9, "n={n} ({i},{j}) {} {want}", f.limit[i][j]);
                }
            }
        }
    }
}

#[test]
fn constants_round_trip() {
    // four atoms each
    let alpha = cbop::measure::DiscreteMeasure::from_decimal(&[("1", "1"), ("2", "1/2"), ("4", "2"), ("7", "1")]).unwrap();
    let beta = cbop::measure::DiscreteMeasure::from_decimal(&[("1/2", "1"), ("3", "1"), ("5", "1/3"), ("6", "2")]).unwrap();
    let bundle = Bundle::new(alpha, beta, 4, Frame::MonicDual).unwrap();
    for n in 2..=3 {
        let got = extract_constants(&bundle, n).unwrap();
        let want = expected_constants(&bundle, n);
        assert_eq!(got, want, "n={n}");
        assert_eq!(got.c_sq, bundle.family.h(n - 1).clone());
    }
    let big = exact_bundle(6);
    for n in 2..=5 {
        assert_eq!(extract_constants(&big, n).unwrap(), expected_constants(&big, n));
    }
    let float = float_bundle(5);
    for n in 2..=4 {
        let got = extract_constants(&float, n).unwrap();
        let want = expected_constants(&float, n);
        assert!((got.eta_sq - want.eta_sq).abs() < 1e-10 * want.eta_sq);
        assert!((got.c_sq - want.c_sq).abs() < 1e-10 * want.c_sq);
    }
}

#[test]
fn limits_at_large_argument() {
    let bundle = exact_bundle(5);
    let w = Rational::from_integer(10.into()).pow(12);
    for n in [2usize, 3] {
        let g = assemble_gamma(&bundle, n, &w, GammaSign::Corrected).unwrap();
        let sign = if n % 2 == 0 { ratio(1, 1) } else { ratio(-1, 1) };
        let inv_eta_sq = sign.clone() * w.clone() * g.entries[1][0].clone() * g.entries[1][2].clone();
        let want = expected_constants(&bundle, n);
        let rel = (inv_eta_sq * want.eta_sq.clone() - ratio(1, 1)).to_f64_lossy();
        assert!(rel.abs() < 1e-9, "{rel}");
    }
}

trait Lossy {
    fn to_f64_lossy(&self) -> f64;
}
impl Lossy for Rational {
    fn to_f64_lossy(&self) -> f64 {
        cbop::scalar::Scalar::to_f64(self)
    }
}

#[test]
fn too_small_degree_rejected() {
    let bundle = exact_bundle(4);
    assert!(assemble_gamma(&bundle, 1, &ratio(1, 3), GammaSign::Corrected).is_err());
    assert!(assemble_gamma(&bundle, 4, &ratio(1, 3), GammaSign::Corrected).is_err());
    assert!(assemble_gamma_hat(&bundle, 0, &ratio(1, 3)).is_err());
    assert!(matches!(
        assemble_gamma(&bundle, 2, &ratio(3, 1), GammaSign::Corrected),
        Err(cbop::Error::PoleEvaluation(_))
    ));
    assert!(Rational::zero().is_zero());
}

fn uniform_pair(order: usize) -> DensityPair {
    let m = DensityMeasure::new((1.0, 2.0), Density::constant(1.0), QuadratureRule::GaussLegendre, 40).unwrap();
    DensityPair::new(m.clone(), m, order).unwrap()
}

#[test]
fn jump_uniform_density() {
    let pair = uniform_pair(4);
    let eps = [1e-4, 1e-5, 1e-6];
    let study = pair.jump_study(Which::Gamma, 2, 1.5, &eps).unwrap();
    assert!(study.relative()[0] < 1e-2, "{study:?}");
    assert!(study.linear(), "{study:?}");
    // second cut, on the negative axis
    let second = pair.jump_study(Which::Gamma, 2, -1.3, &eps).unwrap();
    assert!(second.relative()[0] < 1e-2 && second.linear(), "{second:?}");
    for w0 in [1.5, -1.7] {
        let hat = pair.jump_study(Which::GammaHat, 2, w0, &eps).unwrap();
        assert!(hat.relative()[0] < 1e-2 && hat.linear(), "{hat:?}");
    }
}

#[test]
fn off_cut_analytic_and_errors() {
    let pair = uniform_pair(4);
    for w in [0.5, 3.0, -0.5, -3.0] {
        assert!(pair.analyticity_residual(Which::Gamma, 2, w, 1e-6).unwrap() < 1e-3);
    }
    assert!(matches!(pair.jump_residual(Which::Gamma, 2, 3.0, 1e-4), Err(cbop::Error::NotInSupport(_))));
    assert!(pair.analyticity_residual(Which::Gamma, 2, 1.5, 1e-6).is_err());
}

#[test]
fn density_determinant() {
    let pair = uniform_pair(4);
    for w in [Complex64::new(1.5, 0.5), Complex64::new(-1.2, 0.1), Complex64::new(4.0, -2.0)] {
        let g = pair.matrix_at(Which::Gamma, 2, w).unwrap();
        assert!((g.det() - 1.0).norm() < 1e-8, "{}", g.det());
        let h = pair.matrix_at(Which::GammaHat, 2, w).unwrap();
        assert!((h.det() - 1.0).norm() < 1e-8, "{}", h.det());
    }
}

#[test]
fn constant_jump_after_transform() {
    let pot = |c: Vec<f64>| Density::Potential(Potential { coeffs: c, hbar: 0.5 });
    let alpha = DensityMeasure::new((1.0, 2.0), pot(vec![0.0, 0.3]), QuadratureRule::GaussLegendre, 40).unwrap();
    let beta = DensityMeasure::new((0.5, 2.5), pot(vec![0.1, 0.0, 0.2]), QuadratureRule::GaussLegendre, 40).unwrap();
    let pair = DensityPair::new(alpha, beta, 4).unwrap();
    let w = Complex64::new(1.1, 0.4);
    let g = pair.matrix_at(Which::Gamma, 2, w).unwrap();
    let y = pair.constant_jump_transform(&g, w).unwrap();
    assert!((y.det() - g.det()).norm() < 1e-10);
    let eps = [1e-4, 1e-5, 1e-6];
    let r: Vec<(f64, f64)> = eps.iter().map(|&e| pair.scaled_constant_jump_residual(2, 1.2, e).unwrap()).collect();
    assert!(r[0].0 / r[0].1 < 1e-2 && r[2].0 < r[0].0 / 50.0, "{r:?}");
    let (r2, s2) = pair.scaled_constant_jump_residual(2, -1.4, 1e-6).unwrap();
    assert!(r2 / s2 < 1e-4, "{r2} {s2}");
    let plain = DensityMeasure::new((1.0, 2.0), Density::constant(2.0), QuadratureRule::GaussLegendre, 20).unwrap();
    assert!(DensityPair::new(plain.clone(), plain, 3).is_ok());
}
