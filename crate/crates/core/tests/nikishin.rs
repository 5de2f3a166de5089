mod common;

use cbop::bop::Side;
use cbop::cdkernel::cd_residual_plain;
use cbop::measure::DiscreteMeasure;
use cbop::nikishin::*;
use cbop::scalar::ratio;
use cbop::{Bundle, Frame, Rational};
use common::*;
use num_complex::Complex64;
use num_traits::Zero;

fn point_pairs() -> Vec<(Rational, Rational)> {
    vec![
        (ratio(1, 3), ratio(5, 2)),
        (ratio(-13, 2), ratio(7, 3)),
        (ratio(17, 1), ratio(-1, 9)),
        (ratio(101, 1), ratio(2, 13)),
        (ratio(-29, 3), ratio(-5, 7)),
    ]
}

#[test]
fn single_atom_value() {
    let beta = DiscreteMeasure::from_decimal(&[("1", "1")]).unwrap();
    let alpha = DiscreteMeasure::from_decimal(&[("2", "1")]).unwrap();
    let w = markov(&alpha, &beta, MarkovTag::Beta).unwrap();
    assert_eq!(w.eval(&ratio(-1, 1)).unwrap(), ratio(-1, 2));
    assert!(matches!(w.eval(&ratio(1, 1)), Err(cbop::Error::PoleEvaluation(_))));
    let ws = markov(&alpha, &beta, MarkovTag::BetaStar).unwrap();
    assert!(ws.eval(&ratio(-1, 1)).is_err());
}

#[test]
fn series_coefficients_from_moments() {
    let (a, b) = two_atom_pair();
    let wb = markov(&a, &b, MarkovTag::Beta).unwrap();
    let was = markov(&a, &b, MarkovTag::AlphaStar).unwrap();
    for j in 0..6 {
        assert_eq!(wb.series(6).coeff(-(j as i64) - 1), Some(b.moment(j)));
        let sign = if j % 2 == 0 { ratio(1, 1) } else { ratio(-1, 1) };
        assert_eq!(was.series(6).coeff(-(j as i64) - 1), Some(sign * a.moment(j)));
    }
    let wasb = markov(&a, &b, MarkovTag::AlphaStarBeta).unwrap();
    assert_eq!(wasb.series(3).coeff(-1), Some(ratio(-77, 60)));
    // nested coefficients against bimoments: W_α*β has (−1)^{j+1} I_{j0}
    let bundle = Bundle::new(a.clone(), b.clone(), 2, Frame::MonicDual).unwrap();
    for j in 0..3usize {
        let sign = if j % 2 == 0 { ratio(-1, 1) } else { ratio(1, 1) };
        assert_eq!(wasb.transform.coefficient(j), sign * bundle.bimoments.get(j, 0).clone());
    }
    let wbas = markov(&a, &b, MarkovTag::BetaAlphaStar).unwrap();
    for j in 0..3usize {
        assert_eq!(wbas.transform.coefficient(j), bundle.bimoments.get(0, j).clone());
    }
}

#[test]
fn plucker_exact_and_complex() {
    let (a, b) = two_atom_pair();
    assert!(plucker_residual(&a, &b, &ratio(10, 1), false).unwrap().is_zero());
    assert!(plucker_residual(&a, &b, &ratio(10, 1), true).unwrap().is_zero());
    let r = plucker_residual(&a.to_f64(), &b.to_f64(), &Complex64::new(0.0, 1.0), false).unwrap();
    assert!(r.norm() < 1e-12);
    let (a, b) = six_atom_pair();
    for z in rational_points() {
        for swapped in [false, true] {
            assert!(plucker_residual(&a, &b, &z, swapped).unwrap().is_zero());
        }
        let pair = NikishinPair::new(&a, &b, ProblemKind::Switched).unwrap();
        assert!(pair.plucker_residual(&z).unwrap().is_zero());
    }
}

#[test]
fn series_agrees_with_pointwise() {
    let (a, b) = six_atom_pair();
    let (a, b) = (a.to_f64(), b.to_f64());
    for tag in MarkovTag::ALL {
        let w = markov(&a, &b, tag).unwrap();
        let radius = w.transform.radius();
        // opposite side of the support, so the tail alternates
        let side = w.transform.atoms()[0].0.signum();
        let z = -side * 10.0 * radius;
        let k = 12;
        let partial: f64 = (0..k).map(|j| w.transform.coefficient(j) * z.powi(-(j as i32) - 1)).sum();
        let omitted = (w.transform.coefficient(k) * z.powi(-(k as i32) - 1)).abs();
        let exact = w.eval(&z).unwrap();
        assert!((exact - partial).abs() < omitted, "{}", tag.name());
    }
}

#[test]
fn linear_pade_two_atom() {
    let (a, b) = two_atom_pair();
    let bundle = Bundle::new(a.clone(), b.clone(), 2, Frame::MonicDual).unwrap();
    let pair = NikishinPair::new(&a, &b, ProblemKind::Q).unwrap();
    let sol = pade_solve(&pair, bundle.family.monic(Side::Q, 1).clone()).unwrap();
    assert_eq!(sol.p1.coeffs(), &[ratio(2, 1)]);
    assert_eq!(sol.r1.coefficient(0), ratio(46, 77));
    let cert = order_check(&pair, &sol, 4);
    assert!(cert.passed);
    assert_eq!(cert.third_low_order, vec![ratio(0, 1)]);
    let zero = pade_solve(&pair, bundle.family.monic(Side::Q, 0).clone()).unwrap();
    let cert0 = order_check(&pair, &zero, 1);
    assert!(cert0.passed && cert0.third_low_order.is_empty());
}

#[test]
fn order_conditions_all_problems() {
    let bundle = exact_bundle(6);
    for kind in [ProblemKind::Q, ProblemKind::P, ProblemKind::Switched] {
        for n in 0..6 {
            let (pair, sol) = pade_for_bundle(&bundle, kind, n).unwrap();
            let cert = order_check(&pair, &sol, 2 * n + 2);
            assert!(cert.passed, "{kind:?} n={n}");
            assert!(cert.first.iter().chain(&cert.second).chain(&cert.third).all(|c| c.is_zero()));
            assert_eq!(sol.p1.degree() + 1, n.max(1));
            for z in rational_points() {
                assert!(third_condition_pointwise(&pair, &sol, &z).unwrap().is_zero());
            }
            // the next coefficient is generically nonzero
            if n < 5 {
                assert!(!sol.r21.coefficient(n).is_zero(), "{kind:?} n={n}");
            }
        }
    }
}

#[test]
fn wrong_polynomial_fails_order_check() {
    let bundle = exact_bundle(5);
    let pair = NikishinPair::new(&bundle.alpha, &bundle.beta, ProblemKind::Q).unwrap();
    let q = bundle.framed.q[3].add(&bundle.framed.q[1]);
    let sol = pade_solve(&pair, q).unwrap();
    assert!(!order_check(&pair, &sol, 8).passed);
    let pair = NikishinPair::new(&bundle.alpha, &bundle.beta, ProblemKind::Switched).unwrap();
    let sol = pade_solve(&pair, bundle.framed.p[3].clone()).unwrap();
    assert!(!order_check(&pair, &sol, 8).passed);
}

#[test]
fn aux_asymptotics() {
    let bundle = float_bundle(5);
    let w = 1e6;
    let aux = aux_vectors(&bundle, &w, &w).unwrap();
    for n in 0..5 {
        let eta = bundle.framed.eta[n];
        assert!((w * aux.q[1][n] - eta).abs() < 1e-4 * eta.abs());
        assert!((aux.p_hat[1][n] + 1.0).abs() < 1e-4);
    }
}

#[test]
fn aux_two_routes_agree() {
    let bundle = exact_bundle(5);
    for z in rational_points() {
        let (a, b) = aux_consistency(&bundle, &z).unwrap();
        assert!(a.iter().chain(&b).all(|v| v.is_zero()));
    }
}

#[test]
fn ecd_exact_all_entries() {
    let bundle = exact_bundle(6);
    for n in [2, 3] {
        for (w, z) in point_pairs() {
            let r = ecd_residuals(&bundle, n, &w, &z).unwrap();
            for a in 0..3 {
                for b in 0..3 {
                    assert!(r[a][b].is_zero(), "n={n} ({a},{b})");
                }
            }
        }
    }
}

#[test]
fn ecd_zero_entry_is_plain_cd() {
    let bundle = exact_bundle(6);
    for (w, z) in point_pairs() {
        let e = ecd_residual(&bundle, 0, 0, 2, &w, &z).unwrap();
        let c = cd_residual_plain(&bundle, 2, &z, &w).unwrap();
        assert_eq!(e, c);
    }
}

#[test]
fn ecd_hat_derived_and_printed() {
    let bundle = exact_bundle(6);
    for n in [2, 3, 4] {
        for (w, z) in point_pairs() {
            let r = ecd_hat_residuals(&bundle, n, &w, &z, FhatVariant::Derived).unwrap();
            let p = ecd_hat_residuals(&bundle, n, &w, &z, FhatVariant::AsPrinted).unwrap();
            for a in 0..3 {
                for b in 0..3 {
                    assert!(r[a][b].is_zero(), "n={n} ({a},{b})");
                    let differs = (a, b) == (1, 1) || (a, b) == (2, 0);
                    assert_eq!(!p[a][b].is_zero(), differs, "printed n={n} ({a},{b})");
                }
            }
        }
    }
}

#[test]
fn ecd_complex_float() {
    let bundle = float_bundle(5);
    let (w, z) = (Complex64::new(1.5, 2.0), Complex64::new(-3.0, 0.7));
    let r = ecd_residuals(&bundle, 2, &w, &z).unwrap();
    let h = ecd_hat_residuals(&bundle, 2, &w, &z, FhatVariant::Derived).unwrap();
    for a in 0..3 {
        for b in 0..3 {
            assert!(r[a][b].norm() < 1e-9 && h[a][b].norm() < 1e-9, "({a},{b}) {} {}", r[a][b], h[a][b]);
        }
    }
}

#[test]
fn multiplication_identities() {
    let bundle = exact_bundle(6);
    for (w, z) in point_pairs() {
        let l = multiplication_residuals(&bundle, &w, &z).unwrap();
        for k in 0..3 {
            assert_eq!(l.q_side[k].len(), 4);
            assert!(l.q_side[k].iter().chain(&l.p_side[k]).all(|v| v.is_zero()), "{k}");
        }
    }
}

#[test]
fn perfect_duality() {
    let bundle = exact_bundle(6);
    for n in [2, 3, 4] {
        for z in [ratio(5, 2), ratio(-7, 3), ratio(13, 1), ratio(1, 17)] {
            let d = duality_matrix(&bundle, n, &z).unwrap();
            assert_eq!(d, j_matrix::<Rational>(), "n={n}");
            assert!(duality_check(&bundle, 2, 0, n, &z).unwrap().is_zero());
        }
    }
    let d = duality_matrix(&bundle, 2, &ratio(5, 2)).unwrap();
    assert_eq!(d[0][0], ratio(0, 1));
    assert_eq!(d[0][2], ratio(1, 1));
    assert_eq!(d[2][0], ratio(1, 1));
    assert_eq!(d[1][1], ratio(1, 1));
    assert_eq!(d[2][2], ratio(0, 1));
}

#[test]
fn normalized_frame_float_duality() {
    let bundle = float_bundle(5);
    let z = Complex64::new(2.0, 1.0);
    let d = duality_matrix(&bundle, 2, &z).unwrap();
    let j = j_matrix::<Complex64>();
    for a in 0..3 {
        for b in 0..3 {
            assert!((d[a][b] - j[a][b]).norm() < 1e-9);
        }
    }
}
