mod common;

use cbop::cdkernel::{cd_residual_hat, cd_residual_plain, commutator_block, dense_commutator, embedded_block};
use cbop::scalar::ratio;
use num_traits::Zero;
use cbop::Rational;
use common::*;
use num_complex::Complex64;

#[test]
fn block_matches_dense_commutator() {
    let bundle = exact_bundle(6);
    for n in 1..=4 {
        let block = commutator_block(&bundle, n).unwrap();
        assert!(block.nonzero_entries() <= 4);
        for s in rational_points() {
            let dense = dense_commutator(&bundle, n, &s);
            let emb = embedded_block(&block, 6, &s);
            for i in 0..6 {
                for j in 0..5 {
                    assert_eq!(dense[(i, j)], emb[(i, j)], "n={n} ({i},{j})");
                }
            }
        }
    }
}

#[test]
fn block_is_linear_in_s() {
    let bundle = exact_bundle(5);
    let block = commutator_block(&bundle, 2).unwrap();
    let (s, t) = (ratio(3, 7), ratio(-5, 2));
    let bs = block.eval(&s);
    let bt = block.eval(&t);
    let bst = block.eval(&(s.clone() + t.clone()));
    let b0 = block.eval(&ratio(0, 1));
    for r in 0..3 {
        for c in 0..3 {
            assert_eq!(bst[r][c].clone() + b0[r][c].clone(), bs[r][c].clone() + bt[r][c].clone());
        }
    }
}

#[test]
fn plain_cd_exact() {
    let bundle = exact_bundle(6);
    let pts = rational_points();
    for n in 1..=4 {
        for x in &pts {
            for y in &pts {
                assert!(cd_residual_plain(&bundle, n, x, y).unwrap().is_zero(), "n={n}");
            }
        }
    }
}

#[test]
fn hatted_cd_exact() {
    let bundle = exact_bundle(6);
    let pts = rational_points();
    for n in 1..=4 {
        for x in &pts {
            for y in &pts {
                assert!(cd_residual_hat(&bundle, n, x, y).unwrap().is_zero(), "n={n}");
            }
        }
    }
}

#[test]
fn antidiagonal_line_kills_right_side() {
    let bundle = exact_bundle(5);
    for n in 1..=3 {
        for y in rational_points() {
            let x = -y.clone();
            let r: Rational = cd_residual_plain(&bundle, n, &x, &y).unwrap();
            assert!(r.is_zero());
        }
    }
}

#[test]
fn cd_at_complex_points() {
    let float = float_bundle(5);
    let pts = [Complex64::new(0.3, 1.7), Complex64::new(-4.0, 0.5), Complex64::new(7.0, -2.0)];
    for n in 1..=3 {
        for x in &pts {
            for y in &pts {
                let f = cd_residual_plain(&float, n, x, y).unwrap();
                let h = cd_residual_hat(&float, n, x, y).unwrap();
                let scale: f64 = (0..n)
                    .map(|j| float.framed.q[j].eval(y).norm() * float.framed.p[j].eval(x).norm())
                    .sum::<f64>()
                    * (x.norm() + y.norm());
                let hscale: f64 = (0..n)
                    .map(|j| float.hatted.q_hat[j].eval(y).norm() * float.hatted.p_hat[j].eval(x).norm())
                    .sum::<f64>()
                    * (x.norm() + y.norm());
                assert!(f.norm() < 1e-10 * scale, "{f} {scale}");
                assert!(h.norm() < 1e-10 * hscale, "{h} {hscale}");
            }
        }
    }
}

#[test]
fn window_limits() {
    let bundle = exact_bundle(4);
    assert!(commutator_block(&bundle, 0).is_err());
    assert!(commutator_block(&bundle, 3).is_err());
    assert!(commutator_block(&bundle, 2).is_ok());
}
