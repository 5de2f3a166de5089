//! Acceptance criteria, one line each. Runs without the test harness so the
//! lines are always printed.

mod common;

use std::time::{Duration, Instant};

use cbop::bimoment::{compute_bimoments, oracle_dn, rank_one_shift_residual, Kernel};
use cbop::bop::{determinantal_oracle, pairing, Side};
use cbop::cdkernel::{cd_residual_hat, cd_residual_plain, commutator_block, dense_commutator, embedded_block};
use cbop::measure::{Density, DensityMeasure, DiscreteMeasure, Measure, Potential, QuadratureRule};
use cbop::nikishin::{
    duality_matrix, ecd_hat_residuals, ecd_residuals, j_matrix, order_check, pade_for_bundle, plucker_residual, FhatVariant,
    ProblemKind,
};
use cbop::recurrence::{four_term_residual, rank_one_xy_residual};
use cbop::rhp::{
    asymptotic_check, assemble_gamma, assemble_gamma_hat, expected_constants, extract_constants, DensityPair, GammaSign, Which,
};
use cbop::scalar::ratio;
use cbop::verify::{verify, Mode, Options, Suite};
use cbop::zeros::{charpoly_identity_residual, zero_sequence};
use cbop::{Bundle, Error, Frame, Rational};
use common::*;
use num_traits::{One, Signed, Zero};

type Pair = (DiscreteMeasure<Rational>, DiscreteMeasure<Rational>);

/// Outcome of one criterion: `Err` carries the first failed condition.
type Outcome = Result<String, String>;

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn within(elapsed: Duration, limit: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit, || format!("took {:.2} s, limit {limit} s", elapsed.as_secs_f64()))
}

fn err(e: Error) -> String {
    e.to_string()
}

/// Twenty rational points avoiding every atom used below and its reflection.
fn twenty_points() -> Vec<Rational> {
    (0..20).map(|k| ratio(if k % 2 == 0 { 2 * k + 1 } else { -(2 * k + 1) }, 13)).collect()
}

fn criterion_1(pairs: &[Pair]) -> Outcome {
    let start = Instant::now();
    for (k, (a, b)) in pairs.iter().enumerate() {
        let i = compute_bimoments(a, b, &Kernel::Cauchy, 6).map_err(err)?;
        let cert = i.check_total_positivity(4);
        ensure(cert.passed(), || format!("pair {k}: minor {:?} not positive", cert.violation))?;
        for n in 1..=4 {
            let o = oracle_dn(a, b, &Kernel::Cauchy, n).map_err(err)?;
            ensure(o == i.minor(n), || format!("pair {k}: D_{n} differs from the symmetrized sum"))?;
        }
    }
    within(start.elapsed(), 5.0)?;
    Ok(format!("5 pairs, minors up to 4x4 positive, D_1..D_4 match, {:.2} s", start.elapsed().as_secs_f64()))
}

fn criterion_2(pairs: &[Pair]) -> Outcome {
    for (k, (a, b)) in pairs.iter().enumerate() {
        let i = compute_bimoments(a, b, &Kernel::Cauchy, 6).map_err(err)?;
        let r = rank_one_shift_residual(&i, a, b);
        ensure(r.rows() == 5 && r.iter().all(|(_, _, v)| v.is_zero()), || format!("pair {k}: nonzero residual"))?;
    }
    Ok("5x5 window identically zero for 5 pairs".into())
}

fn criterion_3(pairs: &[Pair]) -> Outcome {
    for (k, (a, b)) in pairs.iter().enumerate() {
        let bundle = Bundle::new(a.clone(), b.clone(), 6, Frame::MonicDual).map_err(err)?;
        let f = &bundle.family;
        for i in 0..6 {
            for j in 0..6 {
                let v = pairing(&bundle.bimoments, f.p(i), f.q(j));
                let want = if i == j { f.h(i).clone() } else { Rational::zero() };
                ensure(v == want, || format!("pair {k}: <p{i}|q{j}> = {v}"))?;
            }
        }
        for n in 0..=4 {
            let (p, q) = determinantal_oracle(&bundle.bimoments, n).map_err(err)?;
            ensure(&p == f.p(n) && &q == f.q(n), || format!("pair {k}: determinantal oracle differs at n = {n}"))?;
        }
    }
    Ok("i, j <= 5 exact, oracle matches for n <= 4".into())
}

fn criterion_4(bundle: &Bundle<Rational>) -> Outcome {
    let f = &bundle.factors;
    for op in [&f.a, &f.ahat] {
        let bad = op.band_violations();
        ensure(bad.is_empty(), || format!("{} has entries outside its band: {bad:?}", op.name))?;
    }
    let points = twenty_points();
    for n in 1..=4 {
        for x in &points {
            let (rp, rq) = four_term_residual(&bundle.framed, &f.a, &f.bhat, n, x).map_err(err)?;
            ensure(rp.is_zero() && rq.is_zero(), || format!("four-term residual at n = {n}, x = {x}"))?;
        }
    }
    let r = rank_one_xy_residual(&bundle.x, &bundle.y, &bundle.framed.pi, &bundle.framed.eta);
    ensure(r.iter().all(|(_, _, v)| v.is_zero()), || "X + Yᵀ is not rank one".into())?;
    Ok("A in [-1,2], Â in [-2,1], four-term residual 0 at 20 points, X + Yᵀ rank one".into())
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let alpha = DiscreteMeasure::from_pairs((1..=12).map(|k| (ratio(k, 12), ratio(1, 1)))).map_err(err)?;
    let beta = DiscreteMeasure::from_pairs((1..=12).map(|k| (ratio(2 * k - 1, 24), ratio(k % 3 + 1, 2)))).map_err(err)?;
    let float = Bundle::new(alpha.to_f64(), beta.to_f64(), 9, Frame::MonicDual).map_err(err)?;
    for side in [Side::P, Side::Q] {
        for r in zero_sequence(&float, side, 8).map_err(err)? {
            let (lo, hi) = match side {
                Side::P => (1.0 / 12.0, 1.0),
                Side::Q => (1.0 / 24.0, 23.0 / 24.0),
            };
            let span = hi - lo;
            let n = r.degree;
            ensure(r.positive, || format!("{side:?} degree {n}: non-positive zero"))?;
            ensure(r.inside_hull, || format!("{side:?} degree {n}: zero outside the hull"))?;
            ensure(n < 2 || r.min_gap > 1e-10 * span, || format!("{side:?} degree {n}: gap {}", r.min_gap))?;
            ensure(r.interlaced_with_previous != Some(false), || format!("{side:?} degree {n}: not interlaced"))?;
        }
    }
    let exact = exact_bundle(5);
    for side in [Side::P, Side::Q] {
        for n in 0..=4 {
            for x in rational_points() {
                let r = charpoly_identity_residual(&exact, side, n, &x).map_err(err)?;
                ensure(r.is_zero(), || format!("characteristic polynomial identity at n = {n}"))?;
            }
        }
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!("n <= 8 positive, simple, inside, interlaced; charpoly exact n <= 4; {:.2} s", start.elapsed().as_secs_f64()))
}

fn criterion_6(bundle: &Bundle<Rational>) -> Outcome {
    let pts = rational_points();
    let pairs: Vec<(Rational, Rational)> = pts.iter().cloned().zip(pts.iter().rev().cloned()).collect();
    for n in [2, 3] {
        for (x, y) in &pairs {
            ensure(cd_residual_plain(bundle, n, x, y).map_err(err)?.is_zero(), || format!("plain CD at n = {n}"))?;
            ensure(cd_residual_hat(bundle, n, x, y).map_err(err)?.is_zero(), || format!("hatted CD at n = {n}"))?;
        }
        let block = commutator_block(bundle, n).map_err(err)?;
        for s in &pts {
            let dense = dense_commutator(bundle, n, s);
            let size = dense.rows();
            let emb = embedded_block(&block, size, s);
            for i in 0..size {
                for j in 0..size - 1 {
                    ensure(dense[(i, j)] == emb[(i, j)], || format!("block and dense commutator differ at n = {n}"))?;
                }
            }
        }
    }
    Ok("plain and hatted residuals 0 at 10 pairs, block = dense commutator".into())
}

fn criterion_7(bundle: &Bundle<Rational>) -> Outcome {
    for swapped in [false, true] {
        for z in rational_points() {
            let r = plucker_residual(&bundle.alpha, &bundle.beta, &z, swapped).map_err(err)?;
            ensure(r.is_zero(), || format!("Plücker residual at {z}"))?;
        }
    }
    for kind in [ProblemKind::Q, ProblemKind::P, ProblemKind::Switched] {
        for n in 0..=4 {
            let (pair, sol) = pade_for_bundle(bundle, kind, n).map_err(err)?;
            if kind == ProblemKind::Switched {
                ensure(sol.q == bundle.framed.p[n].reflect(), || "switched problem does not use p_n(-z)".into())?;
            }
            let cert = order_check(&pair, &sol, 2 * n + 2);
            ensure(cert.passed, || format!("{kind:?} order conditions fail at n = {n}"))?;
        }
    }
    Ok("Plücker 0 at 10 points, order conditions exact for Q, P and switched, n <= 4".into())
}

fn criterion_8(bundle: &Bundle<Rational>) -> Outcome {
    let pts = rational_points();
    for n in [2, 3] {
        for (w, z) in pts.iter().zip(pts.iter().rev()).take(5) {
            let r = ecd_residuals(bundle, n, w, z).map_err(err)?;
            ensure(r.iter().flatten().all(|v| v.is_zero()), || format!("extended CD at n = {n}"))?;
            let r = ecd_hat_residuals(bundle, n, w, z, FhatVariant::Derived).map_err(err)?;
            ensure(r.iter().flatten().all(|v| v.is_zero()), || format!("hatted extended CD at n = {n}"))?;
        }
    }
    let j = j_matrix::<Rational>();
    for n in [2, 3, 4] {
        for z in pts.iter().take(5) {
            let d = duality_matrix(bundle, n, z).map_err(err)?;
            ensure(d == j, || format!("duality matrix differs from 𝕁 at n = {n}, z = {z}"))?;
        }
    }
    Ok("9 entries for n in {2,3}; 𝕁 reproduced for n in {2,3,4}".into())
}

fn criterion_9(bundle: &Bundle<Rational>) -> Outcome {
    let start = Instant::now();
    let pts: Vec<Rational> = rational_points().into_iter().take(5).collect();
    for n in 2..=4 {
        for w in &pts {
            let g = assemble_gamma(bundle, n, w, GammaSign::Corrected).map_err(err)?;
            ensure(g.det().is_one(), || format!("det Γ at n = {n}, w = {w}"))?;
            let h = assemble_gamma_hat(bundle, n, w).map_err(err)?;
            ensure(h.det().is_one(), || format!("det Γ̂ at n = {n}, z = {w}"))?;
        }
        let c = asymptotic_check(bundle, n, Which::Gamma, GammaSign::Corrected).map_err(err)?;
        ensure(c.passed && c.leading_powers.iter().enumerate().all(|(i, r)| r[i] == Some(Which::Gamma.powers(n)[i])), || {
            format!("Γ asymptotics at n = {n}: {:?}", c.leading_powers)
        })?;
        let c = asymptotic_check(bundle, n, Which::GammaHat, GammaSign::Corrected).map_err(err)?;
        ensure(c.passed && c.leading_powers.iter().enumerate().all(|(i, r)| r[i] == Some(Which::GammaHat.powers(n)[i])), || {
            format!("Γ̂ asymptotics at n = {n}: {:?}", c.leading_powers)
        })?;
        let (got, want) = (extract_constants(bundle, n).map_err(err)?, expected_constants(bundle, n));
        ensure(got.c_sq == want.c_sq && got.eta_sq == want.eta_sq, || format!("constants at n = {n}"))?;
    }
    let gl = |support, density| DensityMeasure::new(support, density, QuadratureRule::GaussLegendre, 40).map_err(err);
    let alpha = gl((1.0, 2.0), Density::constant(1.0))?;
    let beta = gl((0.5, 3.0), Density::Potential(Potential { coeffs: vec![0.0, 1.0], hbar: 2.0 }))?;
    let pair = DensityPair::new(alpha, beta, 3).map_err(err)?;
    let eps = [1e-4, 1e-5, 1e-6];
    let mut slopes = Vec::new();
    for (which, w0) in [(Which::Gamma, 1.75), (Which::Gamma, -1.5), (Which::GammaHat, 1.5), (Which::GammaHat, -1.75)] {
        let study = pair.jump_study(which, 2, w0, &eps).map_err(err)?;
        ensure(study.linear(), || format!("{which:?} at {w0}: slope {:.3}", study.slope))?;
        slopes.push(format!("{:.2}", study.slope));
    }
    within(start.elapsed(), 60.0)?;
    Ok(format!(
        "det 1 at 5 points, powers (n,-1,1-n) and (n,0,-n), constants exact, jump slopes [{}], {:.2} s",
        slopes.join(", "),
        start.elapsed().as_secs_f64()
    ))
}

fn criterion_10() -> Outcome {
    let one = DiscreteMeasure::<Rational>::from_decimal(&[("1", "1")]).map_err(err)?;
    let i = compute_bimoments(&one, &one, &Kernel::Cauchy, 2).map_err(err)?;
    ensure(i.minor(2).is_zero(), || format!("D_2 = {}", i.minor(2)))?;
    ensure(!i.check_total_positivity(2).passed(), || "TP certificate passed a degenerate matrix".into())?;
    match Bundle::new(one.clone(), one.clone(), 2, Frame::MonicDual) {
        Err(Error::Degenerate { order: 2 }) => {}
        other => return Err(format!("expected a degenerate error, got {:?}", other.map(|_| ()))),
    }
    let m = Measure::Discrete(one);
    let r = verify(&m, &m, 2, Suite::Tp, Mode::Exact, &Options::default()).map_err(err)?;
    let detail = r.failures().next().and_then(|c| c.detail.clone()).unwrap_or_default();
    ensure(!r.passed() && detail.contains("degenerate"), || format!("report: {detail}"))?;
    ensure(i.minor(1).is_positive(), || "D_1 should stay positive".into())?;
    Ok(format!("D_2 = 0, clean diagnostic: {detail}"))
}

fn main() {
    let pairs = random_pairs(20240611, 5, 6);
    let bundle = exact_bundle(6);
    let runs: Vec<(usize, &str, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "bimoment total positivity", Box::new(|| criterion_1(&pairs))),
        (2, "rank-one shift", Box::new(|| criterion_2(&pairs))),
        (3, "biorthogonality", Box::new(|| criterion_3(&pairs))),
        (4, "recurrence structure", Box::new(|| criterion_4(&bundle))),
        (5, "zeros", Box::new(criterion_5)),
        (6, "Christoffel–Darboux identities", Box::new(|| criterion_6(&bundle))),
        (7, "Padé and Nikishin", Box::new(|| criterion_7(&bundle))),
        (8, "extended CD and duality", Box::new(|| criterion_8(&bundle))),
        (9, "Riemann–Hilbert matrices", Box::new(|| criterion_9(&bundle))),
        (10, "degenerate handling", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (k, name, run) in &runs {
        match run() {
            Ok(msg) => println!("criterion {k:>2} PASS  {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {k:>2} FAIL  {name}: {msg}");
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", runs.len() - failed, runs.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
