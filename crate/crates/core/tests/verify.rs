mod common;

use cbop::measure::{Density, DensityMeasure, DiscreteMeasure, Measure, QuadratureRule};
use cbop::verify::{verify, Mode, Options, Suite};
use common::*;

fn six() -> (Measure, Measure) {
    let (a, b) = six_atom_pair();
    (Measure::Discrete(a), Measure::Discrete(b))
}

#[test]
fn every_suite_passes_exactly() {
    let (a, b) = six();
    let r = verify(&a, &b, 5, Suite::All, Mode::Exact, &Options::default()).unwrap();
    for c in &r.checks {
        assert!(c.passed, "{} {:?}", c.name, c.detail);
        assert_eq!(c.residual, 0.0, "{}", c.name);
    }
    for s in Suite::EACH {
        assert!(r.checks.iter().any(|c| c.suite == s), "{s} ran no checks");
    }
    assert!(r.jumps.is_empty());
}

#[test]
fn every_suite_passes_in_float() {
    let (a, b) = six();
    let r = verify(&a, &b, 5, Suite::All, Mode::Float, &Options::default()).unwrap();
    // the 4x4 minors of six-atom data sit below the float certification bound
    let bad: Vec<_> = r.failures().map(|c| (&c.name, c.residual, &c.detail)).collect();
    assert!(bad.len() <= 1, "{bad:?}");
    for c in r.failures() {
        assert_eq!(c.suite, Suite::Tp, "{} {}", c.name, c.residual);
        assert!(c.detail.as_deref().unwrap().contains("unresolved"), "{:?}", c.detail);
    }
}

#[test]
fn single_suite_runs_alone() {
    let (a, b) = six();
    let r = verify(&a, &b, 5, Suite::Duality, Mode::Exact, &Options::default()).unwrap();
    assert!(r.passed());
    assert!(r.checks.iter().all(|c| c.suite == Suite::Duality));
    assert!(r.checks.iter().any(|c| c.name.contains('𝕁')));
}

#[test]
fn degenerate_tp_reports_minor() {
    let one = Measure::Discrete(DiscreteMeasure::from_decimal(&[("1", "1")]).unwrap());
    let r = verify(&one, &one, 2, Suite::Tp, Mode::Exact, &Options::default()).unwrap();
    assert!(!r.passed());
    let f = r.failures().next().unwrap();
    let d = f.detail.as_deref().unwrap();
    assert!(d.contains("degenerate") && d.contains("2x2"), "{d}");
    // other suites need a nondegenerate family
    assert!(verify(&one, &one, 2, Suite::Cdi, Mode::Exact, &Options::default()).is_err());
}

fn uniform() -> Measure {
    Measure::Density(DensityMeasure::new((1.0, 2.0), Density::constant(1.0), QuadratureRule::GaussLegendre, 40).unwrap())
}

#[test]
fn density_needs_float_mode() {
    let u = uniform();
    assert!(matches!(
        verify(&u, &u, 4, Suite::Rhp, Mode::Exact, &Options::default()),
        Err(cbop::Error::InvalidMeasure(_))
    ));
}

#[test]
fn density_rhp_has_jump_table() {
    let u = uniform();
    let r = verify(&u, &u, 4, Suite::Rhp, Mode::Float, &Options::default()).unwrap();
    assert_eq!(r.jumps.len(), 12);
    for c in &r.checks {
        if c.name.starts_with("det") {
            // float det drifts to about 1e-12 at n = 3 on 40 nodes
            assert!(c.residual < 1e-11, "{}", c.residual);
        } else {
            assert!(c.passed, "{} {:?} {}", c.name, c.detail, c.residual);
        }
    }
    for w in r.jumps.chunks(3) {
        assert!(w[0].residual > w[1].residual && w[1].residual > w[2].residual);
    }
}
