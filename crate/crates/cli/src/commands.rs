use cbop::bimoment::{compute_bimoments, consecutive_minor_certificate, rank_one_shift_residual, Kernel, MinorIndex};
use cbop::bop::Side;
use cbop::measure::{DiscreteMeasure, Measure};
use cbop::recurrence::BandOperator;
use cbop::rhp::{assemble_gamma, assemble_gamma_hat, GammaSign};
use cbop::scalar::{parse_rational, Scalar};
use cbop::verify::{self, Mode, Options, Report, Suite};
use cbop::zeros::{zero_sequence, zeros_of, ZeroReport};
use cbop::{Bundle, Frame, Rational};
use serde_json::{json, Value};

use crate::output::{float, matrix, num, vector};
use crate::{warn, Failure, Outcome, Status};

/// The measure pair in the backend chosen by the mode.
pub enum Pair {
    Exact(DiscreteMeasure<Rational>, DiscreteMeasure<Rational>),
    Float(DiscreteMeasure<f64>, DiscreteMeasure<f64>),
}

impl Pair {
    pub fn new(alpha: &Measure, beta: &Measure, mode: Mode) -> Result<Self, Failure> {
        match (mode, alpha, beta) {
            (Mode::Exact, Measure::Discrete(a), Measure::Discrete(b)) => Ok(Pair::Exact(a.clone(), b.clone())),
            (Mode::Exact, _, _) => Err(Failure::Usage("exact mode requires discrete measures; use --mode float".into())),
            (Mode::Float, a, b) => Ok(Pair::Float(a.to_float_atoms()?, b.to_float_atoms()?)),
        }
    }
}

/// Runs a generic command on whichever backend the pair uses.
macro_rules! on_pair {
    ($pair:expr, $f:ident ( $($arg:expr),* )) => {
        match $pair {
            Pair::Exact(a, b) => $f::<cbop::Rational>(a, b, $($arg),*),
            Pair::Float(a, b) => $f::<f64>(a, b, $($arg),*),
        }
    };
}
pub(crate) use on_pair;

fn minor_json<T: Scalar>(m: &Option<(MinorIndex, T)>) -> Value {
    match m {
        Some((ix, v)) => json!({ "size": ix.size, "row": ix.row, "col": ix.col, "value": num(v) }),
        None => Value::Null,
    }
}

pub fn bimoments<T: Scalar>(a: &DiscreteMeasure<T>, b: &DiscreteMeasure<T>, order: usize, kmax: usize) -> Result<Outcome, Failure> {
    let i = compute_bimoments(a, b, &Kernel::Cauchy, order)?;
    let d = i.leading_minors();
    let tp = consecutive_minor_certificate(i.entries(), kmax);
    let shift = rank_one_shift_residual(&i, a, b);
    let scale = i.entries().iter().fold(1.0f64, |m, (_, _, v)| m.max(v.to_f64().abs()));
    let shift_zero = shift.iter().all(|(_, _, v)| v.negligible(scale));
    let shift_max = shift.iter().fold(0.0f64, |m, (_, _, v)| m.max(v.to_f64().abs()));
    let mut status = if tp.passed() && shift_zero { Status::Pass } else { Status::CheckFailure };
    let mut warnings = Vec::new();
    if let Err(e) = i.certify_minors(order) {
        let msg = match &e {
            cbop::Error::Degenerate { order } => format!("degenerate: D_{order} vanishes; the measures have too few atoms for order {order}"),
            other => other.to_string(),
        };
        warn(&msg);
        warnings.push(msg);
        status = Status::TheoryViolation;
    }
    let value = json!({
        "mode": if T::EXACT { "exact" } else { "float" },
        "order": order,
        "I": matrix(i.entries()),
        "D": vector(d),
        "tp": {
            "kmax": tp.kmax,
            "checked": tp.checked,
            "passed": tp.passed(),
            "min_minor": minor_json(&tp.min_minor),
            "violation": minor_json(&tp.violation),
        },
        "rank_one_shift": { "zero": shift_zero, "max_residual": float(shift_max) },
        "warnings": warnings,
    });
    Ok(Outcome { value, status })
}

pub fn verify(alpha: &Measure, beta: &Measure, order: usize, suite: Suite, mode: Mode, opts: &Options) -> Result<Outcome, Failure> {
    let report = verify::verify(alpha, beta, order, suite, mode, opts)?;
    let status = if report.passed() { Status::Pass } else { Status::CheckFailure };
    for c in report.failures() {
        warn(&format!("FAIL [{}] {} (residual {:e}){}", c.suite, c.name, c.residual, c.detail.as_ref().map(|d| format!(": {d}")).unwrap_or_default()));
    }
    Ok(Outcome { value: report_json(&report), status })
}

fn report_json(r: &Report) -> Value {
    let checks: Vec<Value> = r
        .checks
        .iter()
        .map(|c| {
            json!({
                "suite": c.suite.name(),
                "name": c.name,
                "passed": c.passed,
                "residual": float(c.residual),
                "detail": c.detail,
                "elapsed_ms": c.elapsed.as_secs_f64() * 1e3,
            })
        })
        .collect();
    let jumps: Vec<Value> = r
        .jumps
        .iter()
        .map(|j| {
            json!({
                "which": format!("{:?}", j.which),
                "n": j.n,
                "w0": float(j.w0),
                "eps": float(j.eps),
                "residual": float(j.residual),
                "relative": float(j.relative),
            })
        })
        .collect();
    json!({
        "suite": r.suite.name(),
        "mode": r.mode.name(),
        "order": r.order,
        "passed": r.passed(),
        "elapsed_ms": r.elapsed.as_secs_f64() * 1e3,
        "checks": checks,
        "jumps": jumps,
    })
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::P => "p",
        Side::Q => "q",
    }
}

fn zero_json(r: &ZeroReport) -> Value {
    json!({
        "degree": r.degree,
        "zeros": r.zeros.iter().map(|&z| float(z)).collect::<Vec<_>>(),
        "positive": r.positive,
        "inside_hull": r.inside_hull,
        "min_gap": if r.min_gap.is_finite() { float(r.min_gap) } else { Value::Null },
        "numerically_coincident": r.numerically_coincident,
        "interlaced_with_previous": r.interlaced_with_previous,
        "companion_agreement": float(r.agreement),
        "charpoly_residual": float(r.charpoly_residual),
    })
}

pub fn zeros<T: Scalar>(a: &DiscreteMeasure<T>, b: &DiscreteMeasure<T>, order: usize, degree: usize, side: Side) -> Result<Outcome, Failure> {
    let bundle = Bundle::new(a.clone(), b.clone(), order, Frame::MonicDual)?;
    let report = if degree == 0 {
        zeros_of(&bundle, side, 0)?
    } else {
        zero_sequence(&bundle, side, degree)?.pop().expect("one report per degree")
    };
    let ok = report.positive
        && report.inside_hull
        && !report.numerically_coincident
        && report.interlaced_with_previous != Some(false);
    let mut value = zero_json(&report);
    value["side"] = json!(side_name(side));
    Ok(Outcome { value, status: if ok { Status::Pass } else { Status::CheckFailure } })
}

pub fn bop<T: Scalar>(a: &DiscreteMeasure<T>, b: &DiscreteMeasure<T>, order: usize, degree: usize, point: Option<&str>) -> Result<Outcome, Failure> {
    let bundle = Bundle::new(a.clone(), b.clone(), order, Frame::MonicDual)?;
    let f = &bundle.family;
    let (p, q) = (f.monic(Side::P, degree), f.monic(Side::Q, degree));
    let mut value = json!({
        "degree": degree,
        "basis": "monic",
        "p": vector(p.coeffs()),
        "q": vector(q.coeffs()),
        "h": num(f.h(degree)),
    });
    if let Some(text) = point {
        let x: T = parse_point(text)?;
        value["point"] = num(&x);
        value["p_at_point"] = num(&p.eval(&x));
        value["q_at_point"] = num(&q.eval(&x));
    }
    Ok(Outcome { value, status: Status::Pass })
}

fn operator_json<T: Scalar>(op: &BandOperator<T>) -> Value {
    let bad = op.band_violations();
    json!({
        "name": op.name,
        "band": [op.band.lo, op.band.hi],
        "valid_rows": op.valid_rows,
        "valid_cols": op.valid_cols,
        "matrix": matrix(&op.matrix),
        "band_violations": bad.iter().map(|(i, j, v)| json!([i, j, num(v)])).collect::<Vec<_>>(),
    })
}

pub fn recurrence<T: Scalar>(a: &DiscreteMeasure<T>, b: &DiscreteMeasure<T>, order: usize) -> Result<Outcome, Failure> {
    let bundle = Bundle::new(a.clone(), b.clone(), order, Frame::MonicDual)?;
    let f = &bundle.factors;
    let ops = [&bundle.x, &bundle.y, &bundle.l, &bundle.lhat, &f.a, &f.ahat, &f.b, &f.bhat];
    let clean = ops.iter().all(|op| op.band_violations().is_empty());
    let value = json!({
        "order": order,
        "frame": "monic-dual",
        "pi": vector(&bundle.framed.pi),
        "eta": vector(&bundle.framed.eta),
        "operators": ops.iter().map(|op| operator_json(op)).collect::<Vec<_>>(),
        "band_ok": clean,
    });
    Ok(Outcome { value, status: if clean { Status::Pass } else { Status::CheckFailure } })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum WhichArg {
    Gamma,
    GammaHat,
}

pub fn rhp<T: Scalar>(a: &DiscreteMeasure<T>, b: &DiscreteMeasure<T>, order: usize, degree: usize, point: &str, which: WhichArg) -> Result<Outcome, Failure> {
    let bundle = Bundle::new(a.clone(), b.clone(), order, Frame::MonicDual)?;
    let w: T = parse_point(point)?;
    let g = match which {
        WhichArg::Gamma => assemble_gamma(&bundle, degree, &w, GammaSign::Corrected)?,
        WhichArg::GammaHat => assemble_gamma_hat(&bundle, degree, &w)?,
    };
    let det = g.det();
    let ok = if T::EXACT { det == T::one() } else { (det.to_f64() - 1.0).abs() < 1e-12 };
    let entries: Vec<Value> = g.entries.iter().map(|r| vector(r)).collect();
    let value = json!({
        "which": match which { WhichArg::Gamma => "gamma", WhichArg::GammaHat => "gamma-hat" },
        "n": degree,
        "point": num(&w),
        "entries": entries,
        "det": num(&det),
    });
    Ok(Outcome { value, status: if ok { Status::Pass } else { Status::CheckFailure } })
}

fn parse_point<T: Scalar>(text: &str) -> Result<T, Failure> {
    let r = parse_rational(text).map_err(|e| Failure::Usage(format!("--point: {e}")))?;
    Ok(T::from_rational(&r))
}
