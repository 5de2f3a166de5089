//! Invariant suites over a measure pair, as used by the command-line tool.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::bimoment::{compute_bimoments, oracle_dn, rank_one_shift_residual, Kernel};
use crate::bop::pairing;
use crate::bundle::Bundle;
use crate::cdkernel::{cd_residual_hat, cd_residual_plain, commutator_block, dense_commutator, embedded_block};
use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, Measure};
use crate::nikishin::{
    duality_matrix, ecd_hat_residuals, ecd_residuals, j_matrix, order_check, pade_for_bundle, plucker_residual, FhatVariant,
    ProblemKind,
};
use crate::poly::Polynomial;
use crate::recurrence::{four_term_residual, rank_one_xy_residual, tn_oscillatory_certificate, Frame};
use crate::rhp::{
    asymptotic_check, assemble_gamma, assemble_gamma_hat, assemble_gamma_prefactor, expected_constants, extract_constants,
    DensityPair, GammaSign, Which,
};
use crate::scalar::{ratio, Scalar};

/// Relative tolerance for floating-point checks.
pub const FLOAT_TOL: f64 = 1e-8;

/// Default offsets for the boundary-value study.
pub const DEFAULT_EPS: [f64; 3] = [1e-4, 1e-5, 1e-6];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Tp,
    Recurrence,
    Cdi,
    Pade,
    Duality,
    Rhp,
    All,
}

impl Suite {
    pub const EACH: [Suite; 6] = [Suite::Tp, Suite::Recurrence, Suite::Cdi, Suite::Pade, Suite::Duality, Suite::Rhp];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Tp => "tp",
            Suite::Recurrence => "recurrence",
            Suite::Cdi => "cdi",
            Suite::Pade => "pade",
            Suite::Duality => "duality",
            Suite::Rhp => "rhp",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .iter()
            .chain(&[Suite::All])
            .find(|v| v.name() == s)
            .copied()
            .ok_or_else(|| Error::Parse(format!("unknown suite '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            _ => Err(Error::Parse(format!("unknown mode '{s}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    /// Largest residual magnitude, already divided by the check's scale in
    /// floating point.
    pub residual: f64,
    pub passed: bool,
    pub detail: Option<String>,
    pub elapsed: Duration,
}

/// One row of the boundary-value study on density inputs.
#[derive(Clone, Debug)]
pub struct JumpRow {
    pub which: Which,
    pub n: usize,
    pub w0: f64,
    pub eps: f64,
    pub residual: f64,
    pub relative: f64,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub suite: Suite,
    pub mode: Mode,
    pub order: usize,
    pub checks: Vec<Check>,
    pub jumps: Vec<JumpRow>,
    pub elapsed: Duration,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Options beyond the suite and mode.
#[derive(Clone, Debug)]
pub struct Options {
    pub kmax: usize,
    pub eps: Vec<f64>,
}

impl Default for Options {
    fn default() -> Self {
        Options { kmax: 4, eps: DEFAULT_EPS.to_vec() }
    }
}

pub fn verify(alpha: &Measure, beta: &Measure, order: usize, suite: Suite, mode: Mode, opts: &Options) -> Result<Report> {
    let start = Instant::now();
    let mut rec = Recorder::default();
    let suites: Vec<Suite> = if suite == Suite::All { Suite::EACH.to_vec() } else { vec![suite] };
    match mode {
        Mode::Exact => {
            let (Measure::Discrete(a), Measure::Discrete(b)) = (alpha, beta) else {
                return Err(Error::InvalidMeasure("exact mode requires discrete rational measures".into()));
            };
            run_all(&mut rec, a.clone(), b.clone(), order, &suites, opts)?;
        }
        Mode::Float => {
            run_all(&mut rec, alpha.to_float_atoms()?, beta.to_float_atoms()?, order, &suites, opts)?;
            if suites.contains(&Suite::Rhp) {
                if let (Measure::Density(a), Measure::Density(b)) = (alpha, beta) {
                    jump_suite(&mut rec, DensityPair::new(a.clone(), b.clone(), order)?, opts)?;
                }
            }
        }
    }
    Ok(Report { suite, mode, order, checks: rec.checks, jumps: rec.jumps, elapsed: start.elapsed() })
}

fn run_all<T: Scalar>(
    rec: &mut Recorder,
    a: DiscreteMeasure<T>,
    b: DiscreteMeasure<T>,
    order: usize,
    suites: &[Suite],
    opts: &Options,
) -> Result<()> {
    if suites.contains(&Suite::Tp) {
        tp_suite(rec, &a, &b, order, opts.kmax)?;
    }
    if suites.iter().all(|s| *s == Suite::Tp) {
        return Ok(());
    }
    let bundle = Bundle::new(a, b, order, Frame::MonicDual)?;
    let points = probe_points(&bundle);
    for s in suites {
        match s {
            Suite::Recurrence => recurrence_suite(rec, &bundle, &points, opts.kmax)?,
            Suite::Cdi => cdi_suite(rec, &bundle, &points)?,
            Suite::Pade => pade_suite(rec, &bundle, &points)?,
            Suite::Duality => duality_suite(rec, &bundle, &points)?,
            Suite::Rhp => rhp_suite(rec, &bundle, &points)?,
            Suite::Tp | Suite::All => {}
        }
    }
    Ok(())
}

#[derive(Default)]
struct Recorder {
    checks: Vec<Check>,
    jumps: Vec<JumpRow>,
}

impl Recorder {
    fn push(&mut self, suite: Suite, name: impl Into<String>, started: Instant, residual: f64, passed: bool, detail: Option<String>) {
        self.checks.push(Check { suite, name: name.into(), residual, passed, detail, elapsed: started.elapsed() });
    }

    /// Records a group of values that must vanish, each with its own scale.
    fn zeros<T: Scalar>(&mut self, suite: Suite, name: impl Into<String>, started: Instant, values: &[(T, f64)]) {
        self.zeros_within(suite, name, started, values, FLOAT_TOL, 1.0);
    }

    /// As [`Self::zeros`] with tolerance `tol · max(scale, floor)` in floating point.
    fn zeros_within<T: Scalar>(
        &mut self,
        suite: Suite,
        name: impl Into<String>,
        started: Instant,
        values: &[(T, f64)],
        tol: f64,
        floor: f64,
    ) {
        let mut worst = 0.0f64;
        let mut passed = true;
        for (v, scale) in values {
            let s = scale.max(floor);
            passed &= if T::EXACT { v.is_zero() } else { v.to_f64().abs() <= tol * s };
            worst = worst.max(v.to_f64().abs() / if T::EXACT { 1.0 } else { s });
        }
        self.push(suite, name, started, worst, passed, None);
    }
}

/// Rational probe points that avoid the atoms of both measures and of their
/// reflections.
fn probe_points<T: Scalar>(bundle: &Bundle<T>) -> Vec<T> {
    let atoms: Vec<T> = bundle
        .alpha
        .signed_atoms()
        .chain(bundle.beta.signed_atoms())
        .flat_map(|(x, _)| [x.clone(), -x])
        .collect();
    [(1, 3), (-13, 2), (101, 1), (7, 3), (-5, 7), (17, 1), (-1, 9), (23, 4), (-29, 3), (2, 13), (-41, 5), (9, 7)]
        .iter()
        .map(|&(n, d)| T::from_rational(&ratio(n, d)))
        .filter(|p| atoms.iter().all(|x| x != p))
        .take(10)
        .collect()
}

fn mag<T: Scalar>(v: &T) -> f64 {
    v.to_f64().abs()
}

fn abs_poly<T: Scalar>(p: &Polynomial<T>) -> Polynomial<T> {
    Polynomial::new(p.coeffs().iter().map(|c| c.abs()).collect())
}

fn tp_suite<T: Scalar>(rec: &mut Recorder, a: &DiscreteMeasure<T>, b: &DiscreteMeasure<T>, order: usize, kmax: usize) -> Result<()> {
    let started = Instant::now();
    let i = compute_bimoments(a, b, &Kernel::Cauchy, order)?;
    let kmax = kmax.min(order);
    let cert = i.check_total_positivity(kmax);
    let detail = match &cert.violation {
        Some((ix, v)) => {
            let what = if v.is_positive() { "unresolved in floating point" } else { "degenerate" };
            Some(format!("{what}: {}x{} minor at rows {}.., cols {}.. equals {v}", ix.size, ix.size, ix.row, ix.col))
        }
        None => cert.min_minor.as_ref().map(|(_, v)| format!("{} minors, smallest {v}", cert.checked)),
    };
    let worst = cert.violation.as_ref().map_or(0.0, |(_, v)| mag(v));
    rec.push(Suite::Tp, format!("consecutive minors up to {kmax}x{kmax} positive"), started, worst, cert.passed(), detail);

    let started = Instant::now();
    let nmax = kmax.min(4);
    let small = |m: &DiscreteMeasure<T>| m.len() <= 12;
    if small(a) && small(b) {
        let mut vals = Vec::new();
        for n in 1..=nmax {
            let o = oracle_dn(a, b, &Kernel::Cauchy, n)?;
            let d = i.minor(n);
            let scale = mag(&o).max(mag(&d));
            vals.push((d - o, scale));
        }
        rec.zeros(Suite::Tp, format!("leading minors match symmetrized sums, n <= {nmax}"), started, &vals);
    }

    let started = Instant::now();
    let r = rank_one_shift_residual(&i, a, b);
    let scale = i.entries().iter().map(|(_, _, v)| mag(v)).fold(0.0, f64::max);
    let vals: Vec<(T, f64)> = r.iter().map(|(_, _, v)| (v.clone(), scale)).collect();
    rec.zeros(Suite::Tp, "rank-one shift", started, &vals);
    Ok(())
}

fn recurrence_suite<T: Scalar>(rec: &mut Recorder, bundle: &Bundle<T>, points: &[T], kmax: usize) -> Result<()> {
    let nn = bundle.order();
    let f = &bundle.framed;

    let started = Instant::now();
    let mut vals = Vec::new();
    for i in 0..nn {
        for j in 0..nn {
            let (p, q) = (bundle.family.p(i), bundle.family.q(j));
            let got = pairing(&bundle.bimoments, p, q);
            let want = if i == j { bundle.family.h(i).clone() } else { T::zero() };
            let abs_i = bundle.bimoments.entries().map(|v| v.abs());
            let scale = pairing(&crate::bimoment::BimomentMatrix::from_entries(abs_i, bundle.bimoments.kernel()), &abs_poly(p), &abs_poly(q));
            vals.push((got - want, mag(&scale)));
        }
    }
    rec.zeros(Suite::Recurrence, format!("biorthogonality, degrees < {nn}"), started, &vals);

    let started = Instant::now();
    let ops = [&bundle.x, &bundle.y, &bundle.factors.a, &bundle.factors.ahat, &bundle.factors.b, &bundle.factors.bhat];
    let bad: Vec<String> = ops.iter().filter(|op| !op.band_violations().is_empty()).map(|op| op.name.to_string()).collect();
    let detail = (!bad.is_empty()).then(|| format!("outside band: {}", bad.join(", ")));
    rec.push(Suite::Recurrence, "band structure of X, Y, A, Â, B, B̂", started, bad.len() as f64, bad.is_empty(), detail);

    let started = Instant::now();
    let scale = (0..nn).map(|i| mag(&f.pi[i]) * (0..nn).map(|j| mag(&f.eta[j])).fold(0.0, f64::max)).fold(0.0, f64::max);
    let vals: Vec<(T, f64)> = rank_one_xy_residual(&bundle.x, &bundle.y, &f.pi, &f.eta)
        .iter()
        .map(|(_, _, v)| (v.clone(), scale))
        .collect();
    rec.zeros(Suite::Recurrence, "X + Yᵀ rank one", started, &vals);

    let started = Instant::now();
    let mut vals = Vec::new();
    for n in 1..nn.saturating_sub(1) {
        for x in points {
            let (rp, rq) = four_term_residual(f, &bundle.factors.a, &bundle.factors.bhat, n, x)?;
            let scale = (n.saturating_sub(2)..=n + 1)
                .map(|k| mag(&f.p[k].eval(x)).max(mag(&f.q[k].eval(x))))
                .fold(0.0, f64::max)
                * (1.0 + mag(x))
                * op_scale(bundle);
            vals.push((rp, scale));
            vals.push((rq, scale));
        }
    }
    rec.zeros(Suite::Recurrence, "four-term recurrences", started, &vals);

    for op in [&bundle.x, &bundle.y] {
        let started = Instant::now();
        let size = nn.min(6);
        let cert = tn_oscillatory_certificate(op, size, kmax.min(size));
        let ok = cert.totally_nonnegative() && cert.oscillatory();
        rec.push(Suite::Recurrence, format!("{} totally nonnegative and oscillatory", op.name), started, 0.0, ok, None);
    }
    Ok(())
}

fn op_scale<T: Scalar>(bundle: &Bundle<T>) -> f64 {
    [&bundle.factors.a, &bundle.factors.bhat]
        .iter()
        .flat_map(|op| op.matrix.iter().map(|(_, _, v)| mag(v)).collect::<Vec<_>>())
        .chain(bundle.framed.pi.iter().chain(&bundle.framed.eta).map(|v| 1.0 / mag(v)))
        .fold(1.0, f64::max)
}

/// `max_j |p_j(x)| · max_j |q_j(y)|` over the kernel range, times `N`.
fn kernel_scale<T: Scalar>(bundle: &Bundle<T>, x: &T, y: &T) -> f64 {
    let f = &bundle.framed;
    let px = f.p.iter().map(|p| mag(&p.eval(x))).fold(0.0, f64::max);
    let qy = f.q.iter().map(|q| mag(&q.eval(y))).fold(0.0, f64::max);
    px * qy * f.p.len() as f64 * (1.0 + mag(x) + mag(y)) * op_scale(bundle)
}

fn cdi_suite<T: Scalar>(rec: &mut Recorder, bundle: &Bundle<T>, points: &[T]) -> Result<()> {
    let nn = bundle.order();
    let pairs: Vec<(T, T)> = points.iter().zip(points.iter().rev()).map(|(x, y)| (x.clone(), y.clone())).collect();
    let ns: Vec<usize> = (1..nn.saturating_sub(1)).collect();

    let started = Instant::now();
    let mut vals = Vec::new();
    for &n in &ns {
        for (x, y) in &pairs {
            vals.push((cd_residual_plain(bundle, n, x, y)?, kernel_scale(bundle, x, y)));
        }
    }
    rec.zeros(Suite::Cdi, "Christoffel–Darboux identity", started, &vals);

    let started = Instant::now();
    let mut vals = Vec::new();
    for &n in &ns {
        for (x, y) in &pairs {
            vals.push((cd_residual_hat(bundle, n, x, y)?, kernel_scale(bundle, x, y)));
        }
    }
    rec.zeros(Suite::Cdi, "hatted Christoffel–Darboux identity", started, &vals);

    let started = Instant::now();
    let mut vals = Vec::new();
    for &n in &ns {
        let block = commutator_block(bundle, n)?;
        for s in points {
            let dense = dense_commutator(bundle, n, s);
            let emb = embedded_block(&block, nn, s);
            let scale = op_scale(bundle) * (1.0 + mag(s));
            for i in 0..nn {
                for j in 0..nn - 1 {
                    vals.push((dense[(i, j)].clone() - emb[(i, j)].clone(), scale));
                }
            }
        }
    }
    rec.zeros(Suite::Cdi, "commutator block equals dense commutator", started, &vals);
    Ok(())
}

fn pade_suite<T: Scalar>(rec: &mut Recorder, bundle: &Bundle<T>, points: &[T]) -> Result<()> {
    let started = Instant::now();
    let mut vals = Vec::new();
    for swapped in [false, true] {
        for z in points {
            vals.push((plucker_residual(&bundle.alpha, &bundle.beta, z, swapped)?, 1.0));
        }
    }
    rec.zeros(Suite::Pade, "Plücker-type identity", started, &vals);

    let nmax = bundle.order().saturating_sub(1).min(4);
    for kind in [ProblemKind::Q, ProblemKind::P, ProblemKind::Switched] {
        let started = Instant::now();
        let mut worst = 0.0f64;
        let mut passed = true;
        for n in 0..=nmax {
            let (pair, sol) = pade_for_bundle(bundle, kind, n)?;
            let cert = order_check(&pair, &sol, 2 * n + 2);
            passed &= cert.passed;
            worst = worst.max(cert.max_residual());
        }
        rec.push(Suite::Pade, format!("approximation orders, {kind:?} problem, n <= {nmax}"), started, worst, passed, None);
    }
    Ok(())
}

fn duality_suite<T: Scalar>(rec: &mut Recorder, bundle: &Bundle<T>, points: &[T]) -> Result<()> {
    let nn = bundle.order();
    let ns: Vec<usize> = (2..nn.saturating_sub(1)).collect();
    let pairs: Vec<(T, T)> = points.iter().zip(points.iter().rev()).take(5).map(|(x, y)| (x.clone(), y.clone())).collect();
    let grid_scale = |g: &[[T; 3]; 3]| g.iter().flatten().map(mag).fold(1.0, f64::max);

    let started = Instant::now();
    let mut vals = Vec::new();
    for &n in &ns {
        for (w, z) in &pairs {
            if *w == -z.clone() {
                continue;
            }
            let r = ecd_residuals(bundle, n, w, z)?;
            let s = grid_scale(&r) * kernel_scale(bundle, z, w);
            vals.extend(r.into_iter().flatten().map(|v| (v, s)));
        }
    }
    rec.zeros(Suite::Duality, "extended CD identity, all 9 pairs", started, &vals);

    let started = Instant::now();
    let mut vals = Vec::new();
    for &n in &ns {
        for (w, z) in &pairs {
            if *w == -z.clone() {
                continue;
            }
            let r = ecd_hat_residuals(bundle, n, w, z, FhatVariant::Derived)?;
            let s = grid_scale(&r) * kernel_scale(bundle, z, w);
            vals.extend(r.into_iter().flatten().map(|v| (v, s)));
        }
    }
    rec.zeros(Suite::Duality, "hatted extended CD identity, all 9 pairs", started, &vals);

    let started = Instant::now();
    let j = j_matrix::<T>();
    let mut vals = Vec::new();
    for &n in &ns {
        for z in points.iter().take(5) {
            let d = duality_matrix(bundle, n, z)?;
            let s = kernel_scale(bundle, z, z);
            for a in 0..3 {
                for b in 0..3 {
                    vals.push((d[a][b].clone() - j[a][b].clone(), s));
                }
            }
        }
    }
    rec.zeros(Suite::Duality, "perfect duality reproduces 𝕁", started, &vals);
    Ok(())
}

fn rhp_suite<T: Scalar>(rec: &mut Recorder, bundle: &Bundle<T>, points: &[T]) -> Result<()> {
    let nn = bundle.order();
    let started = Instant::now();
    let mut vals = Vec::new();
    for z in points.iter().take(5) {
        for n in 2..nn {
            let g = assemble_gamma(bundle, n, z, GammaSign::Corrected)?;
            vals.push((g.det() - T::one(), 1.0));
            let h = assemble_gamma_hat(bundle, n, z)?;
            vals.push((h.det() - T::one(), 1.0));
        }
    }
    rec.zeros_within(Suite::Rhp, "det Γ = det Γ̂ = 1", started, &vals, 1e-12, 1.0);

    let started = Instant::now();
    let mut vals = Vec::new();
    for z in points.iter().take(5) {
        for n in 2..nn {
            let a = assemble_gamma(bundle, n, z, GammaSign::Corrected)?;
            let b = assemble_gamma_prefactor(bundle, n, z, GammaSign::Corrected)?;
            let s = a.entries.iter().flatten().map(mag).fold(1.0, f64::max);
            for i in 0..3 {
                for k in 0..3 {
                    vals.push((a.entries[i][k].clone() - b.entries[i][k].clone(), s));
                }
            }
        }
    }
    rec.zeros(Suite::Rhp, "both assembly routes agree", started, &vals);

    if T::EXACT {
        let started = Instant::now();
        let mut passed = true;
        for n in 2..nn {
            passed &= asymptotic_check(bundle, n, Which::Gamma, GammaSign::Corrected)?.passed;
        }
        for n in 1..nn {
            passed &= asymptotic_check(bundle, n, Which::GammaHat, GammaSign::Corrected)?.passed;
        }
        rec.push(Suite::Rhp, "asymptotics at infinity (exact series)", started, 0.0, passed, None);
    }

    let started = Instant::now();
    let mut vals = Vec::new();
    for n in 2..nn {
        let got = extract_constants(bundle, n)?;
        let want = expected_constants(bundle, n);
        vals.push((got.eta_sq - want.eta_sq.clone(), mag(&want.eta_sq)));
        vals.push((got.c_sq - want.c_sq.clone(), mag(&want.c_sq)));
    }
    rec.zeros_within(Suite::Rhp, "constants read off row 2", started, &vals, 1e-10, 0.0);
    Ok(())
}

fn jump_suite(rec: &mut Recorder, pair: DensityPair, opts: &Options) -> Result<()> {
    let n = 2.min(pair.bundle.order().saturating_sub(1));
    if n < 2 {
        return Ok(());
    }
    let mid = |(a, b): (f64, f64)| 0.5 * (a + b);
    let (ma, mb) = (mid(pair.alpha.support()), mid(pair.beta.support()));
    for (which, w0) in [(Which::Gamma, mb), (Which::Gamma, -ma), (Which::GammaHat, ma), (Which::GammaHat, -mb)] {
        let started = Instant::now();
        let study = pair.jump_study(which, n, w0, &opts.eps)?;
        for ((eps, r), rel) in opts.eps.iter().zip(&study.residuals).zip(study.relative()) {
            rec.jumps.push(JumpRow { which, n, w0, eps: *eps, residual: *r, relative: rel });
        }
        let linear = opts.eps.len() < 2 || study.linear();
        rec.push(
            Suite::Rhp,
            format!("{which:?} jump at w = {w0} decays linearly in eps"),
            started,
            study.relative().first().copied().unwrap_or(0.0),
            linear,
            Some(format!("slope {:.3}", study.slope)),
        );
    }
    Ok(())
}
