//! Zeros of the biorthogonal polynomials from Hessenberg truncations.

use nalgebra::linalg::{balancing::balance_parlett_reinsch, Schur};
use nalgebra::DMatrix;

use crate::bop::Side;
use crate::bundle::Bundle;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::poly::Polynomial;
use crate::scalar::{dyadic_near, sign_of, Rational, Scalar};

/// Relative distance below which two zeros are flagged as coincident.
const COINCIDENT: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct ZeroReport {
    pub side: Side,
    pub degree: usize,
    /// Eigenvalues of the truncated multiplication operator, increasing.
    pub zeros: Vec<f64>,
    /// Roots of the monic coefficient polynomial (companion matrix).
    pub companion_zeros: Vec<f64>,
    /// Largest relative disagreement between the two root sets.
    pub agreement: f64,
    pub min_gap: f64,
    pub positive: bool,
    pub inside_hull: bool,
    /// Some pair of zeros closer than `1e-12 * span`.
    pub numerically_coincident: bool,
    /// Filled by [`zero_sequence`].
    pub interlaced_with_previous: Option<bool>,
    /// `|p̃_n(x) − det(x − X[n−1])|` at the midpoint of the hull.
    pub charpoly_residual: f64,
}

fn real_eigenvalues(m: DMatrix<f64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut m = m;
    balance_parlett_reinsch(&mut m);
    let scale = m.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
    let schur = Schur::try_new(m, 1e-15 * scale, 10_000)
        .ok_or_else(|| Error::Eigen(format!("Schur iteration did not converge for a {n}x{n} matrix")))?;
    let mut out = Vec::with_capacity(n);
    for z in schur.complex_eigenvalues().iter() {
        if z.im.abs() > 1e-7 * z.norm().max(1.0) {
            return Err(Error::Eigen(format!("non-real eigenvalue {z}")));
        }
        out.push(z.re);
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

fn companion_roots(p: &Polynomial<f64>) -> Result<Vec<f64>> {
    let n = p.degree();
    let lead = p.leading();
    let m = DMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -p.coeff(i) / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    real_eigenvalues(m)
}

fn operator<T: Scalar>(bundle: &Bundle<T>, side: Side) -> &Matrix<T> {
    match side {
        Side::P => &bundle.x.matrix,
        Side::Q => &bundle.y.matrix,
    }
}

fn hull<T: Scalar>(bundle: &Bundle<T>, side: Side) -> (T, T) {
    match side {
        Side::P => bundle.alpha.hull(),
        Side::Q => bundle.beta.hull(),
    }
}

/// `p̃_n(x) − det(x·Id − X[n−1])` (or the q analogue with `Y`).
pub fn charpoly_identity_residual<T: Scalar>(bundle: &Bundle<T>, side: Side, n: usize, point: &T) -> Result<T> {
    if n >= bundle.order() {
        return Err(Error::OrderUnderflow { needed: n + 1, available: bundle.order() });
    }
    let op = operator(bundle, side);
    let m = Matrix::from_fn(n, n, |i, j| {
        let v = -op[(i, j)].clone();
        if i == j {
            v + point.clone()
        } else {
            v
        }
    });
    Ok(bundle.family.monic(side, n).eval(point) - T::determinant(&m))
}

pub fn zeros_of<T: Scalar>(bundle: &Bundle<T>, side: Side, n: usize) -> Result<ZeroReport> {
    if n >= bundle.order() {
        return Err(Error::OrderUnderflow { needed: n + 1, available: bundle.order() });
    }
    let (lo, hi) = hull(bundle, side);
    let (lo, hi) = (lo.to_f64(), hi.to_f64());
    let op = operator(bundle, side);
    let zeros = real_eigenvalues(DMatrix::from_fn(n, n, |i, j| op[(i, j)].to_f64()))?;
    let companion_zeros = if n == 0 { Vec::new() } else { companion_roots(&bundle.family.monic(side, n).to_f64())? };
    let agreement = zeros
        .iter()
        .zip(&companion_zeros)
        .map(|(a, b)| (a - b).abs() / a.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let span = hi - lo;
    let min_gap = zeros.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let mid = T::from_rational(&dyadic_near((lo + hi) / 2.0));
    let charpoly_residual = charpoly_identity_residual(bundle, side, n, &mid)?.to_f64().abs();
    Ok(ZeroReport {
        side,
        degree: n,
        positive: zeros.iter().all(|&z| z > 0.0),
        inside_hull: zeros.iter().all(|&z| lo < z && z < hi),
        numerically_coincident: min_gap < COINCIDENT * span,
        zeros,
        companion_zeros,
        agreement,
        min_gap,
        interlaced_with_previous: None,
        charpoly_residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interlacing {
    pub passed: bool,
    /// Smallest distance between a zero of degree `n` and one of degree `n−1`.
    pub margin: f64,
}

/// Strict interlacing `z_1^n < z_1^{n−1} < z_2^n < ... < z_n^n`.
pub fn interlacing_check(current: &ZeroReport, previous: &ZeroReport) -> Interlacing {
    let (a, b) = (&current.zeros, &previous.zeros);
    if a.len() != b.len() + 1 {
        return Interlacing { passed: false, margin: 0.0 };
    }
    let mut margin = f64::INFINITY;
    let mut passed = true;
    for (k, &z) in b.iter().enumerate() {
        passed &= a[k] < z && z < a[k + 1];
        margin = margin.min(z - a[k]).min(a[k + 1] - z);
    }
    Interlacing { passed, margin }
}

/// Reports for degrees `1..=max`, each with its interlacing flag.
pub fn zero_sequence<T: Scalar>(bundle: &Bundle<T>, side: Side, max: usize) -> Result<Vec<ZeroReport>> {
    let mut out: Vec<ZeroReport> = Vec::with_capacity(max);
    let mut prev = zeros_of(bundle, side, 0)?;
    for n in 1..=max {
        let mut r = zeros_of(bundle, side, n)?;
        r.interlaced_with_previous = Some(interlacing_check(&r, &prev).passed);
        prev = r.clone();
        out.push(r);
    }
    Ok(out)
}

/// Exact count: `p̃_n` evaluated at rational separators between the float
/// zeros (and at the ends of the hull) must alternate strictly in sign,
/// which pins exactly one zero in each gap.
pub fn certify_zero_count(bundle: &Bundle<Rational>, report: &ZeroReport) -> bool {
    let (lo, hi) = hull(bundle, report.side);
    let poly = bundle.family.monic(report.side, report.degree);
    let mut separators = vec![lo];
    for w in report.zeros.windows(2) {
        separators.push(dyadic_near((w[0] + w[1]) / 2.0));
    }
    separators.push(hi);
    let signs: Vec<i32> = separators.iter().map(|x| sign_of(&poly.eval(x))).collect();
    separators.windows(2).all(|w| w[0] < w[1])
        && signs.iter().all(|&s| s != 0)
        && signs.windows(2).all(|w| w[0] == -w[1])
}
