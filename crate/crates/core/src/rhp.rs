//! The 3×3 Riemann–Hilbert matrices `Γ(w)` (q side) and `Γ̂(z)` (p̂ side).

use num_complex::Complex64;

use crate::bundle::Bundle;
use crate::error::{Error, Result};
use crate::measure::{Density, DensityMeasure, Orientation};
use crate::bop::Side;
use crate::nikishin::{aux_vectors, markov, p_hat1_at_beta_star, pade_solve, reduced_series, CauchyTransform, MarkovTag, NikishinPair, ProblemKind};
use crate::quadrature::gauss_legendre_on;
use crate::recurrence::Frame;
use crate::scalar::{Field, Lift, Scalar};
use crate::series::Laurent;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Which {
    Gamma,
    GammaHat,
}

impl Which {
    /// Powers `d_j` with `M = (1 + O(1/w)) diag(w^{d_j})`.
    pub fn powers(self, n: usize) -> [i64; 3] {
        let n = n as i64;
        match self {
            Which::Gamma => [n, -1, 1 - n],
            Which::GammaHat => [n, 0, -n],
        }
    }
}

/// Sign of the third row of `Γ`. `Corrected` uses `(−1)^n η_{n−2}/a_{n−2}`,
/// which gives `det Γ = 1`; `AsPrinted` uses `(−1)^{n−1}` (and the matching
/// signs in the prefactor form) and gives `det Γ = −1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GammaSign {
    #[default]
    Corrected,
    AsPrinted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RHMatrix<F> {
    pub n: usize,
    pub which: Which,
    pub entries: [[F; 3]; 3],
}

impl<F: Field> RHMatrix<F> {
    pub fn det(&self) -> F {
        det3(&self.entries)
    }

    pub fn get(&self, i: usize, j: usize) -> &F {
        &self.entries[i][j]
    }
}

fn det3<F: Field>(m: &[[F; 3]; 3]) -> F {
    let c = |i: usize, j: usize| m[i][j].clone();
    c(0, 0) * (c(1, 1) * c(2, 2) - c(1, 2) * c(2, 1)) - c(0, 1) * (c(1, 0) * c(2, 2) - c(1, 2) * c(2, 0))
        + c(0, 2) * (c(1, 0) * c(2, 1) - c(1, 1) * c(2, 0))
}

fn mat3<F: Field>(a: &[[F; 3]; 3], b: &[[F; 3]; 3]) -> [[F; 3]; 3] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| (0..3).fold(F::zero(), |acc, k| acc + a[i][k].clone() * b[k][j].clone()))
    })
}

fn parity<T: Scalar>(k: usize) -> T {
    if k % 2 == 0 {
        T::one()
    } else {
        -T::one()
    }
}

fn check_gamma<T: Scalar>(bundle: &Bundle<T>, n: usize) -> Result<()> {
    if n < 2 || n >= bundle.order() {
        return Err(Error::OrderUnderflow { needed: n.max(2) + 1, available: bundle.order() });
    }
    Ok(())
}

fn check_gamma_hat<T: Scalar>(bundle: &Bundle<T>, n: usize) -> Result<()> {
    if n < 1 || n >= bundle.order() {
        return Err(Error::OrderUnderflow { needed: n.max(1) + 1, available: bundle.order() });
    }
    Ok(())
}

/// `diag(b_n η_n, 1/η_{n−1}, ±η_{n−2}/a_{n−2})`.
fn gamma_diag<T: Scalar>(bundle: &Bundle<T>, n: usize, sign: GammaSign) -> [T; 3] {
    let f = &bundle.framed;
    let s = match sign {
        GammaSign::Corrected => parity::<T>(n),
        GammaSign::AsPrinted => parity::<T>(n + 1),
    };
    [
        f.b[n].clone() * f.eta[n].clone(),
        T::one() / f.eta[n - 1].clone(),
        s * f.eta[n - 2].clone() / f.a[n - 2].clone(),
    ]
}

/// `𝒩_q`, acting on the window `(q_{n−2}, q_{n−1}, q_n)`.
pub fn prefactor_q<T: Scalar>(bundle: &Bundle<T>, n: usize, sign: GammaSign) -> Result<[[T; 3]; 3]> {
    check_gamma(bundle, n)?;
    let f = &bundle.framed;
    let (s1, s2) = match sign {
        GammaSign::Corrected => (parity::<T>(n), parity::<T>(n + 1)),
        GammaSign::AsPrinted => (parity::<T>(n + 1), parity::<T>(n)),
    };
    let z = T::zero;
    let left = [
        [T::one(), -(f.b[n].clone() * f.eta[n].clone()), z()],
        [z(), T::one(), z()],
        [z(), s1 * f.eta[n - 2].clone() / f.a[n - 2].clone(), T::one()],
    ];
    let right = [
        [z(), z(), f.b[n].clone()],
        [z(), T::one() / f.eta[n - 1].clone(), z()],
        [s2 / f.a[n - 2].clone(), z(), z()],
    ];
    Ok(mat3(&left, &right))
}

/// `𝒩_p̂`, acting on the window `(p̂_{n−2}, p̂_{n−1}, p̂_n)`.
pub fn prefactor_p_hat<T: Scalar>(bundle: &Bundle<T>, n: usize) -> Result<[[T; 3]; 3]> {
    check_gamma_hat(bundle, n)?;
    let f = &bundle.framed;
    let z = T::zero;
    let left = [
        [z(), z(), -(f.a[n].clone() / f.eta[n].clone())],
        [z(), -T::one(), z()],
        [parity::<T>(n) / (f.b[n - 1].clone() * f.eta[n - 1].clone()), z(), z()],
    ];
    let o = T::one;
    let right = [[o(), -o(), z()], [z(), o(), z()], [z(), -o(), o()]];
    Ok(mat3(&left, &right))
}

fn lift<T: Lift<F>, F>(t: &T) -> F {
    Lift::<F>::lift(t)
}

fn lift3<T: Scalar + Lift<F>, F: Field>(m: &[[T; 3]; 3]) -> [[F; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| lift::<T, F>(&m[i][j])))
}

/// `q̂_{a,k} = L̂_kk q_{a,k} + L̂_{k+1,k} q_{a,k+1}` from the component table.
fn hat_q<T: Scalar + Lift<F>, F: Field>(bundle: &Bundle<T>, comps: &[[F; 3]], k: usize) -> [F; 3] {
    let lh = &bundle.lhat;
    std::array::from_fn(|a| {
        comps[k][a].clone() * lift::<T, F>(lh.get(k, k)) + comps[k + 1][a].clone() * lift::<T, F>(lh.get(k + 1, k))
    })
}

/// Recovery form of `Γ` from `comps[k] = (q_k, q_{1,k}, q_{2,k})`.
pub fn gamma_from_components<T, F>(bundle: &Bundle<T>, n: usize, comps: &[[F; 3]], sign: GammaSign) -> Result<RHMatrix<F>>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    check_gamma(bundle, n)?;
    let d = gamma_diag(bundle, n, sign);
    let rows = [hat_q(bundle, comps, n - 1), comps[n - 1].clone(), hat_q(bundle, comps, n - 2)];
    let entries = std::array::from_fn(|i| std::array::from_fn(|j| lift::<T, F>(&d[i]) * rows[i][j].clone()));
    Ok(RHMatrix { n, which: Which::Gamma, entries })
}

/// `𝒩_q` applied to the window of `comps`.
pub fn gamma_prefactor_from_components<T, F>(
    bundle: &Bundle<T>,
    n: usize,
    comps: &[[F; 3]],
    sign: GammaSign,
) -> Result<RHMatrix<F>>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    let m = lift3::<T, F>(&prefactor_q(bundle, n, sign)?);
    let window = [comps[n - 2].clone(), comps[n - 1].clone(), comps[n].clone()];
    Ok(RHMatrix { n, which: Which::Gamma, entries: mat3(&m, &window) })
}

/// `p̂_{b,k}` for `k = −1..N−1` (index shifted by one) from the components
/// and the constants `(0, 1, W_β*(z))`.
/// `p[k] = (p_k, p_{1,k}, p_{2,k})` and `p_hat[k + 1] = (p̂_k, p̂_{1,k}, p̂_{2,k})`,
/// with `p_hat[0]` the constants `p̂_{−1}`.
#[derive(Clone, Debug)]
pub struct PComponents<F> {
    pub p: Vec<[F; 3]>,
    pub p_hat: Vec<[F; 3]>,
}

impl<F: Field> PComponents<F> {
    /// Hatted rows by `p̂_b = L̂⁻¹p_b − const_b`.
    pub fn from_consts<T: Scalar + Lift<F>>(bundle: &Bundle<T>, p: Vec<[F; 3]>, consts: &[F; 3]) -> Self {
        let p_hat = hat_p(bundle, &p, consts);
        PComponents { p, p_hat }
    }
}

fn hat_p<T, F>(bundle: &Bundle<T>, comps: &[[F; 3]], consts: &[F; 3]) -> Vec<[F; 3]>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    let lh = &bundle.lhat;
    let mut solved: Vec<[F; 3]> = Vec::with_capacity(comps.len());
    for k in 0..comps.len() {
        let row = std::array::from_fn(|b| {
            let mut r = comps[k][b].clone();
            if k > 0 {
                r = r - lift::<T, F>(lh.get(k, k - 1)) * solved[k - 1][b].clone();
            }
            r / lift::<T, F>(lh.get(k, k))
        });
        solved.push(row);
    }
    let mut out = vec![std::array::from_fn(|b| -consts[b].clone())];
    out.extend(solved.into_iter().map(|r| std::array::from_fn(|b| r[b].clone() - consts[b].clone())));
    out
}

/// Recovery form of `Γ̂` from `comps[k] = (p_k, p_{1,k}, p_{2,k})`.
pub fn gamma_hat_from_components<T, F>(bundle: &Bundle<T>, n: usize, comps: &PComponents<F>) -> Result<RHMatrix<F>>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    check_gamma_hat(bundle, n)?;
    let f = &bundle.framed;
    let d: [F; 3] = [lift::<T, F>(&f.a[n]), -F::one(), lift::<T, F>(&(parity::<T>(n) / f.b[n - 1].clone()))];
    let rows = [comps.p[n].clone(), comps.p_hat[n].clone(), comps.p[n - 1].clone()];
    let entries = std::array::from_fn(|i| std::array::from_fn(|j| d[i].clone() * rows[i][j].clone()));
    Ok(RHMatrix { n, which: Which::GammaHat, entries })
}

pub fn gamma_hat_prefactor_from_components<T, F>(
    bundle: &Bundle<T>,
    n: usize,
    comps: &PComponents<F>,
) -> Result<RHMatrix<F>>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    let m = lift3::<T, F>(&prefactor_p_hat(bundle, n)?);
    let ph = &comps.p_hat;
    let window = [ph[n - 1].clone(), ph[n].clone(), ph[n + 1].clone()];
    Ok(RHMatrix { n, which: Which::GammaHat, entries: mat3(&m, &window) })
}

fn discrete_q_components<T, F>(bundle: &Bundle<T>, w: &F) -> Result<Vec<[F; 3]>>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    let aux = aux_vectors(bundle, w, w)?;
    Ok((0..bundle.order())
        .map(|k| [aux.q[0][k].clone(), aux.q[1][k].clone(), aux.q[2][k].clone()])
        .collect())
}

fn discrete_p_components<T, F>(bundle: &Bundle<T>, z: &F) -> Result<PComponents<F>>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    let aux = aux_vectors(bundle, z, z)?;
    let row = |v: &[Vec<F>; 3], k: usize| [v[0][k].clone(), v[1][k].clone(), v[2][k].clone()];
    let p = (0..bundle.order()).map(|k| row(&aux.p, k)).collect();
    let wbs = markov(&bundle.alpha, &bundle.beta, MarkovTag::BetaStar)?.eval(z)?;
    let mut p_hat = vec![[F::zero(), -F::one(), -wbs]];
    p_hat.extend((0..bundle.order()).map(|k| row(&aux.p_hat, k)));
    Ok(PComponents { p, p_hat })
}

/// `Γ(w)` in recovery form.
pub fn assemble_gamma<T, F>(bundle: &Bundle<T>, n: usize, w: &F, sign: GammaSign) -> Result<RHMatrix<F>>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    check_gamma(bundle, n)?;
    gamma_from_components(bundle, n, &discrete_q_components(bundle, w)?, sign)
}

/// `Γ(w) = 𝒩_q [q_0, q_1, q_2]` on the window.
pub fn assemble_gamma_prefactor<T, F>(bundle: &Bundle<T>, n: usize, w: &F, sign: GammaSign) -> Result<RHMatrix<F>>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    check_gamma(bundle, n)?;
    gamma_prefactor_from_components(bundle, n, &discrete_q_components(bundle, w)?, sign)
}

pub fn assemble_gamma_hat<T, F>(bundle: &Bundle<T>, n: usize, z: &F) -> Result<RHMatrix<F>>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    check_gamma_hat(bundle, n)?;
    gamma_hat_from_components(bundle, n, &discrete_p_components(bundle, z)?)
}

pub fn assemble_gamma_hat_prefactor<T, F>(bundle: &Bundle<T>, n: usize, z: &F) -> Result<RHMatrix<F>>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    check_gamma_hat(bundle, n)?;
    gamma_hat_prefactor_from_components(bundle, n, &discrete_p_components(bundle, z)?)
}

pub type SeriesMatrix<T> = [[Laurent<T>; 3]; 3];

fn series_combine<T: Scalar>(m: &[[T; 3]; 3], window: &[[Laurent<T>; 3]; 3]) -> SeriesMatrix<T> {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            (0..3).fold(Laurent::constant(T::zero()), |acc, k| acc.add(&window[k][j].scale(&m[i][k])))
        })
    })
}

/// Expansion at infinity of every entry, known through `w^{−terms}`.
pub fn gamma_series<T: Scalar>(bundle: &Bundle<T>, n: usize, which: Which, terms: usize, sign: GammaSign) -> Result<SeriesMatrix<T>> {
    let (kind, m, first) = match which {
        Which::Gamma => (ProblemKind::Q, prefactor_q(bundle, n, sign)?, n - 2),
        Which::GammaHat => (ProblemKind::P, prefactor_p_hat(bundle, n)?, 0),
    };
    let pair = NikishinPair::new(&bundle.alpha, &bundle.beta, kind)?;
    let polys = match which {
        Which::Gamma => &bundle.framed.q,
        Which::GammaHat => &bundle.framed.p,
    };
    let comps = (first..=n)
        .map(|k| {
            let sol = pade_solve(&pair, polys[k].clone())?;
            let side = match which {
                Which::Gamma => Side::P,
                Which::GammaHat => Side::Q,
            };
            Ok([Laurent::from_poly(&sol.q), sol.r1.series(terms), reduced_series(bundle, side, k, &sol.r21, terms)])
        })
        .collect::<Result<Vec<_>>>()?;
    match which {
        Which::Gamma => Ok(series_combine(&m, &[comps[0].clone(), comps[1].clone(), comps[2].clone()])),
        Which::GammaHat => {
            let lh = &bundle.lhat;
            let consts = [
                Laurent::constant(T::zero()),
                Laurent::constant(T::one()),
                markov(&bundle.alpha, &bundle.beta, MarkovTag::BetaStar)?.series(terms),
            ];
            let mut ph: Vec<[Laurent<T>; 3]> = Vec::with_capacity(n + 1);
            for k in 0..=n {
                let row = std::array::from_fn(|b| {
                    let mut r = comps[k][b].clone();
                    if k > 0 {
                        r = r.sub(&ph[k - 1][b].scale(lh.get(k, k - 1)));
                    }
                    r.scale(&(T::one() / lh.get(k, k).clone()))
                });
                ph.push(row);
            }
            let at_t = p_hat1_at_beta_star(bundle)?;
            let direct: Vec<Laurent<T>> = (0..=n)
                .map(|k| {
                    let ct = CauchyTransform::new(at_t.iter().map(|(t, wt, v)| (t.clone(), wt.clone() * v[k].clone())).collect());
                    reduced_series(bundle, Side::Q, k + 1, &ct, terms)
                })
                .collect();
            let shifted = |k: i64| -> [Laurent<T>; 3] {
                std::array::from_fn(|b| match (k < 0, b) {
                    (true, _) => consts[b].scale(&-T::one()),
                    (false, 2) => direct[k as usize].clone(),
                    (false, _) => ph[k as usize][b].sub(&consts[b]),
                })
            };
            let n = n as i64;
            Ok(series_combine(&m, &[shifted(n - 2), shifted(n - 1), shifted(n)]))
        }
    }
}

#[derive(Clone, Debug)]
pub struct AsymptoticCertificate<T> {
    pub which: Which,
    pub n: usize,
    /// Highest power with a nonzero coefficient in each entry.
    pub leading_powers: [[Option<i64>; 3]; 3],
    /// Coefficient of `w^{d_j}` in entry `(i, j)`: the constant term of the
    /// correction matrix `M diag(w^{−d_j})`.
    pub limit: [[T; 3]; 3],
    pub passed: bool,
}

/// `M diag(w^{−d}) = 1 + O(1/w)` coefficient by coefficient.
pub fn asymptotic_check<T: Scalar>(bundle: &Bundle<T>, n: usize, which: Which, sign: GammaSign) -> Result<AsymptoticCertificate<T>> {
    let terms = 2 * n + 6;
    let s = gamma_series(bundle, n, which, terms, sign)?;
    let d = which.powers(n);
    let mut passed = true;
    let limit = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let c = s[i][j].coeff(d[j]).unwrap_or_else(T::zero);
            let target = if i == j { T::one() } else { T::zero() };
            let scale = (d[j] - 1..=s[i][j].top())
                .filter_map(|k| s[i][j].coeff(k))
                .fold(1.0f64, |m, v| m.max(v.to_f64().abs()));
            passed &= (c.clone() - target).negligible(scale);
            for k in d[j] + 1..=s[i][j].top() {
                passed &= s[i][j].coeff(k).is_some_and(|v| v.negligible(scale));
            }
            c
        })
    });
    let leading_powers = std::array::from_fn(|i| std::array::from_fn(|j| s[i][j].leading_power()));
    Ok(AsymptoticCertificate { which, n, leading_powers, limit, passed })
}

/// Frame-free constants recovered from row 2 of `Γ`:
/// `1/η_{n−1}² = (−1)^n lim w Γ₂₁ Γ₂₃` and `c_{n−1}² = (−1)^n lim w^{2n−1} Γ₂₃/Γ₂₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constants<T> {
    pub eta_sq: T,
    pub c_sq: T,
}

pub fn extract_constants<T: Scalar>(bundle: &Bundle<T>, n: usize) -> Result<Constants<T>> {
    let s = gamma_series(bundle, n, Which::Gamma, 2 * n + 2, GammaSign::Corrected)?;
    let a = s[1][0].coeff(n as i64 - 1).unwrap_or_else(T::zero);
    let b = s[1][2].coeff(-(n as i64)).unwrap_or_else(T::zero);
    if a.is_zero() || b.is_zero() {
        return Err(Error::TheoryViolation("row 2 of Γ lacks its leading terms".into()));
    }
    let sg = parity::<T>(n);
    Ok(Constants { eta_sq: sg.clone() / (a.clone() * b.clone()), c_sq: sg * b / a })
}

/// `(h_{n−1}, η̃_{n−1}²/h_{n−1})`: the values the extraction must reproduce.
pub fn expected_constants<T: Scalar>(bundle: &Bundle<T>, n: usize) -> Constants<T> {
    let h = bundle.family.h(n - 1).clone();
    let eta = bundle.averages.eta[n - 1].clone();
    Constants { eta_sq: eta.clone() * eta / h.clone(), c_sq: h }
}

/// Continuous measures for boundary-value checks. The polynomials come from
/// a quadrature discretization; the Cauchy transforms are evaluated with
/// singularity subtraction so that points at distance `eps` from a cut are
/// resolved.
#[derive(Clone, Debug)]
pub struct DensityPair {
    pub alpha: DensityMeasure,
    pub beta: DensityMeasure,
    pub bundle: Bundle<f64>,
    nodes_alpha: Vec<(f64, f64)>,
    nodes_beta: Vec<(f64, f64)>,
}

/// Default node count for the Cauchy transforms.
pub const CAUCHY_NODES: usize = 160;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cut {
    /// `supp β` for `Γ`, `supp α` for `Γ̂`.
    Positive,
    /// `supp α*` for `Γ`, `supp β*` for `Γ̂`.
    Negative,
}

impl DensityPair {
    pub fn new(alpha: DensityMeasure, beta: DensityMeasure, order: usize) -> Result<Self> {
        Self::with_nodes(alpha, beta, order, CAUCHY_NODES)
    }

    pub fn with_nodes(alpha: DensityMeasure, beta: DensityMeasure, order: usize, nodes: usize) -> Result<Self> {
        if alpha.orientation() != Orientation::Positive || beta.orientation() != Orientation::Positive {
            return Err(Error::InvalidMeasure("both measures must be supported on the positive half-line".into()));
        }
        let bundle = Bundle::new(alpha.discretize()?, beta.discretize()?, order, Frame::Normalized)?;
        let nodes_of = |m: &DensityMeasure| {
            let (a, b) = m.support();
            let (x, w) = gauss_legendre_on(nodes, a, b);
            x.into_iter().zip(w).collect::<Vec<_>>()
        };
        Ok(DensityPair { nodes_alpha: nodes_of(&alpha), nodes_beta: nodes_of(&beta), alpha, beta, bundle })
    }

    /// `∫ g(s)/(w − s) ds` over the support of `m` (reflected when `flip`),
    /// for `g = f · density`. With `g_w = g(w)` the singular part is
    /// subtracted and integrated in closed form.
    fn cauchy(
        m: &DensityMeasure,
        nodes: &[(f64, f64)],
        flip: bool,
        f: impl Fn(f64) -> Result<Complex64>,
        f_w: Option<Complex64>,
        w: Complex64,
    ) -> Result<Complex64> {
        let sgn = if flip { -1.0 } else { 1.0 };
        let density = m.density();
        let rho = |s: f64| density.at(sgn * s);
        let g_w = match f_w {
            Some(fw) => {
                let r = density.at_complex(w * sgn).ok_or(Error::RequiresDensity)?;
                Some(fw * r)
            }
            None => None,
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for &(x, wt) in nodes {
            let s = sgn * x;
            let g = f(s)? * rho(s);
            let d = w - s;
            if d.norm() == 0.0 {
                return Err(Error::PoleEvaluation(format!("point on the cut at {s}")));
            }
            acc += match g_w {
                Some(gw) => (g - gw) / d * wt,
                None => g / d * wt,
            };
        }
        if let Some(gw) = g_w {
            let (a, b) = m.support();
            let (lo, hi) = if flip { (-b, -a) } else { (a, b) };
            acc += gw * ((w - lo).ln() - (w - hi).ln());
        }
        Ok(acc)
    }

    fn beta_transform(&self, k: usize, w: Complex64) -> Result<Complex64> {
        let q = &self.bundle.framed.q[k];
        Self::cauchy(&self.beta, &self.nodes_beta, false, |y| Ok(Complex64::new(q.eval(&y), 0.0)), Some(q.eval(&w)), w)
    }

    fn alpha_transform(&self, k: usize, z: Complex64) -> Result<Complex64> {
        let p = &self.bundle.framed.p[k];
        Self::cauchy(&self.alpha, &self.nodes_alpha, false, |x| Ok(Complex64::new(p.eval(&x), 0.0)), Some(p.eval(&z)), z)
    }

    /// `(q_k, q_{1,k}, q_{2,k})` at `w` for every `k`.
    pub fn q_components(&self, w: Complex64) -> Result<Vec<[Complex64; 3]>> {
        (0..self.bundle.order())
            .map(|k| {
                let q1 = self.beta_transform(k, w)?;
                let q2 = Self::cauchy(
                    &self.alpha,
                    &self.nodes_alpha,
                    true,
                    |t| self.beta_transform(k, Complex64::new(t, 0.0)),
                    Some(self.beta_transform(k, w)?),
                    w,
                )?;
                Ok([self.bundle.framed.q[k].eval(&w), q1, q2])
            })
            .collect()
    }

    /// `(p_k, p_{1,k}, p_{2,k})` at `z` for every `k`, and `(0, 1, W_β*(z))`.
    pub fn p_components(&self, z: Complex64) -> Result<PComponents<Complex64>> {
        let comps = (0..self.bundle.order())
            .map(|k| {
                let p1 = self.alpha_transform(k, z)?;
                let p2 = Self::cauchy(
                    &self.beta,
                    &self.nodes_beta,
                    true,
                    |t| self.alpha_transform(k, Complex64::new(t, 0.0)),
                    Some(self.alpha_transform(k, z)?),
                    z,
                )?;
                Ok([self.bundle.framed.p[k].eval(&z), p1, p2])
            })
            .collect::<Result<Vec<_>>>()?;
        let one = Complex64::new(1.0, 0.0);
        let wbs = Self::cauchy(&self.beta, &self.nodes_beta, true, |_| Ok(one), Some(one), z)?;
        Ok(PComponents::from_consts(&self.bundle, comps, &[Complex64::new(0.0, 0.0), one, wbs]))
    }

    pub fn matrix_at(&self, which: Which, n: usize, w: Complex64) -> Result<RHMatrix<Complex64>> {
        match which {
            Which::Gamma => gamma_from_components(&self.bundle, n, &self.q_components(w)?, GammaSign::Corrected),
            Which::GammaHat => {
                gamma_hat_from_components(&self.bundle, n, &self.p_components(w)?)
            }
        }
    }

    fn cut_of(&self, which: Which, w0: f64) -> Option<Cut> {
        let (pos, neg) = match which {
            Which::Gamma => (&self.beta, &self.alpha),
            Which::GammaHat => (&self.alpha, &self.beta),
        };
        let inside = |m: &DensityMeasure, x: f64| {
            let (a, b) = m.support();
            a < x && x < b
        };
        if inside(pos, w0) {
            Some(Cut::Positive)
        } else if inside(neg, -w0) {
            Some(Cut::Negative)
        } else {
            None
        }
    }

    /// Jump matrix at an interior point of a cut.
    pub fn jump_matrix(&self, which: Which, w0: f64) -> Result<[[Complex64; 3]; 3]> {
        let cut = self.cut_of(which, w0).ok_or(Error::NotInSupport(w0))?;
        let mut j: [[Complex64; 3]; 3] =
            std::array::from_fn(|i| std::array::from_fn(|k| Complex64::new(if i == k { 1.0 } else { 0.0 }, 0.0)));
        let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        match (which, cut) {
            (Which::Gamma, Cut::Positive) => j[0][1] = -two_pi_i * self.beta.density().at(w0),
            (Which::Gamma, Cut::Negative) => j[1][2] = -two_pi_i * self.alpha.density().at(-w0),
            (Which::GammaHat, Cut::Positive) => j[0][1] = -two_pi_i * self.alpha.density().at(w0),
            (Which::GammaHat, Cut::Negative) => j[1][2] = -two_pi_i * self.beta.density().at(-w0),
        }
        Ok(j)
    }

    /// `max |M(w0 + iε) − M(w0 − iε) J(w0)|`.
    pub fn jump_residual(&self, which: Which, n: usize, w0: f64, eps: f64) -> Result<f64> {
        Ok(self.scaled_jump_residual(which, n, w0, eps)?.0)
    }

    /// Jump residual together with `max |Γ₊|`, the scale it should be read against.
    pub fn scaled_jump_residual(&self, which: Which, n: usize, w0: f64, eps: f64) -> Result<(f64, f64)> {
        let j = self.jump_matrix(which, w0)?;
        let plus = self.matrix_at(which, n, Complex64::new(w0, eps))?;
        let minus = self.matrix_at(which, n, Complex64::new(w0, -eps))?;
        let prod = mat3(&minus.entries, &j);
        Ok((max_diff(&plus.entries, &prod), max_abs(&plus.entries)))
    }

    /// `max |M(w + iε) − M(w − iε)|` at a point off both cuts.
    pub fn analyticity_residual(&self, which: Which, n: usize, w: f64, eps: f64) -> Result<f64> {
        if self.cut_of(which, w).is_some() {
            return Err(Error::InvalidMeasure(format!("{w} lies on a cut")));
        }
        let plus = self.matrix_at(which, n, Complex64::new(w, eps))?;
        let minus = self.matrix_at(which, n, Complex64::new(w, -eps))?;
        Ok(max_diff(&plus.entries, &minus.entries))
    }

    /// Residuals over several offsets with the least-squares slope of
    /// `log residual` against `log eps`.
    pub fn jump_study(&self, which: Which, n: usize, w0: f64, eps: &[f64]) -> Result<JumpStudy> {
        let pairs = eps
            .iter()
            .map(|&e| self.scaled_jump_residual(which, n, w0, e))
            .collect::<Result<Vec<_>>>()?;
        let (residuals, scales): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        Ok(JumpStudy { eps: eps.to_vec(), slope: loglog_slope(eps, &residuals), residuals, scales })
    }

    /// `𝕐 = Γ diag(e^{−(2v+u)/3}, e^{(v−u)/3}, e^{(2u+v)/3})`, `v = V(w)/ħ_β`,
    /// `u = U(−w)/ħ_α`. Both densities must be given by potentials.
    pub fn constant_jump_transform(&self, gamma: &RHMatrix<Complex64>, w: Complex64) -> Result<RHMatrix<Complex64>> {
        let (Density::Potential(u), Density::Potential(v)) = (self.alpha.density(), self.beta.density()) else {
            return Err(Error::RequiresDensity);
        };
        let vv = v.value_complex(w) / v.hbar;
        let uu = u.value_complex(-w) / u.hbar;
        let d = [(-(2.0 * vv + uu) / 3.0).exp(), ((vv - uu) / 3.0).exp(), ((2.0 * uu + vv) / 3.0).exp()];
        let entries = std::array::from_fn(|i| std::array::from_fn(|j| gamma.entries[i][j] * d[j]));
        Ok(RHMatrix { n: gamma.n, which: gamma.which, entries })
    }

    /// Jump residual of `𝕐` against the constant jump `1 − 2πi E`.
    pub fn constant_jump_residual(&self, n: usize, w0: f64, eps: f64) -> Result<f64> {
        Ok(self.scaled_constant_jump_residual(n, w0, eps)?.0)
    }

    /// As [`Self::constant_jump_residual`], paired with `max |𝕐₊|`.
    pub fn scaled_constant_jump_residual(&self, n: usize, w0: f64, eps: f64) -> Result<(f64, f64)> {
        let cut = self.cut_of(Which::Gamma, w0).ok_or(Error::NotInSupport(w0))?;
        let plus_w = Complex64::new(w0, eps);
        let minus_w = Complex64::new(w0, -eps);
        let plus = self.constant_jump_transform(&self.matrix_at(Which::Gamma, n, plus_w)?, plus_w)?;
        let minus = self.constant_jump_transform(&self.matrix_at(Which::Gamma, n, minus_w)?, minus_w)?;
        let mut j: [[Complex64; 3]; 3] =
            std::array::from_fn(|i| std::array::from_fn(|k| Complex64::new(if i == k { 1.0 } else { 0.0 }, 0.0)));
        let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        match cut {
            Cut::Positive => j[0][1] = -two_pi_i,
            Cut::Negative => j[1][2] = -two_pi_i,
        }
        Ok((max_diff(&plus.entries, &mat3(&minus.entries, &j)), max_abs(&plus.entries)))
    }
}

#[derive(Clone, Debug)]
pub struct JumpStudy {
    pub eps: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `max |Γ₊|` at each offset.
    pub scales: Vec<f64>,
    pub slope: f64,
}

impl JumpStudy {
    /// Linear decay within a factor of two.
    pub fn linear(&self) -> bool {
        (0.5..=2.0).contains(&self.slope)
    }

    pub fn relative(&self) -> Vec<f64> {
        self.residuals.iter().zip(&self.scales).map(|(r, s)| r / s).collect()
    }
}

fn max_diff(a: &[[Complex64; 3]; 3], b: &[[Complex64; 3]; 3]) -> f64 {
    (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| (a[i][j] - b[i][j]).norm())
        .fold(0.0, f64::max)
}

fn max_abs(a: &[[Complex64; 3]; 3]) -> f64 {
    a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
}

fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}
