//! Markov functions of the two Nikishin systems, Hermite–Padé data,
//! auxiliary vectors, extended Christoffel–Darboux identities and the
//! duality pairing.

use crate::bop::Side;
use crate::bundle::Bundle;
use crate::cdkernel::commutator_block;
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::poly::Polynomial;
use crate::scalar::{Field, Lift, Scalar};
use crate::series::Laurent;

/// One of the four measures `α, β, α*, β*` (`*` reflects the support).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reference {
    Alpha,
    Beta,
    AlphaStar,
    BetaStar,
}

impl Reference {
    pub fn atoms<T: Scalar>(self, alpha: &DiscreteMeasure<T>, beta: &DiscreteMeasure<T>) -> Vec<(T, T)> {
        let (m, flip) = match self {
            Reference::Alpha => (alpha, false),
            Reference::Beta => (beta, false),
            Reference::AlphaStar => (alpha, true),
            Reference::BetaStar => (beta, true),
        };
        m.signed_atoms()
            .map(|(s, w)| (if flip { -s } else { s }, w.clone()))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MarkovTag {
    Beta,
    AlphaStar,
    BetaAlphaStar,
    AlphaStarBeta,
    Alpha,
    BetaStar,
    AlphaBetaStar,
    BetaStarAlpha,
}

impl MarkovTag {
    pub const ALL: [MarkovTag; 8] = [
        MarkovTag::Beta,
        MarkovTag::AlphaStar,
        MarkovTag::BetaAlphaStar,
        MarkovTag::AlphaStarBeta,
        MarkovTag::Alpha,
        MarkovTag::BetaStar,
        MarkovTag::AlphaBetaStar,
        MarkovTag::BetaStarAlpha,
    ];

    /// Outer measure and, for the nested functions, the inner one.
    pub fn chain(self) -> (Reference, Option<Reference>) {
        use Reference::*;
        match self {
            MarkovTag::Beta => (Beta, None),
            MarkovTag::AlphaStar => (AlphaStar, None),
            MarkovTag::BetaAlphaStar => (Beta, Some(AlphaStar)),
            MarkovTag::AlphaStarBeta => (AlphaStar, Some(Beta)),
            MarkovTag::Alpha => (Alpha, None),
            MarkovTag::BetaStar => (BetaStar, None),
            MarkovTag::AlphaBetaStar => (Alpha, Some(BetaStar)),
            MarkovTag::BetaStarAlpha => (BetaStar, Some(Alpha)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MarkovTag::Beta => "W_beta",
            MarkovTag::AlphaStar => "W_alpha*",
            MarkovTag::BetaAlphaStar => "W_beta,alpha*",
            MarkovTag::AlphaStarBeta => "W_alpha*,beta",
            MarkovTag::Alpha => "W_alpha",
            MarkovTag::BetaStar => "W_beta*",
            MarkovTag::AlphaBetaStar => "W_alpha,beta*",
            MarkovTag::BetaStarAlpha => "W_beta*,alpha",
        }
    }
}

/// `Σ w_k / (z − s_k)` for a signed discrete measure.
#[derive(Clone, Debug, PartialEq)]
pub struct CauchyTransform<T> {
    atoms: Vec<(T, T)>,
}

impl<T: Scalar> CauchyTransform<T> {
    pub fn new(atoms: Vec<(T, T)>) -> Self {
        CauchyTransform { atoms }
    }

    pub fn atoms(&self) -> &[(T, T)] {
        &self.atoms
    }

    fn in_hull<F: Field>(&self, z: &F) -> bool {
        let (re, im) = z.parts();
        let lo = self.atoms.iter().map(|(t, _)| t.to_f64()).fold(f64::INFINITY, f64::min);
        let hi = self.atoms.iter().map(|(t, _)| t.to_f64()).fold(f64::NEG_INFINITY, f64::max);
        im == 0.0 && lo <= re && re <= hi
    }

    /// Evaluation for a transform that annihilates polynomials of degree
    /// below `deg q`, with `values` the values of `q` at the atoms. In
    /// floating point, off the hull of the atoms, uses
    /// `∫ q(t) dμ(t)/(z − t) / q(z)`.
    pub fn eval_reduced<F: Field>(&self, z: &F, q: &Polynomial<T>, values: &[T]) -> Result<F>
    where
        T: Lift<F>,
    {
        if T::EXACT || q.degree() == 0 || self.in_hull(z) {
            return self.eval(z);
        }
        let mut acc = F::zero();
        for ((t, w), qt) in self.atoms.iter().zip(values) {
            acc = acc + Lift::<F>::lift(&(w.clone() * qt.clone())) / (z.clone() - Lift::<F>::lift(t));
        }
        Ok(acc / q.eval(z))
    }

    /// Evaluation for a transform whose first `m` moments vanish. In floating
    /// point, outside the support, uses `z^{−m} ∫ t^m dμ(t)/(z − t)` so that
    /// the `O(z^{−m−1})` value is not formed by cancellation.
    pub fn eval_vanishing<F: Field>(&self, z: &F, m: usize) -> Result<F>
    where
        T: Lift<F>,
    {
        let radius = self.atoms.iter().map(|(t, _)| t.to_f64().abs()).fold(0.0, f64::max);
        if T::EXACT || m == 0 || z.magnitude() <= radius {
            return self.eval(z);
        }
        let mut acc = F::zero();
        for (t, w) in &self.atoms {
            let d = z.clone() - Lift::<F>::lift(t);
            acc = acc + Lift::<F>::lift(&(w.clone() * num_traits::pow(t.clone(), m))) / d;
        }
        Ok(acc / num_traits::pow(z.clone(), m))
    }

    pub fn eval<F: Field>(&self, z: &F) -> Result<F>
    where
        T: Lift<F>,
    {
        let mut acc = F::zero();
        for (s, w) in &self.atoms {
            let d = z.clone() - Lift::<F>::lift(s);
            if d.is_zero() {
                return Err(Error::PoleEvaluation(format!("point coincides with an atom at {s}")));
            }
            acc = acc + Lift::<F>::lift(w) / d;
        }
        Ok(acc)
    }

    /// `Σ_k w_k s_k^j`, the coefficient of `z^{−j−1}`.
    pub fn coefficient(&self, j: usize) -> T {
        self.atoms
            .iter()
            .fold(T::zero(), |acc, (s, w)| acc + w.clone() * num_traits::pow(s.clone(), j))
    }

    /// Expansion at infinity known through `z^{−terms}`.
    pub fn series(&self, terms: usize) -> Laurent<T> {
        Laurent::from_inverse_powers((0..terms.max(1)).map(|j| self.coefficient(j)).collect())
    }

    /// Expansion of a transform that annihilates polynomials of degree below
    /// `deg q`, with `values` the values of `q` at the atoms. In floating
    /// point each coefficient `∫ t^j dμ` is formed as `∫ q s_j dμ`, where
    /// `s_j` is the quotient of `t^j` by `q`.
    pub fn series_reduced(&self, terms: usize, q: &Polynomial<T>, values: &[T]) -> Laurent<T> {
        let m = q.degree();
        if T::EXACT || m == 0 {
            return self.series(terms);
        }
        let lead = q.leading();
        let mut quot = Polynomial::constant(T::one() / lead.clone());
        let mut rem = Polynomial::monomial(m).sub(&q.scale(&(T::one() / lead.clone())));
        let mut out = vec![T::zero(); m.min(terms.max(1))];
        for j in m..terms.max(1) {
            if j > m {
                let c = rem.coeff(m - 1) / lead.clone();
                quot = quot.shift_up().add(&Polynomial::constant(c.clone()));
                rem = rem.shift_up().sub(&q.scale(&c));
            }
            let c = self
                .atoms
                .iter()
                .zip(values)
                .fold(T::zero(), |acc, ((t, w), qt)| acc + w.clone() * qt.clone() * quot.eval(t));
            out.push(c);
        }
        Laurent::from_inverse_powers(out)
    }

    /// Largest `|s_k|`.
    pub fn radius(&self) -> f64 {
        self.atoms.iter().fold(0.0, |r, (s, _)| r.max(s.to_f64().abs()))
    }
}

/// `Σ_t v_t / (s − t)` at each outer atom.
fn inner_weights<T: Scalar>(outer: &[(T, T)], inner: &[(T, T)]) -> Result<Vec<T>> {
    outer
        .iter()
        .map(|(s, _)| {
            inner.iter().try_fold(T::zero(), |acc, (t, v)| {
                let d = s.clone() - t.clone();
                if d.is_zero() {
                    return Err(Error::KernelSingularity { x: s.to_string(), y: (-t.clone()).to_string() });
                }
                Ok(acc + v.clone() / d)
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkovFunction<T> {
    pub tag: MarkovTag,
    pub transform: CauchyTransform<T>,
}

impl<T: Scalar> MarkovFunction<T> {
    pub fn eval<F: Field>(&self, z: &F) -> Result<F>
    where
        T: Lift<F>,
    {
        self.transform.eval(z)
    }

    pub fn series(&self, terms: usize) -> Laurent<T> {
        self.transform.series(terms)
    }
}

/// A nested function `W_{μν}(z) = ∫∫ dμ(s) dν(t) / ((z − s)(s − t))` is the
/// Cauchy transform of `μ` reweighted by `∫ dν(t)/(s − t)`.
pub fn markov<T: Scalar>(alpha: &DiscreteMeasure<T>, beta: &DiscreteMeasure<T>, tag: MarkovTag) -> Result<MarkovFunction<T>> {
    let (outer, inner) = tag.chain();
    let outer = outer.atoms(alpha, beta);
    let atoms = match inner {
        None => outer,
        Some(r) => {
            let g = inner_weights(&outer, &r.atoms(alpha, beta))?;
            outer.into_iter().zip(g).map(|((s, w), g)| (s, w * g)).collect()
        }
    };
    Ok(MarkovFunction { tag, transform: CauchyTransform::new(atoms) })
}

/// Which of the three approximation problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    /// Systems `(W_β, W_βα*)`, `(W_α*, W_α*β)`, solved by `q_n`.
    Q,
    /// Systems `(W_α, W_αβ*)`, `(W_β*, W_β*α)`, solved by `p_n`.
    P,
    /// Systems `(W_α*, W_α*β)`, `(W_β, W_βα*)`, solved by `p_n(−z)`.
    Switched,
}

impl ProblemKind {
    /// `[W_1, W_2, W_12, W_21]`.
    pub fn tags(self) -> [MarkovTag; 4] {
        use MarkovTag::*;
        match self {
            ProblemKind::Q => [Beta, AlphaStar, BetaAlphaStar, AlphaStarBeta],
            ProblemKind::P => [Alpha, BetaStar, AlphaBetaStar, BetaStarAlpha],
            ProblemKind::Switched => [AlphaStar, Beta, AlphaStarBeta, BetaAlphaStar],
        }
    }
}

/// Two Nikishin systems `(W_1, W_12)` and `(W_2, W_21)` on a pair of signed
/// measures.
#[derive(Clone, Debug)]
pub struct NikishinPair<T> {
    pub kind: ProblemKind,
    pub w1: MarkovFunction<T>,
    pub w2: MarkovFunction<T>,
    pub w12: MarkovFunction<T>,
    pub w21: MarkovFunction<T>,
    first: Vec<(T, T)>,
    second: Vec<(T, T)>,
    g: Vec<T>,
}

impl<T: Scalar> NikishinPair<T> {
    pub fn new(alpha: &DiscreteMeasure<T>, beta: &DiscreteMeasure<T>, kind: ProblemKind) -> Result<Self> {
        let [t1, t2, t12, t21] = kind.tags();
        let first = t1.chain().0.atoms(alpha, beta);
        let second = t2.chain().0.atoms(alpha, beta);
        let g = inner_weights(&first, &second)?;
        Ok(NikishinPair {
            kind,
            w1: markov(alpha, beta, t1)?,
            w2: markov(alpha, beta, t2)?,
            w12: markov(alpha, beta, t12)?,
            w21: markov(alpha, beta, t21)?,
            first,
            second,
            g,
        })
    }

    /// `W_1 W_2 − W_12 − W_21`.
    pub fn plucker_residual<F: Field>(&self, z: &F) -> Result<F>
    where
        T: Lift<F>,
    {
        Ok(self.w1.eval(z)? * self.w2.eval(z)? - self.w12.eval(z)? - self.w21.eval(z)?)
    }
}

/// `W_β W_α* − W_βα* − W_α*β` (or the `α ↔ β` counterpart when `swapped`).
pub fn plucker_residual<T, F>(alpha: &DiscreteMeasure<T>, beta: &DiscreteMeasure<T>, z: &F, swapped: bool) -> Result<F>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    let kind = if swapped { ProblemKind::P } else { ProblemKind::Q };
    NikishinPair::new(alpha, beta, kind)?.plucker_residual(z)
}

#[derive(Clone, Debug)]
pub struct PadeSolution<T> {
    pub kind: ProblemKind,
    pub degree: usize,
    pub q: Polynomial<T>,
    /// `∫ (Q(z) − Q(s))/(z − s) dμ_1(s)`.
    pub p1: Polynomial<T>,
    /// Same with the reweighted measure of `W_12`.
    pub p12: Polynomial<T>,
    pub r1: CauchyTransform<T>,
    pub r12: CauchyTransform<T>,
    /// `∫ R_1(t)/(z − t) dμ_2(t)`.
    pub r21: CauchyTransform<T>,
}

pub fn pade_solve<T: Scalar>(pair: &NikishinPair<T>, q: Polynomial<T>) -> Result<PadeSolution<T>> {
    let mut p1 = Polynomial::zero();
    let mut p12 = Polynomial::zero();
    let mut r1 = Vec::with_capacity(pair.first.len());
    let mut r12 = Vec::with_capacity(pair.first.len());
    for ((s, w), g) in pair.first.iter().zip(&pair.g) {
        let dd = q.divided_difference(s);
        p1 = p1.add(&dd.scale(w));
        p12 = p12.add(&dd.scale(&(w.clone() * g.clone())));
        let qs = q.eval(s);
        r1.push((s.clone(), w.clone() * qs.clone()));
        r12.push((s.clone(), w.clone() * g.clone() * qs));
    }
    let r1 = CauchyTransform::new(r1);
    let r21 = pair
        .second
        .iter()
        .map(|(t, v)| Ok((t.clone(), v.clone() * r1.eval(t)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PadeSolution {
        kind: pair.kind,
        degree: q.degree(),
        q,
        p1,
        p12,
        r1,
        r12: CauchyTransform::new(r12),
        r21: CauchyTransform::new(r21),
    })
}

/// Problem data for degree `n` of a bundle; `Q` is `q_n`, `p_n` or `p_n(−z)`.
pub fn pade_for_bundle<T: Scalar>(bundle: &Bundle<T>, kind: ProblemKind, n: usize) -> Result<(NikishinPair<T>, PadeSolution<T>)> {
    if n >= bundle.order() {
        return Err(Error::OrderUnderflow { needed: n + 1, available: bundle.order() });
    }
    let q = match kind {
        ProblemKind::Q => bundle.framed.q[n].clone(),
        ProblemKind::P => bundle.framed.p[n].clone(),
        ProblemKind::Switched => bundle.framed.p[n].reflect(),
    };
    let pair = NikishinPair::new(&bundle.alpha, &bundle.beta, kind)?;
    let sol = pade_solve(&pair, q)?;
    Ok((pair, sol))
}

#[derive(Clone, Debug)]
pub struct OrderCertificate<T> {
    pub degree: usize,
    /// Checked down to `z^{−terms}`.
    pub terms: usize,
    /// Coefficients of `Q W_1 − P_1 − R_1`.
    pub first: Vec<T>,
    /// Coefficients of `Q W_12 − P_12 − R_12`.
    pub second: Vec<T>,
    /// Coefficients of `Q W_21 − P_1 W_2 + P_12 − R_21`.
    pub third: Vec<T>,
    /// Coefficients of `R_21` at `z^{−1} … z^{−n}`.
    pub third_low_order: Vec<T>,
    pub passed: bool,
}

impl<T: Scalar> OrderCertificate<T> {
    pub fn max_residual(&self) -> f64 {
        self.first
            .iter()
            .chain(&self.second)
            .chain(&self.third)
            .chain(&self.third_low_order)
            .fold(0.0, |m, c| m.max(c.to_f64().abs()))
    }
}

fn coefficients<T: Scalar>(s: &Laurent<T>, from: i64, to: i64) -> Vec<T> {
    (from..=to).rev().map(|k| s.coeff(k).expect("series truncated too early")).collect()
}

/// Series form of the three approximation conditions, coefficient by
/// coefficient down to `z^{−terms}`.
pub fn order_check<T: Scalar>(pair: &NikishinPair<T>, sol: &PadeSolution<T>, terms: usize) -> OrderCertificate<T> {
    let n = sol.degree;
    let k = terms.max(n + 1);
    let need = k + n + 1;
    let q = Laurent::from_poly(&sol.q);
    let p1 = Laurent::from_poly(&sol.p1);
    let p12 = Laurent::from_poly(&sol.p12);
    let top = n as i64;
    let low = -(k as i64);
    let d1 = q.mul(&pair.w1.series(need)).sub(&p1).sub(&sol.r1.series(need));
    let d12 = q.mul(&pair.w12.series(need)).sub(&p12).sub(&sol.r12.series(need));
    let t3 = q
        .mul(&pair.w21.series(need))
        .sub(&p1.mul(&pair.w2.series(need)))
        .add(&p12);
    let d3 = t3.sub(&sol.r21.series(need));
    let first = coefficients(&d1, low, top);
    let second = coefficients(&d12, low, top);
    let third = coefficients(&d3, low, top);
    let third_low_order = (0..n).map(|j| sol.r21.coefficient(j)).collect::<Vec<_>>();
    let scale = [&pair.w1, &pair.w2, &pair.w12, &pair.w21]
        .iter()
        .map(|w| w.transform.coefficient(0).to_f64().abs() * (1.0 + w.transform.radius()).powi((2 * n + k) as i32))
        .fold(1.0, f64::max)
        * sol.q.coeffs().iter().fold(0.0, |m, c| m + c.to_f64().abs()).max(1.0);
    let passed = first
        .iter()
        .chain(&second)
        .chain(&third)
        .chain(&third_low_order)
        .all(|c| c.negligible(scale));
    OrderCertificate { degree: n, terms: k, first, second, third, third_low_order, passed }
}

/// `R_1 W_2 − R_12 − R_21` at a point.
pub fn third_condition_pointwise<T, F>(pair: &NikishinPair<T>, sol: &PadeSolution<T>, z: &F) -> Result<F>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    Ok(sol.r1.eval(z)? * pair.w2.eval(z)? - sol.r12.eval(z)? - sol.r21.eval(z)?)
}

/// Full vectors `q_a(w)`, `q̂_a(w) = q_aᵀ(w) L̂`, `p_b(z)`, `p̂_b(z)` for
/// `a, b = 0, 1, 2`. The hatted `q` vectors have length `N − 1`.
#[derive(Clone, Debug)]
pub struct AuxVectors<F> {
    pub q: [Vec<F>; 3],
    pub q_hat: [Vec<F>; 3],
    pub p: [Vec<F>; 3],
    pub p_hat: [Vec<F>; 3],
}

fn lift<T: Lift<F>, F>(t: &T) -> F {
    Lift::<F>::lift(t)
}

/// `(v_1(ζ), v_2(ζ))` with `v_1 = ∫ f(s) dμ(s)/(ζ − s)` and
/// `v_2 = ∫ v_1(t)/(ζ − t) dν(t)`, for each row of `values`. Row `k` of
/// `v_2` is orthogonal to polynomials of degree `< k` in `t`; `reduce`
/// supplies monic degree-`k` polynomials with their values at the atoms of
/// `ν` for the floating-point evaluation outside the support.
fn nested_transforms<T, F>(
    values: &[Vec<T>],
    mu: &[(T, T)],
    nu: &[(T, T)],
    reduce: &Reducer<T>,
    at: &F,
) -> Result<(Vec<F>, Vec<F>)>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    let mut v1 = Vec::with_capacity(values.len());
    let mut v2 = Vec::with_capacity(values.len());
    for (k, row) in values.iter().enumerate() {
        let inner = CauchyTransform::new(mu.iter().zip(row).map(|((s, w), f)| (s.clone(), w.clone() * f.clone())).collect());
        v1.push(inner.eval(at)?);
        let outer = nu
            .iter()
            .map(|(t, v)| Ok((t.clone(), v.clone() * inner.eval(t)?)))
            .collect::<Result<Vec<_>>>()?;
        v2.push(CauchyTransform::new(outer).eval_reduced(at, &reduce.polys[k], &reduce.values[k])?);
    }
    Ok((v1, v2))
}

/// Monic polynomials in the outer variable and their values at its atoms.
struct Reducer<T> {
    polys: Vec<Polynomial<T>>,
    values: Vec<Vec<T>>,
}

impl<T: Scalar> Reducer<T> {
    /// `t ↦ π̃_k(−t)` for the family on `side`, whose reflected atoms carry
    /// the outer integral.
    fn reflected(bundle: &Bundle<T>, side: Side) -> Self {
        let m = match side {
            Side::P => &bundle.alpha,
            Side::Q => &bundle.beta,
        };
        let polys: Vec<Polynomial<T>> = (0..bundle.order()).map(|k| bundle.family.monic(side, k).reflect()).collect();
        let values = match bundle.family.atom_values() {
            Some((pv, qv)) => match side {
                Side::P => pv.clone(),
                Side::Q => qv.clone(),
            },
            None => (0..bundle.order())
                .map(|k| m.signed_atoms().map(|(x, _)| bundle.family.monic(side, k).eval(&x)).collect())
                .collect(),
        };
        Reducer { polys, values }
    }
}

/// Series of a transform over the reflected atoms of the measure on the
/// other side of `side`, annihilating polynomials of degree below `k`.
pub(crate) fn reduced_series<T: Scalar>(bundle: &Bundle<T>, side: Side, k: usize, ct: &CauchyTransform<T>, terms: usize) -> Laurent<T> {
    let red = Reducer::reflected(bundle, side);
    match (red.polys.get(k), red.values.get(k)) {
        (Some(q), Some(v)) => ct.series_reduced(terms, q, v),
        _ => ct.series(terms),
    }
}

/// Solves `L̂ x = v` by forward substitution.
pub fn lhat_solve<T, F>(bundle: &Bundle<T>, v: &[F]) -> Vec<F>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    let lh = &bundle.lhat;
    let mut out: Vec<F> = Vec::with_capacity(v.len());
    for k in 0..v.len() {
        let mut r = v[k].clone();
        if k > 0 {
            r = r - lift::<T, F>(lh.get(k, k - 1)) * out[k - 1].clone();
        }
        out.push(r / lift::<T, F>(lh.get(k, k)));
    }
    out
}

fn lhat_right<T, F>(bundle: &Bundle<T>, v: &[F]) -> Vec<F>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    let lh = &bundle.lhat;
    (0..v.len().saturating_sub(1))
        .map(|k| v[k].clone() * lift::<T, F>(lh.get(k, k)) + v[k + 1].clone() * lift::<T, F>(lh.get(k + 1, k)))
        .collect()
}

pub fn aux_vectors<T, F>(bundle: &Bundle<T>, w: &F, z: &F) -> Result<AuxVectors<F>>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    let (a, b) = (&bundle.alpha, &bundle.beta);
    let beta_atoms = Reference::Beta.atoms(a, b);
    let alpha_atoms = Reference::Alpha.atoms(a, b);
    let f = &bundle.framed;
    let (p_vals, q_vals) = bundle.framed_atom_values();
    let (q1, q2) = nested_transforms(&q_vals, &beta_atoms, &Reference::AlphaStar.atoms(a, b), &Reducer::reflected(bundle, Side::P), w)?;
    let (p1, p2) = nested_transforms(&p_vals, &alpha_atoms, &Reference::BetaStar.atoms(a, b), &Reducer::reflected(bundle, Side::Q), z)?;
    let q0: Vec<F> = f.q.iter().map(|q| q.eval(w)).collect();
    let p0: Vec<F> = f.p.iter().map(|p| p.eval(z)).collect();
    let ph0 = lhat_solve(bundle, &p0);
    let ph1 = lhat_solve(bundle, &p1).into_iter().map(|v| v - F::one()).collect();
    let at_t = p_hat1_at_beta_star(bundle)?;
    let red = Reducer::reflected(bundle, Side::Q);
    let ph2 = (0..bundle.order())
        .map(|k| {
            let ct = CauchyTransform::new(at_t.iter().map(|(t, wt, v)| (t.clone(), wt.clone() * v[k].clone())).collect());
            match (red.polys.get(k + 1), red.values.get(k + 1)) {
                (Some(q), Some(v)) => ct.eval_reduced(z, q, v),
                _ => ct.eval_vanishing(z, k + 1),
            }
        })
        .collect::<Result<Vec<F>>>()?;
    let q_hat = [lhat_right(bundle, &q0), lhat_right(bundle, &q1), lhat_right(bundle, &q2)];
    Ok(AuxVectors { q: [q0, q1, q2], q_hat, p: [p0, p1, p2], p_hat: [ph0, ph1, ph2] })
}

/// `⟨f|g⟩ = ∫∫ f(x) g(y) dα dβ / (x + y)`.
fn bipairing<T: Scalar>(bundle: &Bundle<T>, f: impl Fn(&T) -> T, g: impl Fn(&T) -> T) -> T {
    let mut acc = T::zero();
    for (x, wx) in bundle.alpha.signed_atoms() {
        let fx = f(&x) * wx.clone();
        for (y, wy) in bundle.beta.signed_atoms() {
            acc = acc + fx.clone() * g(&y) * wy.clone() / (x.clone() + y);
        }
    }
    acc
}

/// `(t, weight, p̂_1(t))` over the atoms of `dβ*`.
pub(crate) fn p_hat1_at_beta_star<T: Scalar>(bundle: &Bundle<T>) -> Result<Vec<(T, T, Vec<T>)>> {
    let alpha_atoms = Reference::Alpha.atoms(&bundle.alpha, &bundle.beta);
    let p_values = bundle.framed_atom_values().0;
    Reference::BetaStar
        .atoms(&bundle.alpha, &bundle.beta)
        .into_iter()
        .map(|(t, wt)| {
            let p1_t = p_values
                .iter()
                .map(|row| {
                    CauchyTransform::new(alpha_atoms.iter().zip(row).map(|((s, w), f)| (s.clone(), w.clone() * f.clone())).collect())
                        .eval(&t)
                })
                .collect::<Result<Vec<T>>>()?;
            let ph1: Vec<T> = lhat_solve(bundle, &p1_t).into_iter().map(|v| v - T::one()).collect();
            Ok((t, wt, ph1))
        })
        .collect()
}

/// Differences between two routes to `p̂_1` and `p̂_2`:
/// `L̂⁻¹(p_1 + ⟨p|1⟩/β₀)` against `L̂⁻¹p_1 − 𝟏`, and
/// `∫ p̂_1(y)/(z − y) dβ*(y)` against `L̂⁻¹p_2 − W_β*(z)`.
pub fn aux_consistency<T, F>(bundle: &Bundle<T>, z: &F) -> Result<(Vec<F>, Vec<F>)>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    let aux = aux_vectors(bundle, z, z)?;
    let beta0 = bundle.beta0();
    let shifted: Vec<F> = bundle
        .framed
        .p
        .iter()
        .zip(&aux.p[1])
        .map(|(p, v)| v.clone() + lift::<T, F>(&(bipairing(bundle, |x| p.eval(x), |_| T::one()) / beta0.clone())))
        .collect();
    let first = lhat_solve(bundle, &shifted)
        .into_iter()
        .zip(&aux.p_hat[1])
        .map(|(u, v)| u - v.clone())
        .collect();
    let wbs = markov(&bundle.alpha, &bundle.beta, MarkovTag::BetaStar)?.eval(z)?;
    let integral: Vec<F> = lhat_solve(bundle, &aux.p[2]).into_iter().map(|v| v - wbs.clone()).collect();
    let second = integral.into_iter().zip(&aux.p_hat[2]).map(|(u, v)| u - v.clone()).collect();
    Ok((first, second))
}

type Grid<F> = [[F; 3]; 3];

fn tagged<T, F>(bundle: &Bundle<T>, tag: MarkovTag, at: &F) -> Result<F>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    markov(&bundle.alpha, &bundle.beta, tag)?.eval(at)
}

/// The constant matrix of the extended CD identity for `q_a`, `p_b`.
pub fn f_matrix<T, F>(bundle: &Bundle<T>, w: &F, z: &F) -> Result<Grid<F>>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    use MarkovTag::*;
    let (o, l) = (F::zero, F::one);
    let wbs_z = tagged(bundle, BetaStar, z)?;
    let wb_w = tagged(bundle, Beta, w)?;
    let wa_z = tagged(bundle, Alpha, z)?;
    let was_w = tagged(bundle, AlphaStar, w)?;
    let wasb_w = tagged(bundle, AlphaStarBeta, w)?;
    let wbsa_z = tagged(bundle, BetaStarAlpha, z)?;
    Ok([
        [o(), o(), l()],
        [o(), l(), wbs_z.clone() + wb_w],
        [l(), wa_z + was_w.clone(), was_w * wbs_z + wasb_w + wbsa_z],
    ])
}

/// Reading of the correction matrix in the hatted extended CD identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FhatVariant {
    /// Entries confirmed by exact evaluation.
    Derived,
    /// Literal transcription: `W_β(z)` at (1,1), `1` at (2,0); the symbol
    /// `W_α*β*` is read as `W_α*β`.
    AsPrinted,
}

pub fn f_hat_matrix<T, F>(bundle: &Bundle<T>, w: &F, z: &F, variant: FhatVariant) -> Result<Grid<F>>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    use MarkovTag::*;
    let f = f_matrix(bundle, w, z)?;
    let wbs_z = tagged(bundle, BetaStar, z)?;
    let wb_w = tagged(bundle, Beta, w)?;
    let wasb_w = tagged(bundle, AlphaStarBeta, w)?;
    let (c11, c20) = match variant {
        FhatVariant::Derived => (wb_w.clone(), F::zero()),
        FhatVariant::AsPrinted => (tagged(bundle, Beta, z)?, F::one()),
    };
    let corr = [
        [F::zero(), F::one(), wbs_z.clone()],
        [F::zero(), c11, wb_w * wbs_z.clone()],
        [c20, wasb_w.clone(), wasb_w * wbs_z],
    ];
    let k = (w.clone() + z.clone()) / lift::<T, F>(&bundle.beta0());
    Ok(std::array::from_fn(|a| std::array::from_fn(|b| f[a][b].clone() - k.clone() * corr[a][b].clone())))
}

/// The duality matrix: ones on the antidiagonal.
pub fn j_matrix<F: Field>() -> Grid<F> {
    std::array::from_fn(|a| std::array::from_fn(|b| if a + b == 2 { F::one() } else { F::zero() }))
}

fn q_window<F: Field>(v: &[F], n: usize) -> [F; 3] {
    [v[n - 1].clone(), v[n].clone(), v[n + 1].clone()]
}

fn p_window<F: Field>(v: &[F], n: usize) -> [F; 3] {
    [if n >= 2 { v[n - 2].clone() } else { F::zero() }, v[n - 1].clone(), v[n].clone()]
}

fn partial_pairing<F: Field>(u: &[F], v: &[F], n: usize) -> F {
    (0..n).fold(F::zero(), |acc, j| acc + u[j].clone() * v[j].clone())
}

/// Residuals of `(w+z) q_aᵀ(w) Π p_b(z) = q_aᵀ(w) 𝔸(−w) p̂_b(z) − 𝔽_ab` for all `a, b`.
pub fn ecd_residuals<T, F>(bundle: &Bundle<T>, n: usize, w: &F, z: &F) -> Result<Grid<F>>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    let block = commutator_block(bundle, n)?;
    let aux = aux_vectors(bundle, w, z)?;
    let f = f_matrix(bundle, w, z)?;
    let s = -w.clone();
    let wz = w.clone() + z.clone();
    Ok(std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let lhs = wz.clone() * partial_pairing(&aux.q[a], &aux.p[b], n);
            let rhs = block.apply(&q_window(&aux.q[a], n), &s, &p_window(&aux.p_hat[b], n)) - f[a][b].clone();
            lhs - rhs
        })
    }))
}

pub fn ecd_residual<T, F>(bundle: &Bundle<T>, a: usize, b: usize, n: usize, w: &F, z: &F) -> Result<F>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    Ok(ecd_residuals(bundle, n, w, z)?[a][b].clone())
}

/// Residuals of `(w+z) q̂_aᵀ(w) Π p̂_b(z) = q_aᵀ(w) 𝔸(z) p̂_b(z) − 𝔽̂_ab`.
pub fn ecd_hat_residuals<T, F>(bundle: &Bundle<T>, n: usize, w: &F, z: &F, variant: FhatVariant) -> Result<Grid<F>>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    let block = commutator_block(bundle, n)?;
    let aux = aux_vectors(bundle, w, z)?;
    let f = f_hat_matrix(bundle, w, z, variant)?;
    let wz = w.clone() + z.clone();
    Ok(std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let lhs = wz.clone() * partial_pairing(&aux.q_hat[a], &aux.p_hat[b], n);
            let rhs = block.apply(&q_window(&aux.q[a], n), z, &p_window(&aux.p_hat[b], n)) - f[a][b].clone();
            lhs - rhs
        })
    }))
}

pub fn ecd_hat_residual<T, F>(bundle: &Bundle<T>, a: usize, b: usize, n: usize, w: &F, z: &F) -> Result<F>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    Ok(ecd_hat_residuals(bundle, n, w, z, FhatVariant::Derived)?[a][b].clone())
}

/// `q_aᵀ(−z) 𝔸(z) p̂_b(z)` for all `a, b`.
pub fn duality_matrix<T, F>(bundle: &Bundle<T>, n: usize, z: &F) -> Result<Grid<F>>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    let block = commutator_block(bundle, n)?;
    let aux = aux_vectors(bundle, &-z.clone(), z)?;
    Ok(std::array::from_fn(|a| {
        std::array::from_fn(|b| block.apply(&q_window(&aux.q[a], n), z, &p_window(&aux.p_hat[b], n)))
    }))
}

/// `q_aᵀ(−z) 𝔸(z) p̂_b(z) − 𝕁_ab`.
pub fn duality_check<T, F>(bundle: &Bundle<T>, a: usize, b: usize, n: usize, z: &F) -> Result<F>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    Ok(duality_matrix(bundle, n, z)?[a][b].clone() - j_matrix::<F>()[a][b].clone())
}

/// Residuals of the two families of identities linking the hatted vectors
/// with `Y` and `X`:
/// `w q̂_aᵀ(w) − q_aᵀ(w) Yᵀ L̂ (+ ⟨1|q̂_0ᵀ⟩ for a = 2)` on columns `< N−2`, and
/// `(z − X) L̂ p̂_b(z) − r_b(z)` on rows `< N−2`, with `r_0 = 0`,
/// `r_1 = ⟨p|z+y⟩/β₀`, `r_2 = −⟨p|1⟩ + ⟨p|z+y⟩ W_β*(z)/β₀`.
#[derive(Clone, Debug)]
pub struct MultiplicationResiduals<F> {
    pub q_side: [Vec<F>; 3],
    pub p_side: [Vec<F>; 3],
}

pub fn multiplication_residuals<T, F>(bundle: &Bundle<T>, w: &F, z: &F) -> Result<MultiplicationResiduals<F>>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    let size = bundle.order();
    let window = size.saturating_sub(2);
    let aux = aux_vectors(bundle, w, z)?;
    let ytl = bundle.y.matrix.transpose().matmul(&bundle.lhat.matrix);
    let one_qhat: Vec<T> = bundle
        .hatted
        .q_hat
        .iter()
        .map(|qh| bipairing(bundle, |_| T::one(), |y| qh.eval(y)))
        .collect();
    let q_side = std::array::from_fn(|a| {
        (0..window)
            .map(|j| {
                let mut r = w.clone() * aux.q_hat[a][j].clone();
                for i in 0..size {
                    r = r - aux.q[a][i].clone() * lift::<T, F>(&ytl[(i, j)]);
                }
                if a == 2 {
                    r = r + lift::<T, F>(&one_qhat[j]);
                }
                r
            })
            .collect()
    });
    let beta0 = lift::<T, F>(&bundle.beta0());
    let wbs = tagged(bundle, MarkovTag::BetaStar, z)?;
    let p_one: Vec<F> = bundle
        .framed
        .p
        .iter()
        .map(|p| lift::<T, F>(&bipairing(bundle, |x| p.eval(x), |_| T::one())))
        .collect();
    let p_y: Vec<F> = bundle
        .framed
        .p
        .iter()
        .map(|p| lift::<T, F>(&bipairing(bundle, |x| p.eval(x), |y| y.clone())))
        .collect();
    let lh = &bundle.lhat.matrix;
    let ah = &bundle.factors.ahat.matrix;
    let p_side = std::array::from_fn(|b| {
        (0..window)
            .map(|i| {
                let mut r = F::zero();
                for j in 0..size {
                    r = r + (z.clone() * lift::<T, F>(&lh[(i, j)]) - lift::<T, F>(&ah[(i, j)])) * aux.p_hat[b][j].clone();
                }
                let zy = z.clone() * p_one[i].clone() + p_y[i].clone();
                let rhs = match b {
                    0 => F::zero(),
                    1 => zy / beta0.clone(),
                    _ => -p_one[i].clone() + zy * wbs.clone() / beta0.clone(),
                };
                r - rhs
            })
            .collect()
    });
    Ok(MultiplicationResiduals { q_side, p_side })
}
