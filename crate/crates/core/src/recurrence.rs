//! Multiplication operators, their banded factors, hatted families and the
//! four-term recurrences.

use itertools::Itertools;
use rayon::prelude::*;

use crate::bimoment::BimomentMatrix;
use crate::bop::{pairing, Averages, PolynomialFamily};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::measure::DiscreteMeasure;
use crate::poly::Polynomial;
use crate::scalar::{Field, Lift, Scalar};

/// Diagonal rescaling applied to the monic families.
///
/// In `MonicDual` the families are `p_n = p̃_n`, `q_n = q̃_n/h_n`: still
/// biorthonormal and rational. `Normalized` divides both by `sqrt(h_n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    MonicDual,
    Normalized,
}

/// Biorthonormal families in a chosen frame, with `p_n = p̃_n/a_n`,
/// `q_n = q̃_n/b_n` and `a_n b_n = h_n`.
#[derive(Clone, Debug)]
pub struct Framed<T> {
    pub frame: Frame,
    pub p: Vec<Polynomial<T>>,
    pub q: Vec<Polynomial<T>>,
    pub a: Vec<T>,
    pub b: Vec<T>,
    pub pi: Vec<T>,
    pub eta: Vec<T>,
    /// Frame-scaled atom values of `p_n` and `q_n`, when available.
    pub atom_values: Option<(Vec<Vec<T>>, Vec<Vec<T>>)>,
}

impl<T: Scalar> Framed<T> {
    pub fn new(family: &PolynomialFamily<T>, averages: &Averages<T>, frame: Frame) -> Result<Self> {
        let n = family.len();
        let (a, b): (Vec<T>, Vec<T>) = match frame {
            Frame::MonicDual => (vec![T::one(); n], family.norms().to_vec()),
            Frame::Normalized => {
                let mut r = Vec::with_capacity(n);
                for (k, h) in family.norms().iter().enumerate() {
                    r.push(h.sqrt_exact().ok_or(Error::IrrationalNormalization { index: k })?);
                }
                (r.clone(), r)
            }
        };
        let p = (0..n).map(|k| family.p(k).scale(&(T::one() / a[k].clone()))).collect();
        let q = (0..n).map(|k| family.q(k).scale(&(T::one() / b[k].clone()))).collect();
        let pi = (0..n).map(|k| averages.pi[k].clone() / a[k].clone()).collect();
        let eta = (0..n).map(|k| averages.eta[k].clone() / b[k].clone()).collect();
        let atom_values = family.atom_values().map(|(pv, qv)| {
            let scale = |vs: &[Vec<T>], c: &[T]| -> Vec<Vec<T>> {
                vs.iter().zip(c).map(|(v, ck)| v.iter().map(|t| t.clone() / ck.clone()).collect()).collect()
            };
            (scale(pv, &a), scale(qv, &b))
        });
        Ok(Framed { frame, p, q, a, b, pi, eta, atom_values })
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// Band support `[lo, hi]` of diagonals `j - i`; `None` is unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Band {
    pub lo: Option<i64>,
    pub hi: Option<i64>,
}

impl Band {
    pub const fn new(lo: Option<i64>, hi: Option<i64>) -> Self {
        Band { lo, hi }
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        let d = j as i64 - i as i64;
        self.lo.map_or(true, |lo| d >= lo) && self.hi.map_or(true, |hi| d <= hi)
    }
}

/// Finite truncation of a semi-infinite matrix. Entries with row below
/// `valid_rows` and column below `valid_cols` agree with the semi-infinite
/// operator; the rest are truncation artefacts.
#[derive(Clone, Debug)]
pub struct BandOperator<T> {
    pub name: &'static str,
    pub matrix: Matrix<T>,
    pub band: Band,
    pub valid_rows: usize,
    pub valid_cols: usize,
    pub frame: Frame,
    /// Entrywise `|M₁||M₂|` for a product `M₁M₂`; the scale against which
    /// a vanishing entry is judged in floating point.
    pub magnitude: Option<Matrix<f64>>,
}

impl<T: Scalar> BandOperator<T> {
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.matrix[(i, j)]
    }

    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    fn scale(&self) -> f64 {
        self.matrix.iter().fold(0.0f64, |m, (_, _, v)| m.max(v.to_f64().abs()))
    }

    /// Entries outside the declared band inside the valid window.
    pub fn band_violations(&self) -> Vec<(usize, usize, T)> {
        let s = self.scale();
        self.matrix
            .iter()
            .filter(|(i, j, v)| {
                let scale = self.magnitude.as_ref().map_or(s, |m| m[(*i, *j)].max(s));
                *i < self.valid_rows && *j < self.valid_cols && !self.band.contains(*i, *j) && !v.negligible(scale)
            })
            .map(|(i, j, v)| (i, j, v.clone()))
            .collect()
    }

    /// Leading `n×n` block.
    pub fn truncation(&self, n: usize) -> Matrix<T> {
        self.matrix.leading(n)
    }
}

fn check_order<T: Scalar>(bimoments: &BimomentMatrix<T>, needed: usize) -> Result<()> {
    if bimoments.order() < needed {
        Err(Error::OrderUnderflow { needed, available: bimoments.order() })
    } else {
        Ok(())
    }
}

/// `X_ij = ⟨x p_i|q_j⟩` and `Y_ij = ⟨p_j|y q_i⟩`; needs bimoments of order `N+1`.
pub fn build_xy<T: Scalar>(
    framed: &Framed<T>,
    bimoments: &BimomentMatrix<T>,
) -> Result<(BandOperator<T>, BandOperator<T>)> {
    let n = framed.len();
    check_order(bimoments, n + 1)?;
    let xp: Vec<_> = framed.p.iter().map(Polynomial::shift_up).collect();
    let yq: Vec<_> = framed.q.iter().map(Polynomial::shift_up).collect();
    let x = Matrix::from_fn(n, n, |i, j| pairing(bimoments, &xp[i], &framed.q[j]));
    let y = Matrix::from_fn(n, n, |i, j| pairing(bimoments, &framed.p[j], &yq[i]));
    let hess = Band::new(None, Some(1));
    Ok((
        BandOperator { name: "X", matrix: x, band: hess, valid_rows: n, valid_cols: n, frame: framed.frame, magnitude: None },
        BandOperator { name: "Y", matrix: y, band: hess, valid_rows: n, valid_cols: n, frame: framed.frame, magnitude: None },
    ))
}

/// `X` and `Y` by direct summation over atom pairs.
pub fn build_xy_from_atoms<T: Scalar>(
    framed: &Framed<T>,
    alpha: &DiscreteMeasure<T>,
    beta: &DiscreteMeasure<T>,
) -> (BandOperator<T>, BandOperator<T>) {
    let n = framed.len();
    let values = |polys: &[Polynomial<T>], m: &DiscreteMeasure<T>| -> Vec<Vec<T>> {
        polys.iter().map(|p| m.signed_atoms().map(|(x, _)| p.eval(&x)).collect()).collect()
    };
    let (pv, qv) = match &framed.atom_values {
        Some((pv, qv)) => (pv.clone(), qv.clone()),
        None => (values(&framed.p, alpha), values(&framed.q, beta)),
    };
    let xs: Vec<(T, T)> = alpha.signed_atoms().map(|(x, w)| (x, w.clone())).collect();
    let ys: Vec<(T, T)> = beta.signed_atoms().map(|(y, w)| (y, w.clone())).collect();
    let kernel = |a: usize, b: usize| xs[a].1.clone() * ys[b].1.clone() / (xs[a].0.clone() + ys[b].0.clone());
    let form = |f: &dyn Fn(usize, usize) -> T| {
        let mut acc = T::zero();
        for a in 0..xs.len() {
            for b in 0..ys.len() {
                acc = acc + kernel(a, b) * f(a, b);
            }
        }
        acc
    };
    let x = Matrix::from_fn(n, n, |i, j| form(&|a, b| xs[a].0.clone() * pv[i][a].clone() * qv[j][b].clone()));
    let y = Matrix::from_fn(n, n, |i, j| form(&|a, b| ys[b].0.clone() * pv[j][a].clone() * qv[i][b].clone()));
    let hess = Band::new(None, Some(1));
    (
        BandOperator { name: "X", matrix: x, band: hess, valid_rows: n, valid_cols: n, frame: framed.frame, magnitude: None },
        BandOperator { name: "Y", matrix: y, band: hess, valid_rows: n, valid_cols: n, frame: framed.frame, magnitude: None },
    )
}

/// `X_ij + Y_ji − π_i η_j`.
pub fn rank_one_xy_residual<T: Scalar>(x: &BandOperator<T>, y: &BandOperator<T>, pi: &[T], eta: &[T]) -> Matrix<T> {
    let n = x.size();
    Matrix::from_fn(n, n, |i, j| {
        x.get(i, j).clone() + y.get(j, i).clone() - pi[i].clone() * eta[j].clone()
    })
}

/// `L = (Λ − Id) D_π⁻¹` and `L̂ = D_η⁻¹ (Λᵀ − Id)`:
/// `L_nn = −1/π_n`, `L_{n,n+1} = 1/π_{n+1}`, `L̂_nn = −1/η_n`, `L̂_{n+1,n} = 1/η_{n+1}`.
pub fn build_l_lhat<T: Scalar>(pi: &[T], eta: &[T], frame: Frame) -> (BandOperator<T>, BandOperator<T>) {
    let n = pi.len();
    let l = Matrix::from_fn(n, n, |i, j| {
        if j == i {
            -(T::one() / pi[i].clone())
        } else if j == i + 1 {
            T::one() / pi[j].clone()
        } else {
            T::zero()
        }
    });
    let lhat = Matrix::from_fn(n, n, |i, j| {
        if j == i {
            -(T::one() / eta[i].clone())
        } else if i == j + 1 {
            T::one() / eta[i].clone()
        } else {
            T::zero()
        }
    });
    (
        BandOperator {
            name: "L",
            matrix: l,
            band: Band::new(Some(0), Some(1)),
            valid_rows: n.saturating_sub(1),
            valid_cols: n,
            frame,
            magnitude: None,
        },
        BandOperator {
            name: "L̂",
            matrix: lhat,
            band: Band::new(Some(-1), Some(0)),
            valid_rows: n,
            valid_cols: n.saturating_sub(1),
            frame,
            magnitude: None,
        },
    )
}

#[derive(Clone, Debug)]
pub struct Factors<T> {
    /// `L X`.
    pub a: BandOperator<T>,
    /// `X L̂`.
    pub ahat: BandOperator<T>,
    /// `Y Lᵀ`.
    pub b: BandOperator<T>,
    /// `L̂ᵀ Y`.
    pub bhat: BandOperator<T>,
}

pub fn build_a_ahat<T: Scalar>(
    x: &BandOperator<T>,
    y: &BandOperator<T>,
    l: &BandOperator<T>,
    lhat: &BandOperator<T>,
) -> Factors<T> {
    let n = x.size();
    let v = n.saturating_sub(1);
    let frame = x.frame;
    let abs = |m: &Matrix<T>| m.map(|v| v.to_f64().abs());
    let op = |name, left: &Matrix<T>, right: &Matrix<T>, band, valid_rows, valid_cols| BandOperator {
        name,
        matrix: left.matmul(right),
        band,
        valid_rows,
        valid_cols,
        frame,
        magnitude: (!T::EXACT).then(|| abs(left).matmul(&abs(right))),
    };
    let (lt, lhat_t) = (l.matrix.transpose(), lhat.matrix.transpose());
    Factors {
        a: op("A", &l.matrix, &x.matrix, Band::new(Some(-1), Some(2)), v, n),
        ahat: op("Â", &x.matrix, &lhat.matrix, Band::new(Some(-2), Some(1)), n, v),
        b: op("B", &y.matrix, &lt, Band::new(Some(-2), Some(1)), n, v),
        bhat: op("B̂", &lhat_t, &y.matrix, Band::new(Some(-1), Some(2)), v, n),
    }
}

/// `M + Nᵀ` on the common valid window of `M` and `Nᵀ`.
pub fn antisymmetry_residual<T: Scalar>(m: &BandOperator<T>, n: &BandOperator<T>) -> Matrix<T> {
    let r = m.valid_rows.min(n.valid_cols);
    let c = m.valid_cols.min(n.valid_rows);
    Matrix::from_fn(r, c, |i, j| m.get(i, j).clone() + n.get(j, i).clone())
}

/// Residuals of
/// `x(p_n/π_n − p_{n−1}/π_{n−1}) = Σ_{k=n−2}^{n+1} A_{n−1,k} p_k` and
/// `y(q_n/η_n − q_{n−1}/η_{n−1}) = Σ_{k=n−2}^{n+1} B̂_{n−1,k} q_k`.
pub fn four_term_residual<T, F>(
    framed: &Framed<T>,
    a: &BandOperator<T>,
    bhat: &BandOperator<T>,
    n: usize,
    point: &F,
) -> Result<(F, F)>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    if n == 0 || n + 2 > framed.len() {
        return Err(Error::OrderUnderflow { needed: n + 2, available: framed.len() });
    }
    let side = |polys: &[Polynomial<T>], avg: &[T], op: &BandOperator<T>| {
        let v = |k: usize| polys[k].eval(point);
        let lf = |t: T| -> F { Lift::<F>::lift(&t) };
        let lhs = point.clone()
            * (v(n) * lf(T::one() / avg[n].clone()) - v(n - 1) * lf(T::one() / avg[n - 1].clone()));
        let mut rhs = F::zero();
        for k in n.saturating_sub(2)..=n + 1 {
            rhs = rhs + lf(op.get(n - 1, k).clone()) * v(k);
        }
        lhs - rhs
    };
    Ok((side(&framed.p, &framed.pi, a), side(&framed.q, &framed.eta, bhat)))
}

/// `p̂ = L̂⁻¹ p` and `q̂ᵀ = qᵀ L̂`.
#[derive(Clone, Debug)]
pub struct HattedFamily<T> {
    /// `p̂_n = −Σ_{k≤n} η_k p_k`, degree `n`, for `n < N`.
    pub p_hat: Vec<Polynomial<T>>,
    /// `q̂_n = q_{n+1}/η_{n+1} − q_n/η_n`, degree `n+1`, for `n < N−1`.
    pub q_hat: Vec<Polynomial<T>>,
}

pub fn build_hatted<T: Scalar>(framed: &Framed<T>, lhat: &BandOperator<T>) -> HattedFamily<T> {
    let n = framed.len();
    let mut p_hat: Vec<Polynomial<T>> = Vec::with_capacity(n);
    // forward substitution in L̂ p̂ = p
    for k in 0..n {
        let mut rhs = framed.p[k].clone();
        if k > 0 {
            rhs = rhs.sub(&p_hat[k - 1].scale(lhat.get(k, k - 1)));
        }
        p_hat.push(rhs.scale(&(T::one() / lhat.get(k, k).clone())));
    }
    let q_hat = (0..n.saturating_sub(1))
        .map(|k| {
            framed.q[k].scale(lhat.get(k, k)).add(&framed.q[k + 1].scale(lhat.get(k + 1, k)))
        })
        .collect();
    HattedFamily { p_hat, q_hat }
}

/// Residuals of the characterizing properties of the hatted families.
#[derive(Clone, Debug)]
pub struct HattedReport<T> {
    /// `∫ q̂_n dβ` for each `n`.
    pub q_hat_integrals: Vec<T>,
    /// `⟨p̂_i|q̂_j⟩ − δ_ij`.
    pub biorthogonality: Matrix<T>,
    /// `⟨p̂_n|1⟩/β₀ + 1`.
    pub mean_offsets: Vec<T>,
    /// Leading coefficient of `q̂_n` minus `1/(η_{n+1} b_{n+1})`.
    pub leading: Vec<T>,
    /// `β₀⟨p̂_n|y^j⟩ − β_j⟨p̂_n|1⟩` for `j ≤ n`.
    pub moment_proportionality: Vec<T>,
    pub degrees_ok: bool,
}

pub fn check_hatted<T: Scalar>(
    hatted: &HattedFamily<T>,
    framed: &Framed<T>,
    bimoments: &BimomentMatrix<T>,
    beta: &DiscreteMeasure<T>,
) -> HattedReport<T> {
    let m = hatted.q_hat.len();
    let bm = beta.moments(m + 2);
    let integral = |p: &Polynomial<T>| {
        p.coeffs().iter().zip(&bm).fold(T::zero(), |acc, (c, v)| acc + c.clone() * v.clone())
    };
    let q_hat_integrals = hatted.q_hat.iter().map(integral).collect();
    let biorthogonality = Matrix::from_fn(m, m, |i, j| {
        let v = pairing(bimoments, &hatted.p_hat[i], &hatted.q_hat[j]);
        if i == j {
            v - T::one()
        } else {
            v
        }
    });
    let one = Polynomial::constant(T::one());
    let mean_offsets = hatted
        .p_hat
        .iter()
        .map(|p| pairing(bimoments, p, &one) / bm[0].clone() + T::one())
        .collect();
    let leading = (0..m)
        .map(|n| {
            hatted.q_hat[n].leading()
                - T::one() / (framed.eta[n + 1].clone() * framed.b[n + 1].clone())
        })
        .collect();
    let mut moment_proportionality = Vec::new();
    for (n, p) in hatted.p_hat.iter().enumerate() {
        let base = pairing(bimoments, p, &one);
        for j in 0..=n.min(bimoments.order() - 1).min(bm.len() - 1) {
            let yj = Polynomial::monomial(j);
            moment_proportionality.push(bm[0].clone() * pairing(bimoments, p, &yj) - bm[j].clone() * base.clone());
        }
    }
    let degrees_ok = hatted.p_hat.iter().enumerate().all(|(n, p)| p.degree() == n)
        && hatted.q_hat.iter().enumerate().all(|(n, q)| q.degree() == n + 1);
    HattedReport { q_hat_integrals, biorthogonality, mean_offsets, leading, moment_proportionality, degrees_ok }
}

/// Frame-independent `q̂_n` and `p̂_n` from bordered determinants of
/// bimoments and β-moments.
pub fn hatted_determinantal_oracle<T: Scalar>(
    bimoments: &BimomentMatrix<T>,
    beta_moments: &[T],
    n: usize,
) -> Result<(Polynomial<T>, Polynomial<T>)> {
    check_order(bimoments, n + 2)?;
    if beta_moments.len() < n + 2 {
        return Err(Error::OrderUnderflow { needed: n + 2, available: beta_moments.len() });
    }
    let i = bimoments.entries();
    // E_k = det[I_{0..k-1, 0..k}; β_0..β_k] = η̃_k D_k
    let e = |k: usize| {
        T::determinant(&Matrix::from_fn(k + 1, k + 1, |r, c| {
            if r < k {
                i[(r, c)].clone()
            } else {
                beta_moments[c].clone()
            }
        }))
    };
    let (en, en1, dn1) = (e(n), e(n + 1), bimoments.minor(n + 1));
    if en.is_zero() || en1.is_zero() || dn1.is_zero() {
        return Err(Error::Degenerate { order: n + 1 });
    }
    let unit = |k: usize, c: usize| if k == c { T::one() } else { T::zero() };
    let q_hat = (0..=n + 1)
        .map(|k| {
            let m = Matrix::from_fn(n + 2, n + 2, |r, c| {
                if r < n {
                    i[(r, c)].clone()
                } else if r == n {
                    beta_moments[c].clone()
                } else {
                    unit(k, c)
                }
            });
            T::determinant(&m) * dn1.clone() / (en.clone() * en1.clone())
        })
        .collect();
    let p_hat = (0..=n)
        .map(|k| {
            let m = Matrix::from_fn(n + 2, n + 2, |r, c| match (r <= n, c <= n) {
                (true, true) => i[(r, c)].clone(),
                (true, false) => unit(k, r),
                (false, true) => beta_moments[c].clone(),
                (false, false) => T::zero(),
            });
            T::determinant(&m) / dn1.clone()
        })
        .collect();
    Ok((Polynomial::new(q_hat), Polynomial::new(p_hat)))
}

#[derive(Clone, Debug)]
pub struct TnCertificate<T> {
    pub size: usize,
    pub kmax: usize,
    pub minors_checked: usize,
    /// First negative minor as (rows, cols, value).
    pub negative_minor: Option<(Vec<usize>, Vec<usize>, T)>,
    pub determinant: T,
    pub off_diagonals_positive: bool,
}

impl<T: Scalar> TnCertificate<T> {
    pub fn totally_nonnegative(&self) -> bool {
        self.negative_minor.is_none()
    }

    pub fn invertible(&self) -> bool {
        !self.determinant.is_zero()
    }

    /// Gantmacher–Krein: TN, invertible, positive first sub/super-diagonals.
    pub fn oscillatory(&self) -> bool {
        self.totally_nonnegative() && self.invertible() && self.off_diagonals_positive
    }
}

/// All minors of size up to `kmax` of the leading `size×size` block.
pub fn tn_oscillatory_certificate<T: Scalar>(op: &BandOperator<T>, size: usize, kmax: usize) -> TnCertificate<T> {
    let m = op.truncation(size);
    let kmax = kmax.min(size);
    let scale = m.iter().fold(0.0f64, |s, (_, _, v)| s.max(v.to_f64().abs()));
    let sets: Vec<(Vec<usize>, Vec<usize>)> = (1..=kmax)
        .flat_map(|k| {
            (0..size)
                .combinations(k)
                .cartesian_product((0..size).combinations(k).collect::<Vec<_>>())
                .collect::<Vec<_>>()
        })
        .collect();
    let values: Vec<T> = sets.par_iter().map(|(r, c)| T::determinant(&m.select(r, c))).collect();
    let negative_minor = sets
        .iter()
        .zip(values)
        .find(|((r, _), v)| v.is_negative() && !v.negligible(scale.powi(r.len() as i32)))
        .map(|((r, c), v)| (r.clone(), c.clone(), v));
    let off_diagonals_positive = (0..size.saturating_sub(1))
        .all(|i| m[(i, i + 1)].is_positive() && m[(i + 1, i)].is_positive());
    TnCertificate {
        size,
        kmax,
        minors_checked: sets.len(),
        negative_minor,
        determinant: T::determinant(&m),
        off_diagonals_positive,
    }
}
