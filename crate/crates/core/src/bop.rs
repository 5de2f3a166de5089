//! Biorthogonal families `p_n`, `q_n` built from a bimoment matrix.

use crate::bimoment::BimomentMatrix;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::measure::DiscreteMeasure;
use crate::poly::Polynomial;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    P,
    Q,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    Monic,
    Normalized,
}

/// Monic families with `⟨p̃_n|q̃_m⟩ = h_n δ_nm`.
#[derive(Clone, Debug)]
pub struct PolynomialFamily<T> {
    p: Vec<Polynomial<T>>,
    q: Vec<Polynomial<T>>,
    h: Vec<T>,
    /// Values of `p̃_n` at the α-atoms and `q̃_n` at the β-atoms, kept when
    /// the family was built from atoms.
    atom_values: Option<(Vec<Vec<T>>, Vec<Vec<T>>)>,
}

impl<T: Scalar> PolynomialFamily<T> {
    /// Degrees `0..n` by LDU elimination of the leading `n×n` block of `I`:
    /// `I = L·diag(h)·U` gives the coefficient triangles `L⁻¹` and `(U⁻¹)ᵀ`.
    pub fn build(bimoments: &BimomentMatrix<T>, n: usize) -> Result<Self> {
        if n > bimoments.order() {
            return Err(Error::OrderUnderflow { needed: n, available: bimoments.order() });
        }
        bimoments.certify_minors(n)?;
        let mut a = bimoments.entries().leading(n);
        let mut l = Matrix::<T>::identity(n);
        let mut u = Matrix::<T>::identity(n);
        let mut h = Vec::with_capacity(n);
        for k in 0..n {
            let piv = a[(k, k)].clone();
            if piv.is_zero() {
                return Err(Error::Degenerate { order: k + 1 });
            }
            for i in k + 1..n {
                l[(i, k)] = a[(i, k)].clone() / piv.clone();
                u[(k, i)] = a[(k, i)].clone() / piv.clone();
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = a[(i, j)].clone() - l[(i, k)].clone() * a[(k, j)].clone();
                    a[(i, j)] = v;
                }
            }
            h.push(piv);
        }
        let mut p = Vec::with_capacity(n);
        let mut linv = Matrix::<T>::identity(n);
        for i in 0..n {
            for j in 0..i {
                let mut s = T::zero();
                for k in j..i {
                    s = s + l[(i, k)].clone() * linv[(k, j)].clone();
                }
                linv[(i, j)] = -s;
            }
            p.push(Polynomial::new(linv.row(i)[..=i].to_vec()));
        }
        let mut q = Vec::with_capacity(n);
        let mut uinv = Matrix::<T>::identity(n);
        for j in 0..n {
            for i in (0..j).rev() {
                let mut s = T::zero();
                for k in i + 1..=j {
                    s = s + u[(i, k)].clone() * uinv[(k, j)].clone();
                }
                uinv[(i, j)] = -s;
            }
            q.push(Polynomial::new((0..=j).map(|i| uinv[(i, j)].clone()).collect()));
        }
        Ok(PolynomialFamily { p, q, h, atom_values: None })
    }

    /// Degrees `0..n` by biorthogonal Gram–Schmidt on the values at the
    /// atoms, with one reorthogonalization pass. Avoids the conditioning of
    /// the bimoment matrix and is the construction used in floating point.
    pub fn build_from_atoms(alpha: &DiscreteMeasure<T>, beta: &DiscreteMeasure<T>, n: usize) -> Result<Self> {
        let xs: Vec<T> = alpha.signed_atoms().map(|(x, _)| x).collect();
        let ys: Vec<T> = beta.signed_atoms().map(|(y, _)| y).collect();
        let kernel: Vec<Vec<T>> = alpha
            .signed_atoms()
            .map(|(x, wx)| {
                beta.signed_atoms()
                    .map(|(y, wy)| wx.clone() * wy.clone() / (x.clone() + y))
                    .collect()
            })
            .collect();
        let pair = |u: &[T], v: &[T]| {
            let mut acc = T::zero();
            for (a, ua) in u.iter().enumerate() {
                let row = kernel[a].iter().zip(v).fold(T::zero(), |s, (k, vb)| s + k.clone() * vb.clone());
                acc = acc + ua.clone() * row;
            }
            acc
        };
        let abs = |u: &[T]| u.iter().map(|v| v.abs()).collect::<Vec<_>>();
        let mut pv: Vec<Vec<T>> = Vec::with_capacity(n);
        let mut qv: Vec<Vec<T>> = Vec::with_capacity(n);
        let mut p: Vec<Polynomial<T>> = Vec::with_capacity(n);
        let mut q: Vec<Polynomial<T>> = Vec::with_capacity(n);
        let mut h: Vec<T> = Vec::with_capacity(n);
        for k in 0..n {
            let (mut u, mut v, mut pu, mut qv_poly) = if k == 0 {
                (vec![T::one(); xs.len()], vec![T::one(); ys.len()], Polynomial::constant(T::one()), Polynomial::constant(T::one()))
            } else {
                (
                    pv[k - 1].iter().zip(&xs).map(|(a, x)| a.clone() * x.clone()).collect::<Vec<T>>(),
                    qv[k - 1].iter().zip(&ys).map(|(a, y)| a.clone() * y.clone()).collect::<Vec<T>>(),
                    p[k - 1].shift_up(),
                    q[k - 1].shift_up(),
                )
            };
            let size = pair(&abs(&u), &abs(&v));
            for _ in 0..2 {
                for j in 0..k {
                    let c: T = pair(&u, &qv[j]) / h[j].clone();
                    axpy(&mut u, &c, &pv[j]);
                    pu = pu.sub(&p[j].scale(&c));
                    let d: T = pair(&pv[j], &v) / h[j].clone();
                    axpy(&mut v, &d, &qv[j]);
                    qv_poly = qv_poly.sub(&q[j].scale(&d));
                }
            }
            let hk = pair(&u, &v);
            let degenerate = if T::EXACT { !hk.is_positive() } else { !(hk.to_f64() > 64.0 * f64::EPSILON * size.to_f64()) };
            if degenerate {
                return Err(Error::Degenerate { order: k + 1 });
            }
            pv.push(u);
            qv.push(v);
            p.push(pu);
            q.push(qv_poly);
            h.push(hk);
        }
        Ok(PolynomialFamily { p, q, h, atom_values: Some((pv, qv)) })
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn p(&self, n: usize) -> &Polynomial<T> {
        &self.p[n]
    }

    pub fn q(&self, n: usize) -> &Polynomial<T> {
        &self.q[n]
    }

    pub fn monic(&self, side: Side, n: usize) -> &Polynomial<T> {
        match side {
            Side::P => &self.p[n],
            Side::Q => &self.q[n],
        }
    }

    pub fn atom_values(&self) -> Option<&(Vec<Vec<T>>, Vec<Vec<T>>)> {
        self.atom_values.as_ref()
    }

    pub fn norms(&self) -> &[T] {
        &self.h
    }

    pub fn h(&self, n: usize) -> &T {
        &self.h[n]
    }

    /// Averages `π̃_n = ∫p̃_n dα`, `η̃_n = ∫q̃_n dβ` (summed over atoms, which
    /// equals the moment contraction), certified positive.
    pub fn averages(&self, alpha: &DiscreteMeasure<T>, beta: &DiscreteMeasure<T>) -> Result<Averages<T>> {
        let integrate = |poly: &Polynomial<T>, m: &DiscreteMeasure<T>| {
            m.signed_atoms().fold(T::zero(), |acc, (x, w)| acc + w.clone() * poly.eval(&x))
        };
        let pi: Vec<T> = self.p.iter().map(|p| integrate(p, alpha)).collect();
        let eta: Vec<T> = self.q.iter().map(|q| integrate(q, beta)).collect();
        for (name, v) in [("π̃", &pi), ("η̃", &eta)] {
            if let Some((n, x)) = v.iter().enumerate().find(|(_, x)| !x.is_positive()) {
                let msg = format!("average {name}_{n} = {x} is not positive");
                return Err(if T::EXACT { Error::TheoryViolation(msg) } else { Error::Degenerate { order: n + 1 } });
            }
        }
        Ok(Averages { pi, eta })
    }

    /// Horner evaluation in the monic or normalized basis.
    pub fn evaluate(&self, side: Side, n: usize, point: &T, basis: Basis) -> Result<T> {
        if n >= self.len() {
            return Err(Error::OrderUnderflow { needed: n + 1, available: self.len() });
        }
        let v = self.monic(side, n).eval(point);
        match basis {
            Basis::Monic => Ok(v),
            Basis::Normalized => {
                let c = self.h[n].sqrt_exact().ok_or(Error::IrrationalNormalization { index: n })?;
                Ok(v / c)
            }
        }
    }
}

fn axpy<T: Scalar>(u: &mut [T], c: &T, v: &[T]) {
    for (a, b) in u.iter_mut().zip(v) {
        *a = a.clone() - c.clone() * b.clone();
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Averages<T> {
    pub pi: Vec<T>,
    pub eta: Vec<T>,
}

/// Monic `p̃_n`, `q̃_n` from bordered determinants, expanded along the border.
pub fn determinantal_oracle<T: Scalar>(
    bimoments: &BimomentMatrix<T>,
    n: usize,
) -> Result<(Polynomial<T>, Polynomial<T>)> {
    if n + 1 > bimoments.order() {
        return Err(Error::OrderUnderflow { needed: n + 1, available: bimoments.order() });
    }
    let dn = bimoments.minor(n);
    if dn.is_zero() {
        return Err(Error::Degenerate { order: n });
    }
    if n >= 1 && bimoments.minor(n + 1).is_zero() {
        return Err(Error::Degenerate { order: n + 1 });
    }
    let i = bimoments.entries();
    let unit = |k: usize, r: usize| if k == r { T::one() } else { T::zero() };
    let p = (0..=n)
        .map(|k| {
            let m = Matrix::from_fn(n + 1, n + 1, |r, c| if c < n { i[(r, c)].clone() } else { unit(k, r) });
            T::determinant(&m) / dn.clone()
        })
        .collect();
    let q = (0..=n)
        .map(|k| {
            let m = Matrix::from_fn(n + 1, n + 1, |r, c| if r < n { i[(r, c)].clone() } else { unit(k, c) });
            T::determinant(&m) / dn.clone()
        })
        .collect();
    Ok((Polynomial::new(p), Polynomial::new(q)))
}

/// Pairing `⟨a|b⟩` of two polynomials through the bimoment matrix.
pub fn pairing<T: Scalar>(bimoments: &BimomentMatrix<T>, a: &Polynomial<T>, b: &Polynomial<T>) -> T {
    let mut acc = T::zero();
    for (i, ca) in a.coeffs().iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (j, cb) in b.coeffs().iter().enumerate() {
            acc = acc + ca.clone() * cb.clone() * bimoments.get(i, j).clone();
        }
    }
    acc
}
