//! Bimoment matrices, leading minors and total positivity certificates.

use std::fmt;
use std::sync::{Arc, OnceLock};

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::measure::DiscreteMeasure;
use crate::scalar::Scalar;

type KernelFn<T> = Arc<dyn Fn(&T, &T) -> T + Send + Sync>;

#[derive(Clone)]
pub enum Kernel<T> {
    /// `1/(x+y)`.
    Cauchy,
    Custom(KernelFn<T>),
}

impl<T> fmt::Debug for Kernel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kernel::Cauchy => "Cauchy",
            Kernel::Custom(_) => "Custom",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelTag {
    Cauchy,
    Custom,
}

impl<T: Scalar> Kernel<T> {
    pub fn tag(&self) -> KernelTag {
        match self {
            Kernel::Cauchy => KernelTag::Cauchy,
            Kernel::Custom(_) => KernelTag::Custom,
        }
    }

    pub fn eval(&self, x: &T, y: &T) -> Result<T> {
        match self {
            Kernel::Cauchy => {
                let s = x.clone() + y.clone();
                if s.is_zero() {
                    return Err(Error::KernelSingularity { x: x.to_string(), y: y.to_string() });
                }
                Ok(T::one() / s)
            }
            Kernel::Custom(f) => Ok(f(x, y)),
        }
    }
}

/// The matrix `I_ij = sum x^i y^j K(x,y)` over pairs of atoms.
#[derive(Debug)]
pub struct BimomentMatrix<T> {
    entries: Matrix<T>,
    tag: KernelTag,
    minors: OnceLock<Vec<T>>,
}

impl<T: Clone> Clone for BimomentMatrix<T> {
    fn clone(&self) -> Self {
        BimomentMatrix { entries: self.entries.clone(), tag: self.tag, minors: self.minors.clone() }
    }
}

pub fn compute_bimoments<T: Scalar>(
    alpha: &DiscreteMeasure<T>,
    beta: &DiscreteMeasure<T>,
    kernel: &Kernel<T>,
    order: usize,
) -> Result<BimomentMatrix<T>> {
    let xs: Vec<(T, T)> = alpha.signed_atoms().map(|(x, w)| (x, w.clone())).collect();
    let ys: Vec<(T, T)> = beta.signed_atoms().map(|(y, w)| (y, w.clone())).collect();
    let powers = |v: &T| {
        let mut p = Vec::with_capacity(order);
        let mut acc = T::one();
        for _ in 0..order {
            p.push(acc.clone());
            acc = acc * v.clone();
        }
        p
    };
    let ypow: Vec<Vec<T>> = ys.iter().map(|(y, _)| powers(y)).collect();
    // m[a][j] = sum_b w_a v_b K(x_a, y_b) y_b^j
    let mut m = Vec::with_capacity(xs.len());
    for (x, wx) in &xs {
        let mut row = vec![T::zero(); order];
        for ((y, wy), yp) in ys.iter().zip(&ypow) {
            let k = kernel.eval(x, y)? * wx.clone() * wy.clone();
            for j in 0..order {
                row[j] = row[j].clone() + k.clone() * yp[j].clone();
            }
        }
        m.push(row);
    }
    let xpow: Vec<Vec<T>> = xs.iter().map(|(x, _)| powers(x)).collect();
    let entries = Matrix::from_fn(order, order, |i, j| {
        xpow.iter().zip(&m).fold(T::zero(), |acc, (xp, row)| acc + xp[i].clone() * row[j].clone())
    });
    Ok(BimomentMatrix { entries, tag: kernel.tag(), minors: OnceLock::new() })
}

impl<T: Scalar> BimomentMatrix<T> {
    pub fn from_entries(entries: Matrix<T>, tag: KernelTag) -> Self {
        assert_eq!(entries.rows(), entries.cols(), "bimoment matrix must be square");
        BimomentMatrix { entries, tag, minors: OnceLock::new() }
    }

    pub fn order(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &Matrix<T> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[(i, j)]
    }

    pub fn kernel(&self) -> KernelTag {
        self.tag
    }

    /// `D_1, ..., D_N`.
    pub fn leading_minors(&self) -> &[T] {
        self.minors.get_or_init(|| {
            (1..=self.order()).map(|n| T::determinant(&self.entries.leading(n))).collect()
        })
    }

    /// `D_n` with `D_0 = 1`.
    pub fn minor(&self, n: usize) -> T {
        if n == 0 {
            T::one()
        } else {
            self.leading_minors()[n - 1].clone()
        }
    }

    /// Checks `D_1..D_n > 0`; zero means degenerate data, a negative value
    /// contradicts the positivity of the Cauchy kernel.
    pub fn certify_minors(&self, n: usize) -> Result<()> {
        for (k, d) in self.leading_minors().iter().take(n).enumerate() {
            if d.is_negative() && self.tag == KernelTag::Cauchy && T::EXACT {
                return Err(Error::TheoryViolation(format!("leading minor D_{} = {d} < 0", k + 1)));
            }
            let degenerate = if T::EXACT {
                !d.is_positive()
            } else {
                // pivot D_{k+1}/D_k relative to the diagonal entry it came from
                let pivot = d.to_f64() / self.minor(k).to_f64() / self.get(k, k).to_f64();
                !(pivot > 8.0 * f64::EPSILON)
            };
            if degenerate {
                return Err(Error::Degenerate { order: k + 1 });
            }
        }
        Ok(())
    }

    pub fn check_total_positivity(&self, kmax: usize) -> TpCertificate<T> {
        consecutive_minor_certificate(&self.entries, kmax)
    }

    /// Rows `1..N`: the bimoments of the measure `x dα`.
    pub fn row_shifted(&self) -> Matrix<T> {
        let rows: Vec<usize> = (1..self.order()).collect();
        let cols: Vec<usize> = (0..self.order()).collect();
        self.entries.select(&rows, &cols)
    }
}

/// Location of a consecutive minor: `size` rows starting at `row`, `size`
/// columns starting at `col`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinorIndex {
    pub size: usize,
    pub row: usize,
    pub col: usize,
}

#[derive(Clone, Debug)]
pub struct TpCertificate<T> {
    pub kmax: usize,
    pub checked: usize,
    pub min_minor: Option<(MinorIndex, T)>,
    pub violation: Option<(MinorIndex, T)>,
}

impl<T> TpCertificate<T> {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Evaluates every minor with consecutive rows and columns up to size
/// `kmax` and reports the smallest one and the first non-positive one.
pub fn consecutive_minor_certificate<T: Scalar>(m: &Matrix<T>, kmax: usize) -> TpCertificate<T> {
    let kmax = kmax.min(m.rows()).min(m.cols());
    let index: Vec<MinorIndex> = (1..=kmax)
        .flat_map(|size| {
            (0..=m.rows() - size)
                .cartesian_product(0..=m.cols() - size)
                .map(move |(row, col)| MinorIndex { size, row, col })
        })
        .collect();
    // each minor is judged against the Hadamard bound of its submatrix
    let values: Vec<(T, f64)> = index
        .par_iter()
        .map(|ix| {
            let rows: Vec<usize> = (ix.row..ix.row + ix.size).collect();
            let cols: Vec<usize> = (ix.col..ix.col + ix.size).collect();
            let sub = m.select(&rows, &cols);
            let bound = (0..ix.size)
                .map(|r| sub.row(r).iter().map(|v| v.to_f64().powi(2)).sum::<f64>().sqrt())
                .product::<f64>();
            (T::determinant(&sub), bound)
        })
        .collect();
    let mut min_minor: Option<(MinorIndex, T)> = None;
    let mut violation = None;
    for (ix, (v, bound)) in index.iter().zip(values) {
        // pivoted elimination is accurate to a small multiple of n·ε·bound
        let bad = !v.is_positive() || (!T::EXACT && v.to_f64() <= 16.0 * ix.size as f64 * f64::EPSILON * bound);
        if bad && violation.is_none() {
            violation = Some((*ix, v.clone()));
        }
        if min_minor.as_ref().map_or(true, |(_, m)| v < *m) {
            min_minor = Some((*ix, v));
        }
    }
    TpCertificate { kmax, checked: index.len(), min_minor, violation }
}

/// `ΛI + IΛᵀ − αβᵀ` on the `(N−1)×(N−1)` window.
pub fn rank_one_shift_residual<T: Scalar>(
    i: &BimomentMatrix<T>,
    alpha: &DiscreteMeasure<T>,
    beta: &DiscreteMeasure<T>,
) -> Matrix<T> {
    let n = i.order().saturating_sub(1);
    let a = alpha.moments(n);
    let b = beta.moments(n);
    Matrix::from_fn(n, n, |r, c| {
        i.get(r + 1, c).clone() + i.get(r, c + 1).clone() - a[r].clone() * b[c].clone()
    })
}

fn vandermonde<T: Scalar>(v: &[T]) -> T {
    let mut acc = T::one();
    for j in 0..v.len() {
        for i in 0..j {
            acc = acc * (v[j].clone() - v[i].clone());
        }
    }
    acc
}

/// `D_n` from the symmetrized multiple-sum formula. Because the summand is
/// symmetric, the sum over all n-tuples divided by `(n!)^2` equals the sum
/// over increasing index sets, which is what is computed.
pub fn oracle_dn<T: Scalar>(
    alpha: &DiscreteMeasure<T>,
    beta: &DiscreteMeasure<T>,
    kernel: &Kernel<T>,
    n: usize,
) -> Result<T> {
    if n == 0 {
        return Ok(T::one());
    }
    if n > alpha.len() || n > beta.len() {
        return Ok(T::zero());
    }
    let xs: Vec<(T, T)> = alpha.signed_atoms().map(|(x, w)| (x, w.clone())).collect();
    let ys: Vec<(T, T)> = beta.signed_atoms().map(|(y, w)| (y, w.clone())).collect();
    let mut total = T::zero();
    for xi in (0..xs.len()).combinations(n) {
        let xv: Vec<T> = xi.iter().map(|&k| xs[k].0.clone()).collect();
        let wx = xi.iter().fold(T::one(), |acc, &k| acc * xs[k].1.clone());
        let dx = vandermonde(&xv);
        for yi in (0..ys.len()).combinations(n) {
            let yv: Vec<T> = yi.iter().map(|&k| ys[k].0.clone()).collect();
            let wy = yi.iter().fold(T::one(), |acc, &k| acc * ys[k].1.clone());
            let mut kij = Vec::with_capacity(n);
            for x in &xv {
                let mut row = Vec::with_capacity(n);
                for y in &yv {
                    row.push(kernel.eval(x, y)?);
                }
                kij.push(row);
            }
            let det = T::determinant(&Matrix::from_rows(kij));
            total = total + dx.clone() * vandermonde(&yv) * det * wx.clone() * wy;
        }
    }
    Ok(total)
}

/// The `(n+1)×(n+1)` determinant with rows `1/(x_j + y_i)` and a final row of
/// ones, together with its closed form `Δ(X)Δ(Y)/∏(x_j+y_k)`.
pub fn cauchy_bordered_determinant<T: Scalar>(xs: &[T], ys: &[T]) -> (T, T) {
    assert_eq!(xs.len(), ys.len() + 1, "need n+1 x-values and n y-values");
    let n = ys.len();
    let m = Matrix::from_fn(n + 1, n + 1, |i, j| {
        if i == n {
            T::one()
        } else {
            T::one() / (xs[j].clone() + ys[i].clone())
        }
    });
    let denom = xs
        .iter()
        .cartesian_product(ys)
        .fold(T::one(), |acc, (x, y)| acc * (x.clone() + y.clone()));
    (T::determinant(&m), vandermonde(xs) * vandermonde(ys) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};

    fn pair() -> (DiscreteMeasure<Rational>, DiscreteMeasure<Rational>) {
        (
            DiscreteMeasure::from_decimal(&[("1", "1"), ("2", "1")]).unwrap(),
            DiscreteMeasure::from_decimal(&[("1", "1"), ("3", "1")]).unwrap(),
        )
    }

    #[test]
    fn two_atom_bimoments() {
        let (a, b) = pair();
        let i = compute_bimoments(&a, &b, &Kernel::Cauchy, 2).unwrap();
        assert_eq!(i.get(0, 0), &ratio(77, 60));
        assert_eq!(i.get(1, 0), &ratio(109, 60));
        assert_eq!(i.get(0, 1), &ratio(131, 60));
        assert_eq!(i.get(1, 1), &ratio(187, 60));
        assert_eq!(i.leading_minors(), &[ratio(77, 60), ratio(1, 30)]);
        assert_eq!(i.minor(0), ratio(1, 1));
        assert!(i.check_total_positivity(2).passed());
        assert!(rank_one_shift_residual(&i, &a, &b).iter().all(|(_, _, v)| v == &ratio(0, 1)));
    }

    #[test]
    fn single_atom_is_degenerate() {
        let a = DiscreteMeasure::from_decimal(&[("1", "1")]).unwrap();
        let i = compute_bimoments(&a, &a, &Kernel::Cauchy, 2).unwrap();
        assert!(i.entries().iter().all(|(_, _, v)| v == &ratio(1, 2)));
        assert_eq!(i.leading_minors(), &[ratio(1, 2), ratio(0, 1)]);
        assert_eq!(i.certify_minors(2), Err(Error::Degenerate { order: 2 }));
        let cert = i.check_total_positivity(2);
        assert!(!cert.passed());
        assert_eq!(cert.violation.unwrap().0.size, 2);
    }

    #[test]
    fn oracle_small_cases() {
        let (a, b) = pair();
        assert_eq!(oracle_dn(&a, &b, &Kernel::Cauchy, 2).unwrap(), ratio(1, 30));
        assert_eq!(oracle_dn(&a, &b, &Kernel::Cauchy, 1).unwrap(), ratio(77, 60));
        assert_eq!(oracle_dn(&a, &b, &Kernel::Cauchy, 3).unwrap(), ratio(0, 1));
    }

    #[test]
    fn kernel_singularity() {
        let a = DiscreteMeasure::from_decimal(&[("1", "1")]).unwrap();
        let err = compute_bimoments(&a, &a.reflect(), &Kernel::Cauchy, 2).unwrap_err();
        assert!(matches!(err, Error::KernelSingularity { .. }));
    }

    #[test]
    fn negative_minor_is_theory_violation() {
        let m = Matrix::from_rows(vec![vec![ratio(1, 1), ratio(2, 1)], vec![ratio(2, 1), ratio(1, 1)]]);
        let i = BimomentMatrix::from_entries(m, KernelTag::Cauchy);
        assert!(matches!(i.certify_minors(2), Err(Error::TheoryViolation(_))));
    }

    #[test]
    fn cauchy_determinant_identity() {
        let xs = [ratio(1, 2), ratio(1, 1), ratio(5, 2), ratio(4, 1)];
        let ys = [ratio(1, 3), ratio(2, 1), ratio(7, 2)];
        for n in 1..=3 {
            let (lhs, rhs) = cauchy_bordered_determinant(&xs[..=n], &ys[..n]);
            assert_eq!(lhs, rhs);
            assert!(lhs > ratio(0, 1));
        }
    }
}
