//! Christoffel–Darboux kernels through the 3×3 commutator block.

use crate::bundle::Bundle;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::poly::Polynomial;
use crate::scalar::{Field, Lift, Scalar};

/// The nonzero part of `𝔸_n(s) = [Π_n, (−s − Yᵀ) L̂]`, where `Π_n` projects
/// on indices `< n`. It sits in rows `n−1..=n+1` and columns `n−2..=n`;
/// each entry is `constant + slope·s`.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorBlock<T> {
    pub n: usize,
    pub constant: [[T; 3]; 3],
    pub slope: [[T; 3]; 3],
}

impl<T: Scalar> CommutatorBlock<T> {
    pub fn row_offset(&self) -> usize {
        self.n - 1
    }

    /// Column of the semi-infinite matrix holding block column 0 (may be −1).
    pub fn col_offset(&self) -> i64 {
        self.n as i64 - 2
    }

    pub fn eval<F: Field>(&self, s: &F) -> [[F; 3]; 3]
    where
        T: Lift<F>,
    {
        std::array::from_fn(|r| {
            std::array::from_fn(|c| Lift::<F>::lift(&self.constant[r][c]) + Lift::<F>::lift(&self.slope[r][c]) * s.clone())
        })
    }

    /// `uᵀ 𝔸_n(s) v` for windows `u = (u_{n−1}, u_n, u_{n+1})` and
    /// `v = (v_{n−2}, v_{n−1}, v_n)`.
    pub fn apply<F: Field>(&self, u: &[F; 3], s: &F, v: &[F; 3]) -> F
    where
        T: Lift<F>,
    {
        let b = self.eval(s);
        let mut acc = F::zero();
        for r in 0..3 {
            for c in 0..3 {
                acc = acc + u[r].clone() * b[r][c].clone() * v[c].clone();
            }
        }
        acc
    }

    pub fn nonzero_entries(&self) -> usize {
        (0..3)
            .flat_map(|r| (0..3).map(move |c| (r, c)))
            .filter(|&(r, c)| !(self.constant[r][c].is_zero() && self.slope[r][c].is_zero()))
            .count()
    }
}

fn check_window<T: Scalar>(bundle: &Bundle<T>, n: usize) -> Result<()> {
    if n == 0 || n + 2 > bundle.order() {
        return Err(Error::OrderUnderflow { needed: n + 2, available: bundle.order() });
    }
    Ok(())
}

pub fn commutator_block<T: Scalar>(bundle: &Bundle<T>, n: usize) -> Result<CommutatorBlock<T>> {
    check_window(bundle, n)?;
    let z = T::zero;
    let mut constant = [[z(), z(), z()], [z(), z(), z()], [z(), z(), z()]];
    let mut slope = constant.clone();
    constant[0][2] = bundle.ahat(n - 1, n).clone();
    if n >= 2 {
        constant[1][0] = -bundle.ahat(n, n - 2).clone();
    }
    constant[1][1] = -bundle.ahat(n, n - 1).clone();
    slope[1][1] = T::one() / bundle.eta(n).clone();
    constant[2][1] = -bundle.ahat(n + 1, n - 1).clone();
    Ok(CommutatorBlock { n, constant, slope })
}

/// `[Π_n, (−s − Yᵀ) L̂]` on the whole truncation, from `Y` and `L̂` directly.
/// Columns `N−1` and beyond are truncation artefacts.
pub fn dense_commutator<T: Scalar>(bundle: &Bundle<T>, n: usize, s: &T) -> Matrix<T> {
    let lhat = &bundle.lhat.matrix;
    let ytl = bundle.y.matrix.transpose().matmul(lhat);
    let size = bundle.order();
    Matrix::from_fn(size, size, |i, j| {
        let m = -(s.clone() * lhat[(i, j)].clone()) - ytl[(i, j)].clone();
        match (i < n, j < n) {
            (true, false) => m,
            (false, true) => -m,
            _ => T::zero(),
        }
    })
}

/// Block embedded at its offsets, as a full matrix, for comparison.
pub fn embedded_block<T: Scalar>(block: &CommutatorBlock<T>, size: usize, s: &T) -> Matrix<T> {
    let b = block.eval(s);
    let mut m = Matrix::zeros(size, size);
    for r in 0..3 {
        for c in 0..3 {
            let (i, j) = (block.row_offset() + r, block.col_offset() + c as i64);
            if i < size && j >= 0 && (j as usize) < size {
                m[(i, j as usize)] = b[r][c].clone();
            } else {
                debug_assert!(b[r][c].is_zero());
            }
        }
    }
    m
}

pub(crate) fn window<T, F>(polys: &[Polynomial<T>], first: i64, at: &F) -> [F; 3]
where
    T: Scalar + Lift<F>,
    F: Field,
{
    std::array::from_fn(|k| {
        let idx = first + k as i64;
        if idx < 0 {
            F::zero()
        } else {
            polys[idx as usize].eval(at)
        }
    })
}

/// `(x+y) Σ_{j<n} q_j(y) p_j(x) − q(y)ᵀ 𝔸_n(−y) p̂(x)`.
pub fn cd_residual_plain<T, F>(bundle: &Bundle<T>, n: usize, x: &F, y: &F) -> Result<F>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    let block = commutator_block(bundle, n)?;
    let f = &bundle.framed;
    let mut lhs = F::zero();
    for j in 0..n {
        lhs = lhs + f.q[j].eval(y) * f.p[j].eval(x);
    }
    lhs = lhs * (x.clone() + y.clone());
    let u = window(&f.q, n as i64 - 1, y);
    let v = window(&bundle.hatted.p_hat, n as i64 - 2, x);
    Ok(lhs - block.apply(&u, &-y.clone(), &v))
}

/// `(x+y) Σ_{j<n} q̂_j(y) p̂_j(x) − q(y)ᵀ 𝔸_n(x) p̂(x)`.
pub fn cd_residual_hat<T, F>(bundle: &Bundle<T>, n: usize, x: &F, y: &F) -> Result<F>
where
    T: Scalar + Lift<F>,
    F: Field,
{
    let block = commutator_block(bundle, n)?;
    let f = &bundle.framed;
    let h = &bundle.hatted;
    let mut lhs = F::zero();
    for j in 0..n {
        lhs = lhs + h.q_hat[j].eval(y) * h.p_hat[j].eval(x);
    }
    lhs = lhs * (x.clone() + y.clone());
    let u = window(&f.q, n as i64 - 1, y);
    let v = window(&h.p_hat, n as i64 - 2, x);
    Ok(lhs - block.apply(&u, x, &v))
}
