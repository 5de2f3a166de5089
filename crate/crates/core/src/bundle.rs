//! Everything derived from a pair of discrete measures at a fixed order.

use crate::bimoment::{compute_bimoments, BimomentMatrix, Kernel};
use crate::bop::{Averages, PolynomialFamily};
use crate::error::{Error, Result};
use crate::measure::{check_bits, DiscreteMeasure, Orientation, DEFAULT_BIT_LIMIT};
use crate::recurrence::{
    build_a_ahat, build_hatted, build_l_lhat, build_xy, build_xy_from_atoms, BandOperator, Factors, Frame, Framed, HattedFamily,
};
use crate::scalar::Scalar;

/// Families of degrees `0..order` with every operator used by the identity
/// checks. Bimoments are computed to `order + 1` so that `X` and `Y` are
/// exact on the full truncation. Floating-point bundles build the families
/// and `X`, `Y` from the atoms directly.
#[derive(Clone, Debug)]
pub struct Bundle<T> {
    pub alpha: DiscreteMeasure<T>,
    pub beta: DiscreteMeasure<T>,
    pub bimoments: BimomentMatrix<T>,
    pub family: PolynomialFamily<T>,
    pub averages: Averages<T>,
    pub framed: Framed<T>,
    pub x: BandOperator<T>,
    pub y: BandOperator<T>,
    pub l: BandOperator<T>,
    pub lhat: BandOperator<T>,
    pub factors: Factors<T>,
    pub hatted: HattedFamily<T>,
}

impl<T: Scalar> Bundle<T> {
    pub fn new(alpha: DiscreteMeasure<T>, beta: DiscreteMeasure<T>, order: usize, frame: Frame) -> Result<Self> {
        Self::with_bit_limit(alpha, beta, order, frame, DEFAULT_BIT_LIMIT)
    }

    pub fn with_bit_limit(
        alpha: DiscreteMeasure<T>,
        beta: DiscreteMeasure<T>,
        order: usize,
        frame: Frame,
        max_bits: u64,
    ) -> Result<Self> {
        if alpha.orientation() != Orientation::Positive || beta.orientation() != Orientation::Positive {
            return Err(Error::InvalidMeasure("both measures must be supported on the positive half-line".into()));
        }
        if order == 0 {
            return Err(Error::OrderUnderflow { needed: 1, available: 0 });
        }
        let bimoments = compute_bimoments(&alpha, &beta, &Kernel::Cauchy, order + 1)?;
        for (_, _, v) in bimoments.entries().iter() {
            check_bits(v, max_bits)?;
        }
        let family = if T::EXACT {
            PolynomialFamily::build(&bimoments, order)?
        } else {
            // degeneracy is judged on the atom values; the monomial minors
            // lose all accuracy long before the family does
            PolynomialFamily::build_from_atoms(&alpha, &beta, order)?
        };
        let averages = family.averages(&alpha, &beta)?;
        let framed = Framed::new(&family, &averages, frame)?;
        let (x, y) = if T::EXACT { build_xy(&framed, &bimoments)? } else { build_xy_from_atoms(&framed, &alpha, &beta) };
        let (l, lhat) = build_l_lhat(&framed.pi, &framed.eta, frame);
        let factors = build_a_ahat(&x, &y, &l, &lhat);
        let hatted = build_hatted(&framed, &lhat);
        Ok(Bundle { alpha, beta, bimoments, family, averages, framed, x, y, l, lhat, factors, hatted })
    }

    pub fn order(&self) -> usize {
        self.framed.len()
    }

    /// Framed `p_n` at the α-atoms and `q_n` at the β-atoms. Uses the values
    /// kept by the atom construction when present.
    pub fn framed_atom_values(&self) -> (Vec<Vec<T>>, Vec<Vec<T>>) {
        let eval = |polys: &[crate::poly::Polynomial<T>], m: &DiscreteMeasure<T>| -> Vec<Vec<T>> {
            polys.iter().map(|p| m.signed_atoms().map(|(x, _)| p.eval(&x)).collect()).collect()
        };
        let Some((pv, qv)) = self.family.atom_values() else {
            return (eval(&self.framed.p, &self.alpha), eval(&self.framed.q, &self.beta));
        };
        let rescale = |vals: &[Vec<T>], framed: &[crate::poly::Polynomial<T>], side: crate::bop::Side| -> Vec<Vec<T>> {
            framed
                .iter()
                .enumerate()
                .map(|(k, f)| {
                    let c = f.leading() / self.family.monic(side, k).leading();
                    vals[k].iter().map(|v| v.clone() * c.clone()).collect()
                })
                .collect()
        };
        (rescale(pv, &self.framed.p, crate::bop::Side::P), rescale(qv, &self.framed.q, crate::bop::Side::Q))
    }

    pub fn frame(&self) -> Frame {
        self.framed.frame
    }

    pub fn pi(&self, n: usize) -> &T {
        &self.framed.pi[n]
    }

    pub fn eta(&self, n: usize) -> &T {
        &self.framed.eta[n]
    }

    /// `Â_{ij}`.
    pub fn ahat(&self, i: usize, j: usize) -> &T {
        self.factors.ahat.get(i, j)
    }

    pub fn beta0(&self) -> T {
        self.beta.total_mass()
    }
}
