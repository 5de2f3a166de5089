//! Truncated Laurent series at infinity with explicit order tracking.
//!
//! A series stores coefficients of `z^top, z^(top-1), ...`. When `floor` is
//! `Some(f)` only the coefficients of powers `>= f` are known; `None` means
//! the expansion terminates (a Laurent polynomial).

use crate::poly::Polynomial;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Laurent<T> {
    top: i64,
    coeffs: Vec<T>,
    floor: Option<i64>,
}

impl<T: Scalar> Laurent<T> {
    pub fn from_poly(p: &Polynomial<T>) -> Self {
        Laurent {
            top: p.degree() as i64,
            coeffs: p.coeffs().iter().rev().cloned().collect(),
            floor: None,
        }
    }

    pub fn constant(c: T) -> Self {
        Laurent { top: 0, coeffs: vec![c], floor: None }
    }

    /// `sum_j c[j] z^(-j-1)`, known down to `z^(-len)`.
    pub fn from_inverse_powers(c: Vec<T>) -> Self {
        assert!(!c.is_empty(), "empty series");
        let len = c.len() as i64;
        Laurent { top: -1, coeffs: c, floor: Some(-len) }
    }

    pub fn floor(&self) -> Option<i64> {
        self.floor
    }

    pub fn top(&self) -> i64 {
        self.top
    }

    fn lowest_stored(&self) -> i64 {
        self.top - self.coeffs.len() as i64 + 1
    }

    /// Coefficient of `z^k`; `None` when it lies below the known order.
    pub fn coeff(&self, k: i64) -> Option<T> {
        if let Some(f) = self.floor {
            if k < f {
                return None;
            }
        }
        if k > self.top || k < self.lowest_stored() {
            return Some(T::zero());
        }
        Some(self.coeffs[(self.top - k) as usize].clone())
    }

    /// Highest power with a nonzero coefficient among the known ones.
    pub fn leading_power(&self) -> Option<i64> {
        let low = self.floor.unwrap_or_else(|| self.lowest_stored());
        (low..=self.top).rev().find(|&k| self.coeff(k).is_some_and(|c| !c.is_zero()))
    }

    fn build(top: i64, floor: Option<i64>, low: i64, f: impl Fn(i64) -> T) -> Self {
        let low = floor.unwrap_or(low).min(top);
        let coeffs = (low..=top).rev().map(f).collect();
        Laurent { top, coeffs, floor }
    }

    fn merged_floor(a: Option<i64>, b: Option<i64>) -> Option<i64> {
        match (a, b) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, None) => x,
            (None, y) => y,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let top = self.top.max(other.top);
        let floor = Self::merged_floor(self.floor, other.floor);
        let low = self.lowest_stored().min(other.lowest_stored());
        Self::build(top, floor, low, |k| self.coeff(k).unwrap() + other.coeff(k).unwrap())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-T::one()))
    }

    pub fn scale(&self, s: &T) -> Self {
        Laurent {
            top: self.top,
            coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect(),
            floor: self.floor,
        }
    }

    /// Multiply by `z^m`.
    pub fn shift(&self, m: i64) -> Self {
        Laurent { top: self.top + m, coeffs: self.coeffs.clone(), floor: self.floor.map(|f| f + m) }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let top = self.top + other.top;
        let floor = Self::merged_floor(
            self.floor.map(|f| f + other.top),
            other.floor.map(|f| f + self.top),
        );
        let low = self.lowest_stored() + other.lowest_stored();
        let (a_low, b_low) = (self.lowest_stored(), other.lowest_stored());
        Self::build(top, floor, low, |k| {
            let mut acc = T::zero();
            for i in a_low.max(k - other.top)..=self.top.min(k - b_low) {
                let (Some(a), Some(b)) = (self.coeff(i), other.coeff(k - i)) else {
                    continue;
                };
                acc = acc + a * b;
            }
            acc
        })
    }
}
