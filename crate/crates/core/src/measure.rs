//! Positive measures on the half-line, their reflections and power moments.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_on;
use crate::scalar::{parse_rational, Rational, Scalar};

/// Default bound on the bit size of exact values.
pub const DEFAULT_BIT_LIMIT: u64 = 1 << 22;

#[derive(Clone, Debug, PartialEq)]
pub struct Atom<T> {
    pub position: T,
    pub weight: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// Support in the positive half-line.
    Positive,
    /// Support reflected through the origin.
    Reflected,
}

impl Orientation {
    pub fn flip(self) -> Self {
        match self {
            Orientation::Positive => Orientation::Reflected,
            Orientation::Reflected => Orientation::Positive,
        }
    }

    pub fn sign(self) -> i64 {
        match self {
            Orientation::Positive => 1,
            Orientation::Reflected => -1,
        }
    }
}

/// Finite sum of point masses. Positions are stored unsigned; the
/// orientation flag says whether the support is reflected.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure<T> {
    atoms: Vec<Atom<T>>,
    orientation: Orientation,
}

impl<T: Scalar> DiscreteMeasure<T> {
    /// Atoms are sorted by position. Weights and positions must be positive
    /// and positions pairwise distinct.
    pub fn new(mut atoms: Vec<Atom<T>>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        for a in &atoms {
            if !a.weight.is_positive() {
                return Err(Error::InvalidMeasure(format!("weight {} is not positive", a.weight)));
            }
            if !a.position.is_positive() {
                return Err(Error::InvalidMeasure(format!(
                    "position {} is not strictly positive",
                    a.position
                )));
            }
        }
        atoms.sort_by(|a, b| a.position.partial_cmp(&b.position).expect("positions are ordered"));
        if let Some(w) = atoms.windows(2).find(|w| w[0].position == w[1].position) {
            return Err(Error::InvalidMeasure(format!("repeated position {}", w[0].position)));
        }
        Ok(DiscreteMeasure { atoms, orientation: Orientation::Positive })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (T, T)>) -> Result<Self> {
        Self::new(pairs.into_iter().map(|(position, weight)| Atom { position, weight }).collect())
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn reflect(&self) -> Self {
        DiscreteMeasure { atoms: self.atoms.clone(), orientation: self.orientation.flip() }
    }

    /// Positions with the orientation applied, paired with weights.
    pub fn signed_atoms(&self) -> impl Iterator<Item = (T, &T)> + '_ {
        let flip = self.orientation == Orientation::Reflected;
        self.atoms
            .iter()
            .map(move |a| (if flip { -a.position.clone() } else { a.position.clone() }, &a.weight))
    }

    /// `integral t^j dm(t)` over the (possibly reflected) support.
    pub fn moment(&self, j: usize) -> T {
        self.signed_atoms()
            .fold(T::zero(), |acc, (x, w)| acc + num_traits::pow(x, j) * w.clone())
    }

    /// Moment with a bound on the bit size of the exact result.
    pub fn moment_bounded(&self, j: usize, max_bits: u64) -> Result<T> {
        let m = self.moment(j);
        check_bits(&m, max_bits)?;
        Ok(m)
    }

    pub fn moments(&self, count: usize) -> Vec<T> {
        (0..count).map(|j| self.moment(j)).collect()
    }

    pub fn total_mass(&self) -> T {
        self.atoms.iter().fold(T::zero(), |acc, a| acc + a.weight.clone())
    }

    /// Smallest and largest unsigned position.
    pub fn hull(&self) -> (T, T) {
        (self.atoms[0].position.clone(), self.atoms[self.atoms.len() - 1].position.clone())
    }

    pub fn to_f64(&self) -> DiscreteMeasure<f64> {
        DiscreteMeasure {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom { position: a.position.to_f64(), weight: a.weight.to_f64() })
                .collect(),
            orientation: self.orientation,
        }
    }
}

impl DiscreteMeasure<Rational> {
    /// Builds a measure from decimal (or p/q) strings, parsed exactly.
    pub fn from_decimal(pairs: &[(&str, &str)]) -> Result<Self> {
        let mut atoms = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            atoms.push(Atom { position: parse_rational(x)?, weight: parse_rational(w)? });
        }
        Self::new(atoms)
    }
}

pub fn check_bits<T: Scalar>(v: &T, max_bits: u64) -> Result<()> {
    let bits = v.bit_size();
    if bits > max_bits {
        Err(Error::PrecisionExhausted { bits, limit: max_bits })
    } else {
        Ok(())
    }
}

/// Polynomial potential `U(x) = sum c_k x^k` with scale `hbar`; the
/// density is `exp(-U(x)/hbar)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    pub coeffs: Vec<f64>,
    pub hbar: f64,
}

impl Potential {
    pub fn value(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn value_complex(&self, x: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type ComplexFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

#[derive(Clone)]
pub enum Density {
    Potential(Potential),
    /// Arbitrary positive function; the optional complex extension is needed
    /// only for boundary-value (jump) checks.
    Custom { real: RealFn, complex: Option<ComplexFn> },
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Potential(p) => f.debug_tuple("Potential").field(p).finish(),
            Density::Custom { complex, .. } => {
                f.debug_struct("Custom").field("analytic", &complex.is_some()).finish()
            }
        }
    }
}

impl Density {
    pub fn constant(c: f64) -> Self {
        Density::Potential(Potential { coeffs: vec![-c.ln()], hbar: 1.0 })
    }

    pub fn at(&self, x: f64) -> f64 {
        match self {
            Density::Potential(p) => (-p.value(x) / p.hbar).exp(),
            Density::Custom { real, .. } => real(x),
        }
    }

    /// Analytic continuation, when available.
    pub fn at_complex(&self, x: Complex64) -> Option<Complex64> {
        match self {
            Density::Potential(p) => Some((-p.value_complex(x) / p.hbar).exp()),
            Density::Custom { complex, .. } => complex.as_ref().map(|f| f(x)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureRule {
    GaussLegendre,
}

#[derive(Clone, Debug)]
pub struct DensityMeasure {
    support: (f64, f64),
    density: Density,
    rule: QuadratureRule,
    nodes: usize,
    orientation: Orientation,
}

impl DensityMeasure {
    pub fn new(support: (f64, f64), density: Density, rule: QuadratureRule, nodes: usize) -> Result<Self> {
        let (a, b) = support;
        if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b) {
            return Err(Error::InvalidMeasure(format!("support [{a}, {b}] must satisfy 0 <= a < b")));
        }
        if nodes == 0 {
            return Err(Error::InvalidMeasure("quadrature needs at least one node".into()));
        }
        Ok(DensityMeasure { support, density, rule, nodes, orientation: Orientation::Positive })
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn reflect(&self) -> Self {
        DensityMeasure { orientation: self.orientation.flip(), ..self.clone() }
    }

    /// Quadrature atoms `(node, weight * density(node))`.
    pub fn discretize(&self) -> Result<DiscreteMeasure<f64>> {
        let (a, b) = self.support;
        let (x, w) = match self.rule {
            QuadratureRule::GaussLegendre => gauss_legendre_on(self.nodes, a, b),
        };
        let mut atoms = Vec::with_capacity(x.len());
        for (t, v) in x.into_iter().zip(w) {
            let d = self.density.at(t);
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidDensity { at: t, value: d });
            }
            atoms.push(Atom { position: t, weight: v * d });
        }
        let mut m = DiscreteMeasure::new(atoms)?;
        m.orientation = self.orientation;
        Ok(m)
    }
}

/// A moment value from either backend.
#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    Exact(Rational),
    Float(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(r) => r.to_f64(),
            Number::Float(v) => *v,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Measure {
    Discrete(DiscreteMeasure<Rational>),
    Density(DensityMeasure),
}

impl Measure {
    pub fn moment(&self, j: usize) -> Result<Number> {
        match self {
            Measure::Discrete(m) => Ok(Number::Exact(m.moment_bounded(j, DEFAULT_BIT_LIMIT)?)),
            Measure::Density(m) => Ok(Number::Float(m.discretize()?.moment(j))),
        }
    }

    pub fn reflect(&self) -> Measure {
        match self {
            Measure::Discrete(m) => Measure::Discrete(m.reflect()),
            Measure::Density(m) => Measure::Density(m.reflect()),
        }
    }

    /// Floating-point atoms for the float pipeline.
    pub fn to_float_atoms(&self) -> Result<DiscreteMeasure<f64>> {
        match self {
            Measure::Discrete(m) => Ok(m.to_f64()),
            Measure::Density(m) => m.discretize(),
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Measure::Discrete(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn two_atoms() -> DiscreteMeasure<Rational> {
        DiscreteMeasure::from_decimal(&[("1", "1"), ("2", "1")]).unwrap()
    }

    #[test]
    fn moments_of_small_measures() {
        let one = DiscreteMeasure::from_decimal(&[("1", "1")]).unwrap();
        assert_eq!(one.moment(7), ratio(1, 1));
        assert_eq!(two_atoms().moment(2), ratio(5, 1));
        assert_eq!(two_atoms().moment(0), ratio(2, 1));
    }

    #[test]
    fn reflection() {
        let one = DiscreteMeasure::from_decimal(&[("1", "1")]).unwrap();
        assert_eq!(one.reflect().moment(1), ratio(-1, 1));
        assert_eq!(one.reflect().reflect(), one);
        let m = DiscreteMeasure::from_decimal(&[("1", "1"), ("3", "2")]).unwrap();
        assert_eq!(m.reflect().moment(2), ratio(19, 1));
    }

    #[test]
    fn rejects_bad_atoms() {
        assert!(DiscreteMeasure::from_decimal(&[("1", "0")]).is_err());
        assert!(DiscreteMeasure::from_decimal(&[("0", "1")]).is_err());
        assert!(DiscreteMeasure::from_decimal(&[("1", "1"), ("1.0", "2")]).is_err());
        assert!(DiscreteMeasure::<Rational>::new(vec![]).is_err());
    }

    #[test]
    fn precision_bound() {
        let m = DiscreteMeasure::from_decimal(&[("12345.6789", "1")]).unwrap();
        assert!(matches!(m.moment_bounded(200, 256), Err(Error::PrecisionExhausted { .. })));
        assert!(m.moment_bounded(2, 256).is_ok());
    }

    #[test]
    fn discretize_constant_density() {
        let d = DensityMeasure::new((0.0, 1.0), Density::constant(1.0), QuadratureRule::GaussLegendre, 2)
            .unwrap()
            .discretize()
            .unwrap();
        let s = 0.5 / 3f64.sqrt();
        assert!((d.atoms()[0].position - (0.5 - s)).abs() < 1e-15);
        assert!((d.atoms()[1].position - (0.5 + s)).abs() < 1e-15);
        assert!((d.atoms()[0].weight - 0.5).abs() < 1e-15);
        for n in 1..10 {
            let m = DensityMeasure::new((0.0, 1.0), Density::constant(1.0), QuadratureRule::GaussLegendre, n)
                .unwrap()
                .discretize()
                .unwrap();
            assert!((m.total_mass() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn discretize_exponential_density() {
        let d = Density::Potential(Potential { coeffs: vec![0.0, 1.0], hbar: 1.0 });
        let m = DensityMeasure::new((0.0, 4.0), d, QuadratureRule::GaussLegendre, 64)
            .unwrap()
            .discretize()
            .unwrap();
        let exact = 1.0 - (-4.0f64).exp();
        assert!(((m.total_mass() - exact) / exact).abs() < 1e-12);
    }

    #[test]
    fn invalid_density_detected() {
        let d = Density::Custom { real: Arc::new(|x| x - 0.5), complex: None };
        let m = DensityMeasure::new((0.0, 1.0), d, QuadratureRule::GaussLegendre, 4).unwrap();
        assert!(matches!(m.discretize(), Err(Error::InvalidDensity { .. })));
    }
}
