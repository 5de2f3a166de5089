//! Measure pair documents.

use cbop::measure::{Density, DensityMeasure, DiscreteMeasure, Measure, Potential, QuadratureRule};
use cbop::scalar::parse_rational;
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub alpha: MeasureDoc,
    pub beta: MeasureDoc,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum MeasureDoc {
    Discrete { atoms: Vec<AtomDoc> },
    Density { support: [f64; 2], potential: PotentialDoc, quadrature: QuadratureDoc },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDoc {
    pub x: Decimal,
    pub w: Decimal,
}

/// Decimal strings are read exactly; bare JSON numbers go through their
/// shortest decimal form.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum Decimal {
    Text(String),
    Number(f64),
}

impl Decimal {
    fn text(&self) -> String {
        match self {
            Decimal::Text(s) => s.clone(),
            Decimal::Number(v) => v.to_string(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialDoc {
    pub coeffs: Vec<f64>,
    pub hbar: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureDoc {
    pub rule: String,
    pub order: usize,
}

impl MeasureSpec {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        serde_json::from_str(text).map_err(|e| Failure::Usage(format!("malformed measure spec: {e}")))
    }

    pub fn measures(&self) -> Result<(Measure, Measure), Failure> {
        Ok((self.alpha.measure("alpha")?, self.beta.measure("beta")?))
    }
}

impl MeasureDoc {
    fn measure(&self, name: &str) -> Result<Measure, Failure> {
        let bad = |m: String| Failure::Usage(format!("{name}: {m}"));
        match self {
            MeasureDoc::Discrete { atoms } => {
                let pairs = atoms
                    .iter()
                    .map(|a| Ok((parse_rational(&a.x.text())?, parse_rational(&a.w.text())?)))
                    .collect::<cbop::Result<Vec<_>>>()
                    .map_err(|e| bad(e.to_string()))?;
                let m = DiscreteMeasure::from_pairs(pairs).map_err(|e| bad(e.to_string()))?;
                Ok(Measure::Discrete(m))
            }
            MeasureDoc::Density { support, potential, quadrature } => {
                if quadrature.rule != "gauss-legendre" {
                    return Err(bad(format!("unsupported quadrature rule '{}'", quadrature.rule)));
                }
                if !(potential.hbar > 0.0 && potential.hbar.is_finite()) {
                    return Err(bad("hbar must be positive".into()));
                }
                let density = Density::Potential(Potential { coeffs: potential.coeffs.clone(), hbar: potential.hbar });
                let m = DensityMeasure::new((support[0], support[1]), density, QuadratureRule::GaussLegendre, quadrature.order)
                    .map_err(|e| bad(e.to_string()))?;
                Ok(Measure::Density(m))
            }
        }
    }
}
