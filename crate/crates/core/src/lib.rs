//! Cauchy biorthogonal polynomials for a pair of positive measures on the
//! half-line: bimoments and their total positivity, biorthogonal families,
//! multiplication operators and four-term recurrences, zeros,
//! Christoffel–Darboux identities, Hermite–Padé approximants of the
//! associated Nikishin systems, and the 3×3 Riemann–Hilbert matrices.
//!
//! Discrete measures with rational data run through exact `BigRational`
//! arithmetic, so every identity is checked as an exact equality; density
//! measures are discretized and run in `f64`.

pub mod bimoment;
pub mod bop;
pub mod bundle;
pub mod cdkernel;
pub mod error;
pub mod linalg;
pub mod measure;
pub mod nikishin;
pub mod poly;
pub mod quadrature;
pub mod recurrence;
pub mod rhp;
pub mod scalar;
pub mod series;
pub mod verify;
pub mod zeros;

pub use bundle::Bundle;
pub use error::{Error, Result};
pub use recurrence::Frame;
pub use scalar::Rational;
