//! Symbolic wavefront-set calculus for string-localized propagators, with
//! numerical oracles that cross-check the symbolic claims.

pub mod cone;
pub mod expr;
pub mod linalg;
pub mod numeric;
pub mod poly;
pub mod rules;
pub mod slf;
pub mod scalar;
pub mod space;
pub mod suites;
pub mod wick;

pub use poly::{parse_poly, poly, Monomial, Poly, RatPoly, SlotName, Var};
pub use scalar::{Rational, Scalar};
pub use space::{MetricTag, OpenPred, Space};

pub type FloatPoly = Poly<f64>;
pub type Real = f64;
