//! Wick contractions of products of interaction monomials and the
//! wavefront classification of the propagator products they produce.
//!
//! Uncontracted factors stay inert: they are listed in the pattern
//! remainder and never enter an expression.

mod classify;
mod enumerate;
mod parse;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{rational_string, Rational};

pub use classify::*;
pub use enumerate::*;
pub use parse::{parse_monomials, ParseError};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Species {
    Scalar {
        #[serde(with = "rational_string")]
        mass: Rational,
    },
    /// String-localized potential of spin `s`.
    Potential {
        spin: u32,
        #[serde(with = "rational_string")]
        mass: Rational,
    },
    /// Point-localized field strength of a spin `s` potential.
    FieldStrength {
        spin: u32,
        #[serde(with = "rational_string")]
        mass: Rational,
    },
}

impl Species {
    pub fn string_localized(&self) -> bool {
        matches!(self, Species::Potential { .. })
    }

    pub fn mass(&self) -> &Rational {
        match self {
            Species::Scalar { mass } | Species::Potential { mass, .. } | Species::FieldStrength { mass, .. } => mass,
        }
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Species::Scalar { mass } => write!(f, "phi({mass})"),
            Species::Potential { spin, mass } => write!(f, "A({spin},{mass})"),
            Species::FieldStrength { spin, mass } => write!(f, "F({spin},{mass})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldFactor {
    pub species: Species,
    /// Lorentz components of the derivatives acting on the field.
    #[serde(default)]
    pub derivs: Vec<u8>,
    /// Present exactly on string-localized factors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub string: Option<String>,
}

impl FieldFactor {
    pub fn scalar(mass: Rational) -> Self {
        FieldFactor { species: Species::Scalar { mass }, derivs: Vec::new(), string: None }
    }

    pub fn potential(spin: u32, mass: Rational, string: &str) -> Self {
        FieldFactor { species: Species::Potential { spin, mass }, derivs: Vec::new(), string: Some(string.into()) }
    }

    pub fn field_strength(spin: u32, mass: Rational) -> Self {
        FieldFactor { species: Species::FieldStrength { spin, mass }, derivs: Vec::new(), string: None }
    }

    pub fn with_derivs(mut self, derivs: &[u8]) -> Self {
        self.derivs = derivs.to_vec();
        self
    }
}

impl fmt::Display for FieldFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.derivs.is_empty() {
            write!(f, "d")?;
            for c in &self.derivs {
                write!(f, "{c}")?;
            }
            write!(f, ".")?;
        }
        write!(f, "{}", self.species)?;
        if let Some(s) = &self.string {
            write!(f, "@{s}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldMonomial {
    pub point: String,
    pub factors: Vec<FieldFactor>,
}

impl FieldMonomial {
    pub fn new(point: &str, factors: Vec<FieldFactor>) -> Self {
        FieldMonomial { point: point.into(), factors }
    }
}

/// One line of the monomial file format.
impl fmt::Display for FieldMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.point)?;
        for factor in &self.factors {
            write!(f, " {factor}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum WickError {
    #[error("string variable {0} is used by more than one potential")]
    SharedString(String),
    #[error("factor {0} of monomial {1} needs its own string variable")]
    MissingString(usize, String),
    #[error("factor {0} of monomial {1} is point-localized but carries a string")]
    StrayString(usize, String),
    #[error("point {0} labels more than one monomial")]
    RepeatedPoint(String),
    #[error("derivative component {0} out of range")]
    BadDerivative(u8),
    #[error("no propagator for {0} with {1}")]
    MissingPropagator(Species, Species),
    #[error("pattern refers to factor {0}, which does not exist")]
    BadIndex(usize),
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Slf(#[from] crate::slf::SlfError),
    #[error(transparent)]
    Expr(#[from] crate::expr::ExprError),
}

/// Each potential has its own string, point labels are distinct and
/// derivatives are Lorentz components.
pub fn validate_product(monomials: &[FieldMonomial]) -> Result<(), WickError> {
    let mut strings = BTreeSet::new();
    let mut points = BTreeSet::new();
    for m in monomials {
        if !points.insert(m.point.as_str()) {
            return Err(WickError::RepeatedPoint(m.point.clone()));
        }
        for (i, f) in m.factors.iter().enumerate() {
            if let Some(&c) = f.derivs.iter().find(|c| **c > 3) {
                return Err(WickError::BadDerivative(c));
            }
            match (&f.string, f.species.string_localized()) {
                (None, true) => return Err(WickError::MissingString(i, m.point.clone())),
                (Some(_), false) => return Err(WickError::StrayString(i, m.point.clone())),
                (Some(s), true) if !strings.insert(s.as_str()) => return Err(WickError::SharedString(s.clone())),
                _ => {}
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    #[test]
    fn strings_must_be_private_to_each_potential() {
        let a = |s: &str| FieldFactor::potential(1, int(0), s);
        let ok = [FieldMonomial::new("x", vec![a("e1")]), FieldMonomial::new("y", vec![a("e2")])];
        assert!(validate_product(&ok).is_ok());
        let shared = [FieldMonomial::new("x", vec![a("e1")]), FieldMonomial::new("y", vec![a("e1")])];
        assert!(matches!(validate_product(&shared), Err(WickError::SharedString(s)) if s == "e1"));
        let mut bare = a("e");
        bare.string = None;
        assert!(matches!(validate_product(&[FieldMonomial::new("x", vec![bare])]), Err(WickError::MissingString(0, _))));
        let mut stray = FieldFactor::scalar(int(0));
        stray.string = Some("e".into());
        assert!(matches!(validate_product(&[FieldMonomial::new("x", vec![stray])]), Err(WickError::StrayString(0, _))));
    }

    #[test]
    fn factors_print_in_the_input_syntax() {
        let f = FieldFactor::potential(1, int(0), "e1").with_derivs(&[0, 1]);
        assert_eq!(f.to_string(), "d01.A(1,0)@e1");
        let back = parse_monomials(&format!("x: {f}")).unwrap();
        assert_eq!(back[0].factors[0], f);
        let m = FieldMonomial::new("y", vec![FieldFactor::scalar(int(1)), FieldFactor::field_strength(2, int(0))]);
        assert_eq!(m.to_string(), "y: phi(1) F(2,0)");
        assert_eq!(parse_monomials(&m.to_string()).unwrap(), vec![m]);
    }
}
