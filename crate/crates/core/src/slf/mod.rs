//! String-localized kernels and propagators, the integrability gates that
//! decide whether they exist at `p = 0`, and the admissible renormalization
//! freedom of their time orderings.

pub mod charts;
pub mod kernel;
pub mod locality;
mod propagator;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{ExprError, TestFnDescriptor};
use crate::scalar::{int, rational_string, Rational};

pub use kernel::Kernel;
pub use propagator::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassClass {
    Massless,
    Massive,
}

impl MassClass {
    pub fn of(m: &Rational) -> Self {
        if num_traits::Zero::is_zero(m) {
            MassClass::Massless
        } else {
            MassClass::Massive
        }
    }
}

/// Local integrability at `p = 0` of `M_× / (p² − m² + i0)` where `M_×` has
/// lowest `p`-power `ω` over `k` factors `u₋` and `k′` factors `u₊`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateReport {
    pub omega: i64,
    pub k: u32,
    pub k_prime: u32,
    pub mass_class: MassClass,
    /// Scaling degree at `p = 0`; integrable iff above `-4`.
    pub value: i64,
    pub pass: bool,
}

impl fmt::Display for GateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cmp = if self.pass { ">" } else { "<=" };
        write!(
            f,
            "{:?} gate with omega={} k={} k'={}: degree {} {} -4",
            self.mass_class, self.omega, self.k, self.k_prime, self.value, cmp
        )
    }
}

pub fn integrability_gate(m: &Rational, omega: i64, k: u32, k_prime: u32) -> GateReport {
    let mass_class = MassClass::of(m);
    // the massive denominator is smooth at p = 0
    let scalar = if mass_class == MassClass::Massless { -2 } else { 0 };
    let value = omega - k as i64 - k_prime as i64 + scalar;
    GateReport { omega, k, k_prime, mass_class, value, pass: value > -4 }
}

/// Which requirement excludes a delta order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaBound {
    /// Scaling of the field strengths caps `|a| ≤ 2s − 2`.
    PowerCounting,
    /// `p^a q₊ q₋` must be integrable at `p = 0`: `|a| > 2s − 4`.
    Integrability,
    /// The massless propagator is homogeneous of degree `-2`, fixing `|a|`.
    Homogeneity,
}

impl fmt::Display for DeltaBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeltaBound::PowerCounting => "power counting",
            DeltaBound::Integrability => "integrability at p = 0",
            DeltaBound::Homogeneity => "homogeneity",
        })
    }
}

/// Whether `∂^a I_{c,+}^s I_{c,−}^s δ` with `|a| = order` may be added to the
/// kinematic propagator.
pub fn check_delta_order(s: u32, m: &Rational, order: u32) -> Result<(), DeltaBound> {
    let (s, a) = (s as i64, order as i64);
    if a > 2 * s - 2 {
        return Err(DeltaBound::PowerCounting);
    }
    // p^a q₊ q₋ has degree |a| − 2s at p = 0
    if a - 2 * s <= -4 {
        return Err(DeltaBound::Integrability);
    }
    if MassClass::of(m) == MassClass::Massless && a != 2 * s - 2 {
        return Err(DeltaBound::Homogeneity);
    }
    Ok(())
}

pub fn admissible_delta_orders(s: u32, m: &Rational) -> BTreeSet<u32> {
    (0..=2 * s).filter(|a| check_delta_order(s, m, *a).is_ok()).collect()
}

/// One shift term `C · ∂^a`: `derivs` lists the components of the multi-index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftTerm {
    pub derivs: Vec<u8>,
    #[serde(with = "rational_string")]
    pub coeff: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeOrdering {
    #[default]
    Kinematic,
    Shifted { terms: Vec<ShiftTerm> },
}

fn default_betas() -> Option<Vec<Rational>> {
    None
}

fn default_f() -> [Rational; 4] {
    kernel::default_contractions().0
}

fn default_fp() -> [Rational; 4] {
    kernel::default_contractions().1
}

fn default_smear() -> TestFnDescriptor {
    TestFnDescriptor::new(vec![int(0), int(0), int(0), int(2)], crate::scalar::rat(1, 2)).expect("default bump is spacelike")
}

mod vec4 {
    use serde::{Deserializer, Serializer};

    use crate::scalar::{rational_string, Rational};

    pub fn serialize<S: Serializer>(v: &[Rational; 4], s: S) -> Result<S::Ok, S::Error> {
        rational_string::vec::serialize(&v.to_vec(), s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[Rational; 4], D::Error> {
        let v: Vec<Rational> = rational_string::vec::deserialize(d)?;
        v.try_into().map_err(|_| serde::de::Error::custom("expected four components"))
    }
}

mod opt_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::scalar::Rational;

    pub fn serialize<S: Serializer>(v: &Option<Vec<Rational>>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(|v| v.iter().map(|q| q.to_string()).collect::<Vec<_>>()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Rational>>, D::Error> {
        let v: Option<Vec<String>> = Option::deserialize(d)?;
        v.map(|v| v.iter().map(|s| s.parse().map_err(serde::de::Error::custom)).collect()).transpose()
    }
}

/// Everything that fixes one propagator of spin `s` potentials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagatorSpec {
    pub spin: u32,
    #[serde(with = "rational_string")]
    pub mass: Rational,
    #[serde(default = "default_smear")]
    pub smear: TestFnDescriptor,
    /// `β_n` for `2n ≤ s`; unset means all ones.
    #[serde(default = "default_betas", with = "opt_vec", skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<Rational>>,
    #[serde(default = "default_f", with = "vec4")]
    pub f: [Rational; 4],
    #[serde(default = "default_fp", with = "vec4")]
    pub f_prime: [Rational; 4],
    #[serde(default)]
    pub time_ordering: TimeOrdering,
}

#[derive(Debug, Error)]
pub enum SlfError {
    #[error("invalid propagator spec: {0}")]
    Invalid(String),
    #[error("infrared obstruction at p = 0: {0}")]
    Infrared(GateReport),
    #[error("delta order {order} is not admissible for spin {spin}: violates {bound}")]
    Inadmissible { spin: u32, order: u32, bound: DeltaBound },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

impl PropagatorSpec {
    pub fn new(spin: u32, mass: Rational) -> Self {
        let (f, f_prime) = kernel::default_contractions();
        PropagatorSpec {
            spin,
            mass,
            smear: default_smear(),
            betas: None,
            f,
            f_prime,
            time_ordering: TimeOrdering::Kinematic,
        }
    }

    pub fn betas(&self) -> Vec<Rational> {
        self.betas.clone().unwrap_or_else(|| vec![int(1); (self.spin / 2 + 1) as usize])
    }

    pub fn validate(&self) -> Result<(), SlfError> {
        if self.spin == 0 {
            return Err(SlfError::Invalid("spin must be at least 1".into()));
        }
        if self.mass < int(0) {
            return Err(SlfError::Invalid("mass must be nonnegative".into()));
        }
        self.smear.validate()?;
        let want = (self.spin / 2 + 1) as usize;
        if let Some(b) = &self.betas {
            if b.len() != want {
                return Err(SlfError::Invalid(format!("spin {} needs {want} coefficients beta_n, got {}", self.spin, b.len())));
            }
        }
        if let TimeOrdering::Shifted { terms } = &self.time_ordering {
            for t in terms {
                if t.derivs.iter().any(|c| *c > 3) {
                    return Err(SlfError::Invalid(format!("derivative component {:?} out of range", t.derivs)));
                }
                let order = t.derivs.len() as u32;
                if let Err(bound) = check_delta_order(self.spin, &self.mass, order) {
                    if !num_traits::Zero::is_zero(&t.coeff) {
                        return Err(SlfError::Inadmissible { spin: self.spin, order, bound });
                    }
                }
            }
        }
        Ok(())
    }

    /// The gate inputs of the kinematic kernel: `ω = 2s`, `k = k′ = s`.
    pub fn gate(&self) -> GateReport {
        let s = self.spin;
        integrability_gate(&self.mass, 2 * s as i64, s, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gates_follow_the_power_count() {
        for s in 1..=6u32 {
            let g = integrability_gate(&int(0), 2 * s as i64, s, s);
            assert!(g.pass && g.value == -2);
        }
        let g = integrability_gate(&int(0), 0, 1, 1);
        assert!(!g.pass && g.value == -4);
        let g = integrability_gate(&int(1), 0, 1, 1);
        assert!(g.pass && g.value == -2);
    }

    #[test]
    fn delta_orders() {
        let set = |s, m: i64| admissible_delta_orders(s, &int(m)).into_iter().collect::<Vec<_>>();
        assert_eq!(set(1, 0), vec![0]);
        assert_eq!(set(1, 1), vec![0]);
        assert_eq!(set(2, 1), vec![1, 2]);
        assert_eq!(set(3, 0), vec![4]);
        assert_eq!(check_delta_order(2, &int(1), 0), Err(DeltaBound::Integrability));
        assert_eq!(check_delta_order(2, &int(0), 1), Err(DeltaBound::Homogeneity));
        assert_eq!(check_delta_order(2, &int(0), 3), Err(DeltaBound::PowerCounting));
    }

    #[test]
    fn spec_json_defaults() {
        let s: PropagatorSpec = serde_json::from_str(r#"{"spin": 2, "mass": "1"}"#).unwrap();
        assert_eq!(s.betas(), vec![int(1), int(1)]);
        assert!(s.validate().is_ok());
        let back: PropagatorSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        let bad: PropagatorSpec = serde_json::from_str(r#"{"spin": 2, "mass": "0", "betas": ["1"]}"#).unwrap();
        assert!(matches!(bad.validate(), Err(SlfError::Invalid(_))));
        let shifted = PropagatorSpec {
            time_ordering: TimeOrdering::Shifted { terms: vec![ShiftTerm { derivs: vec![0], coeff: int(2) }] },
            ..PropagatorSpec::new(2, int(0))
        };
        assert!(matches!(shifted.validate(), Err(SlfError::Inadmissible { bound: DeltaBound::Homogeneity, .. })));
    }
}
