//! JSON schema for cone families and bounds. Polynomials travel as strings;
//! generators are dense lists over the space coordinates.

use serde::{Deserialize, Serialize};

use super::{ConeFamily, Generator, HiddenBall, ParamSign, WavefrontBound};
use crate::poly::RatPoly;
use crate::space::{OpenPred, Space};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyJson {
    pub space: Space,
    pub base_eqs: Vec<RatPoly>,
    pub base_excl: Vec<OpenPred>,
    pub generators: Vec<Vec<RatPoly>>,
    pub param_signs: Vec<ParamSign>,
    pub full_fiber: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hidden: Vec<HiddenBall>,
}

impl FamilyJson {
    pub fn from_family(space: &Space, fam: &ConeFamily) -> Self {
        let coords = space.coords();
        FamilyJson {
            space: space.clone(),
            base_eqs: fam.base_eqs.clone(),
            base_excl: fam.base_excl.clone(),
            generators: fam
                .generators
                .iter()
                .map(|g| coords.iter().map(|v| g.comps.get(v).cloned().unwrap_or_else(RatPoly::zero)).collect())
                .collect(),
            param_signs: fam.generators.iter().map(|g| g.sign).collect(),
            full_fiber: fam.full_fiber,
            hidden: fam.hidden.clone(),
        }
    }

    pub fn to_family(&self) -> Result<ConeFamily, String> {
        let coords = self.space.coords();
        if self.generators.len() != self.param_signs.len() {
            return Err("generators and param_signs differ in length".into());
        }
        let mut gens = Vec::new();
        for (g, s) in self.generators.iter().zip(&self.param_signs) {
            if g.len() != coords.len() {
                return Err(format!("generator has {} components, space has {}", g.len(), coords.len()));
            }
            gens.push(Generator::new(coords.iter().copied().zip(g.iter().cloned()), *s));
        }
        Ok(ConeFamily {
            base_eqs: self.base_eqs.clone(),
            base_excl: self.base_excl.clone(),
            generators: gens,
            full_fiber: self.full_fiber,
            hidden: self.hidden.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundJson {
    pub space: Space,
    pub exact: bool,
    pub families: Vec<FamilyJson>,
}

impl From<&WavefrontBound> for BoundJson {
    fn from(b: &WavefrontBound) -> Self {
        BoundJson {
            space: b.space.clone(),
            exact: b.exact,
            families: b.families.iter().map(|f| FamilyJson::from_family(&b.space, f)).collect(),
        }
    }
}

impl TryFrom<&BoundJson> for WavefrontBound {
    type Error = String;
    fn try_from(j: &BoundJson) -> Result<Self, String> {
        let families = j.families.iter().map(FamilyJson::to_family).collect::<Result<Vec<_>, _>>()?;
        Ok(WavefrontBound { space: j.space.clone(), families, exact: j.exact })
    }
}

impl Serialize for WavefrontBound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        BoundJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for WavefrontBound {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = BoundJson::deserialize(d)?;
        WavefrontBound::try_from(&j).map_err(serde::de::Error::custom)
    }
}

/// `Var → Rational` maps as `{"x0": "1/2", ...}`.
pub mod assignment_strings {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::poly::Var;
    use crate::scalar::Rational;

    pub fn serialize<S: Serializer>(m: &BTreeMap<Var, Rational>, s: S) -> Result<S::Ok, S::Error> {
        let out: BTreeMap<String, String> = m.iter().map(|(k, v)| (k.name(), v.to_string())).collect();
        out.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Var, Rational>, D::Error> {
        let raw = BTreeMap::<String, String>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| {
                let var = Var::parse(&k).ok_or_else(|| serde::de::Error::custom(format!("unknown coordinate `{k}`")))?;
                let val: Rational = v.parse().map_err(|_| serde::de::Error::custom(format!("bad rational `{v}`")))?;
                Ok((var, val))
            })
            .collect()
    }
}
