//! Base spaces: products of named coordinate slots with open constraints.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::poly::{euclidean_square, minkowski_square, parse_poly, RatPoly, SlotName, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricTag {
    Minkowski,
    Euclidean,
    ProductOfMinkowski,
}

/// Open predicate on base points. `NotAllZero` is the dedicated
/// non-vanishing predicate (`x ≠ 0`), kept apart from polynomial inequalities.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OpenPred {
    Positive(RatPoly),
    Negative(RatPoly),
    NotAllZero(Vec<RatPoly>),
}

impl OpenPred {
    pub fn nonzero_slot(slot: SlotName) -> Self {
        OpenPred::NotAllZero(slot_vars(slot).into_iter().map(RatPoly::var).collect())
    }

    /// `v² < 0` for a Minkowski slot.
    pub fn spacelike(slot: SlotName) -> Self {
        OpenPred::Negative(minkowski_square(slot))
    }

    pub fn polys(&self) -> Vec<&RatPoly> {
        match self {
            OpenPred::Positive(p) | OpenPred::Negative(p) => vec![p],
            OpenPred::NotAllZero(ps) => ps.iter().collect(),
        }
    }

    pub fn map_polys(&self, f: impl Fn(&RatPoly) -> RatPoly) -> OpenPred {
        match self {
            OpenPred::Positive(p) => OpenPred::Positive(f(p)),
            OpenPred::Negative(p) => OpenPred::Negative(f(p)),
            OpenPred::NotAllZero(ps) => OpenPred::NotAllZero(ps.iter().map(f).collect()),
        }
    }

    /// Normal form: primitive polynomials, strict inequalities as `> 0`.
    pub fn canonical(&self) -> OpenPred {
        match self {
            OpenPred::Positive(p) => OpenPred::Positive(p.primitive(false)),
            OpenPred::Negative(p) => OpenPred::Positive(p.neg().primitive(false)),
            OpenPred::NotAllZero(ps) => {
                let mut v: Vec<RatPoly> =
                    ps.iter().filter(|p| !p.is_zero()).map(|p| p.primitive(true)).collect();
                v.sort();
                v.dedup();
                OpenPred::NotAllZero(v)
            }
        }
    }

    pub fn vars(&self) -> std::collections::BTreeSet<Var> {
        self.polys().into_iter().flat_map(|p| p.vars()).collect()
    }
}

impl fmt::Display for OpenPred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpenPred::Positive(p) => write!(f, "{p} > 0"),
            OpenPred::Negative(p) => write!(f, "{p} < 0"),
            OpenPred::NotAllZero(ps) => {
                let parts: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
                write!(f, "({}) != 0", parts.join(", "))
            }
        }
    }
}

impl std::str::FromStr for OpenPred {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(lhs) = s.strip_suffix("!= 0") {
            let inner = lhs.trim().strip_prefix('(').and_then(|x| x.strip_suffix(')')).ok_or("expected `(..) != 0`")?;
            let polys = split_top_level(inner)
                .into_iter()
                .map(|t| parse_poly(t).map_err(|e| e.to_string()))
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(OpenPred::NotAllZero(polys));
        }
        if let Some(lhs) = s.strip_suffix("> 0") {
            return parse_poly(lhs.trim()).map(OpenPred::Positive).map_err(|e| e.to_string());
        }
        if let Some(lhs) = s.strip_suffix("< 0") {
            return parse_poly(lhs.trim()).map(OpenPred::Negative).map_err(|e| e.to_string());
        }
        Err(format!("cannot parse predicate `{s}`"))
    }
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    if !s[start..].trim().is_empty() {
        out.push(s[start..].trim());
    }
    out
}

impl Serialize for OpenPred {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for OpenPred {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn slot_vars(slot: SlotName) -> Vec<Var> {
    (0..slot.default_dim()).map(|c| Var::new(slot, c)).collect()
}

/// Product of named slots (kept in canonical slot order) and open constraints.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Space {
    pub slots: Vec<SlotName>,
    #[serde(default)]
    pub open_constraints: Vec<OpenPred>,
}

impl Space {
    pub fn new(slots: impl IntoIterator<Item = SlotName>) -> Self {
        let mut slots: Vec<SlotName> = slots.into_iter().collect();
        slots.sort();
        slots.dedup();
        assert!(!slots.is_empty(), "a space needs at least one slot");
        Space { slots, open_constraints: Vec::new() }
    }

    /// Minkowski space on one slot.
    pub fn minkowski(slot: SlotName) -> Self {
        Space::new([slot])
    }

    pub fn line(slot: SlotName) -> Self {
        Space::new([slot])
    }

    pub fn with(mut self, pred: OpenPred) -> Self {
        if !self.open_constraints.contains(&pred) {
            self.open_constraints.push(pred);
        }
        self
    }

    /// Slot minus its origin.
    pub fn punctured(self, slot: SlotName) -> Self {
        self.with(OpenPred::nonzero_slot(slot))
    }

    pub fn dim(&self) -> usize {
        self.slots.iter().map(|s| s.default_dim() as usize).sum()
    }

    pub fn metric_tag(&self) -> MetricTag {
        let mink = self.slots.iter().filter(|s| s.is_minkowski()).count();
        match (mink, self.slots.len()) {
            (1, 1) => MetricTag::Minkowski,
            (m, n) if m == n => MetricTag::ProductOfMinkowski,
            _ => MetricTag::Euclidean,
        }
    }

    pub fn coords(&self) -> Vec<Var> {
        self.slots.iter().flat_map(|s| slot_vars(*s)).collect()
    }

    pub fn has_slot(&self, slot: SlotName) -> bool {
        self.slots.contains(&slot)
    }

    pub fn has_var(&self, v: Var) -> bool {
        self.has_slot(v.slot) && v.comp < v.slot.default_dim()
    }

    /// Smallest space containing both (slots and constraints united).
    pub fn union(&self, other: &Space) -> Space {
        let mut out = Space::new(self.slots.iter().chain(other.slots.iter()).copied());
        for c in self.open_constraints.iter().chain(other.open_constraints.iter()) {
            out = out.with(c.clone());
        }
        out
    }

    pub fn same_slots(&self, other: &Space) -> bool {
        self.slots == other.slots
    }

    pub fn without_constraint(&self, pred: &OpenPred) -> Space {
        Space {
            slots: self.slots.clone(),
            open_constraints: self.open_constraints.iter().filter(|c| *c != pred).cloned().collect(),
        }
    }

    /// Whether a slot is punctured at its origin.
    pub fn is_punctured(&self, slot: SlotName) -> bool {
        self.open_constraints.contains(&OpenPred::nonzero_slot(slot))
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.slots.iter().map(|s| s.as_str()).collect();
        write!(f, "[{}]", names.join(" x "))?;
        for c in &self.open_constraints {
            write!(f, " | {c}")?;
        }
        Ok(())
    }
}

/// Factor relating Euclidean covector components to displayed ones. On
/// Minkowski slots the Fourier sign flip and the η-pairing combine into
/// `display = -η · euclid`; the factor is its own inverse.
pub fn display_factor(v: Var) -> i64 {
    match (v.slot.is_minkowski(), v.comp) {
        (true, 0) => -1,
        _ => 1,
    }
}

/// `|v|² > 0` written as a polynomial, for numeric sampling.
pub fn slot_norm_square(slot: SlotName) -> RatPoly {
    euclidean_square(slot)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_tags() {
        assert_eq!(Space::minkowski(SlotName::X).metric_tag(), MetricTag::Minkowski);
        assert_eq!(Space::new([SlotName::P, SlotName::E]).metric_tag(), MetricTag::ProductOfMinkowski);
        assert_eq!(Space::line(SlotName::T).metric_tag(), MetricTag::Euclidean);
        assert_eq!(Space::new([SlotName::P, SlotName::E, SlotName::Ep]).dim(), 12);
    }

    #[test]
    fn predicates_round_trip_through_strings() {
        for p in [
            OpenPred::spacelike(SlotName::E),
            OpenPred::nonzero_slot(SlotName::X),
            OpenPred::Positive(crate::poly::poly("x0 - 1")),
        ] {
            let s = p.to_string();
            assert_eq!(s.parse::<OpenPred>().unwrap(), p, "{s}");
        }
    }

    #[test]
    fn space_json_round_trip() {
        let s = Space::new([SlotName::P, SlotName::E]).with(OpenPred::spacelike(SlotName::E)).punctured(SlotName::P);
        let j = serde_json::to_string(&s).unwrap();
        let back: Space = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }
}
