//! Expression trees over a closed catalog of distributions.
//!
//! Every node knows its base space; constructors reject mismatched spaces so
//! that rule application never has to guess how children line up.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::poly::{RatPoly, SlotName, Var};
use crate::scalar::{rational_string, Rational};
use crate::space::{slot_vars, OpenPred, Space};

pub mod chart;
mod fourier;
mod map;
mod meta;
pub mod sexp;

pub use chart::{Chart, ChartMap};
pub use fourier::{dual_slot, feynman_position_massless, fourier, fourier_slot};
pub use map::{MapRef, PolyMap};
pub use meta::{homogeneity_degree, homogeneity_in, local_degree, primary_slot, support_class, SupportClass};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("invalid expression: {0}")]
    Invalid(String),
    #[error("no catalog entry: {0}")]
    NotInCatalog(String),
    #[error("parse error{}: {msg}", location.map(|(l, c)| format!(" at {l}:{c}")).unwrap_or_default())]
    Parse { msg: String, location: Option<(usize, usize)> },
}

pub type ExprResult<T> = Result<T, ExprError>;

/// Sign convention of a Fourier transform, fixed by the slot being transformed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FtConvention {
    /// `∫ e^{-ikx} u(x) dx` over a Euclidean line.
    Euclidean,
    /// `∫ e^{+i(px)} u(x) d⁴x` with the Minkowski product.
    Minkowski,
}

impl FtConvention {
    pub fn for_slot(slot: SlotName) -> Self {
        if slot.is_minkowski() {
            FtConvention::Minkowski
        } else {
            FtConvention::Euclidean
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BumpProfile {
    /// `(1 - ρ²)^power` on the unit ball in scaled coordinates.
    Polynomial { power: u32 },
    /// `exp(-1/(1 - ρ²))`.
    Smooth,
}

/// Averaging function for string variables: a bump on a Euclidean ball that
/// lies inside the spacelike cone.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TestFnDescriptor {
    #[serde(with = "rational_string::vec")]
    pub center: Vec<Rational>,
    #[serde(with = "rational_string")]
    pub radius: Rational,
    pub normalized: bool,
    pub profile: BumpProfile,
}

impl TestFnDescriptor {
    pub fn new(center: Vec<Rational>, radius: Rational) -> ExprResult<Self> {
        let t = TestFnDescriptor { center, radius, normalized: true, profile: BumpProfile::Smooth };
        t.validate()?;
        Ok(t)
    }

    /// Ball support inside `{e² < 0}`: sufficient condition `|ē| > |e⁰| + 2r`,
    /// since `|ē| - |e⁰|` is Lipschitz with constant `√2 < 2`.
    pub fn validate(&self) -> ExprResult<()> {
        if self.center.len() != 4 {
            return Err(ExprError::Invalid(format!("test function center needs 4 components, got {}", self.center.len())));
        }
        if !self.radius.is_positive() {
            return Err(ExprError::Invalid("test function radius must be positive".into()));
        }
        let spatial: Rational = self.center[1..].iter().map(|c| c * c).sum();
        let reach = self.center[0].abs() + Rational::from_integer(2.into()) * &self.radius;
        if spatial <= &reach * &reach {
            return Err(ExprError::Invalid(format!(
                "support ball around ({}) with radius {} is not inside the spacelike cone",
                self.center.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", "),
                self.radius
            )));
        }
        Ok(())
    }

    pub fn center_f64(&self) -> [f64; 4] {
        let v: Vec<f64> = self.center.iter().map(crate::scalar::Scalar::to_f64).collect();
        [v[0], v[1], v[2], v[3]]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "kebab-case")]
pub enum DistExpr {
    /// `δ` at the origin of the listed slots.
    DeltaOrigin { slots: Vec<SlotName> },
    /// `θ(±t)`.
    Heaviside { slot: SlotName, plus: bool },
    /// `[t ± i0]^{-power}`.
    BoundaryPower { slot: SlotName, plus: bool, power: u32 },
    /// `[p² - m² + i0]^{-1}`.
    FeynmanMomentumKernel {
        slot: SlotName,
        #[serde(with = "rational_string")]
        mass: Rational,
    },
    Polynomial { space: Space, poly: RatPoly },
    /// Opaque smooth function; `degrees` lists known homogeneity per slot.
    SmoothSymbol {
        space: Space,
        name: String,
        #[serde(default)]
        degrees: BTreeMap<SlotName, String>,
        #[serde(default)]
        schwartz: bool,
    },
    /// `[(pe) ± i0]^{-power}` on the full product of the two slots.
    StringFactor { plus: bool, power: u32, p: SlotName, e: SlotName },
    TensorProduct { children: Vec<DistExpr> },
    Pullback { map: MapRef, child: Box<DistExpr> },
    /// Pointwise product; children on fewer slots are tensored with `1`.
    Product { children: Vec<DistExpr> },
    Derivative { vars: Vec<Var>, child: Box<DistExpr> },
    PartialSmear { slots: Vec<SlotName>, test_fn: TestFnDescriptor, child: Box<DistExpr> },
    RestrictOpen { preds: Vec<OpenPred>, child: Box<DistExpr> },
    FourierPair { from: SlotName, to: SlotName, convention: FtConvention, child: Box<DistExpr> },
    /// Nonzero constant factor: a rational times an optional opaque symbol.
    Scale {
        #[serde(with = "rational_string")]
        factor: Rational,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        symbol: Option<String>,
        child: Box<DistExpr>,
    },
    Sum { children: Vec<DistExpr> },
    /// Extension across the joint origin of `slots` of a distribution given
    /// off that origin. `fundamental` names a constant-coefficient principal
    /// symbol `P` with `P u = c δ`, written in the coordinates of `slots`
    /// standing for the dual covector; it pins the full fiber over the origin.
    Extend {
        slots: Vec<SlotName>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fundamental: Option<RatPoly>,
        child: Box<DistExpr>,
    },
    /// `∫₀^∞ u(x + s e) ds` along the string direction `e`.
    StringIntegrate { e: SlotName, child: Box<DistExpr> },
}

fn boxed(e: DistExpr) -> Box<DistExpr> {
    Box::new(e)
}

/// The joint `not all zero` condition for the origin of `slots`.
pub fn joint_nonzero(slots: &[SlotName]) -> OpenPred {
    let mut s = slots.to_vec();
    s.sort();
    s.dedup();
    OpenPred::NotAllZero(s.iter().flat_map(|s| slot_vars(*s)).map(RatPoly::var).collect())
}

impl DistExpr {
    // ---- primitive constructors -------------------------------------------------

    pub fn delta(slots: &[SlotName]) -> DistExpr {
        DistExpr::DeltaOrigin { slots: Space::new(slots.iter().copied()).slots }
    }

    pub fn heaviside(plus: bool) -> DistExpr {
        DistExpr::Heaviside { slot: SlotName::T, plus }
    }

    pub fn bpow(plus: bool, power: u32) -> DistExpr {
        DistExpr::BoundaryPower { slot: SlotName::T, plus, power }
    }

    pub fn feynman_kernel(mass: Rational) -> DistExpr {
        DistExpr::FeynmanMomentumKernel { slot: SlotName::P, mass }
    }

    pub fn polynomial(space: Space, poly: RatPoly) -> ExprResult<DistExpr> {
        let e = DistExpr::Polynomial { space, poly };
        e.space()?;
        Ok(e)
    }

    /// Polynomial on exactly the slots its variables use.
    pub fn poly_on_vars(poly: RatPoly, fallback: SlotName) -> DistExpr {
        let mut slots: Vec<SlotName> = poly.vars().into_iter().map(|v| v.slot).collect();
        if slots.is_empty() {
            slots.push(fallback);
        }
        DistExpr::Polynomial { space: Space::new(slots), poly }
    }

    pub fn string_factor(plus: bool, power: u32, p: SlotName, e: SlotName) -> DistExpr {
        DistExpr::StringFactor { plus, power, p, e }
    }

    /// `u_±^k`: the string factor on spacelike `e`.
    pub fn string_factor_spacelike(plus: bool, power: u32, p: SlotName, e: SlotName) -> DistExpr {
        DistExpr::RestrictOpen { preds: vec![OpenPred::spacelike(e)], child: boxed(DistExpr::string_factor(plus, power, p, e)) }
    }

    // ---- checked combinators ----------------------------------------------------

    pub fn checked(self) -> ExprResult<DistExpr> {
        self.space()?;
        Ok(self)
    }

    pub fn tensor(children: Vec<DistExpr>) -> ExprResult<DistExpr> {
        DistExpr::TensorProduct { children }.checked()
    }

    pub fn pullback(map: MapRef, child: DistExpr) -> ExprResult<DistExpr> {
        DistExpr::Pullback { map, child: boxed(child) }.checked()
    }

    pub fn product(children: Vec<DistExpr>) -> ExprResult<DistExpr> {
        DistExpr::Product { children }.checked()
    }

    pub fn derivative(vars: Vec<Var>, child: DistExpr) -> ExprResult<DistExpr> {
        DistExpr::Derivative { vars, child: boxed(child) }.checked()
    }

    pub fn smear(slots: Vec<SlotName>, test_fn: TestFnDescriptor, child: DistExpr) -> ExprResult<DistExpr> {
        DistExpr::PartialSmear { slots, test_fn, child: boxed(child) }.checked()
    }

    pub fn restrict(preds: Vec<OpenPred>, child: DistExpr) -> ExprResult<DistExpr> {
        DistExpr::RestrictOpen { preds, child: boxed(child) }.checked()
    }

    /// Fourier pair in `from`; undoes an enclosing transform instead of nesting.
    pub fn fourier_pair(child: DistExpr, from: SlotName) -> ExprResult<DistExpr> {
        if let DistExpr::FourierPair { from: a, to, child: inner, .. } = &child {
            if *to == from && dual_slot(from) == Some(*a) {
                return Ok(*inner.clone());
            }
        }
        let to = dual_slot(from).ok_or_else(|| ExprError::Invalid(format!("slot {from} has no Fourier dual")))?;
        DistExpr::FourierPair { from, to, convention: FtConvention::for_slot(from), child: boxed(child) }.checked()
    }

    pub fn scale(factor: Rational, symbol: Option<String>, child: DistExpr) -> ExprResult<DistExpr> {
        DistExpr::Scale { factor, symbol, child: boxed(child) }.checked()
    }

    pub fn sum(children: Vec<DistExpr>) -> ExprResult<DistExpr> {
        DistExpr::Sum { children }.checked()
    }

    pub fn extend(slots: Vec<SlotName>, fundamental: Option<RatPoly>, child: DistExpr) -> ExprResult<DistExpr> {
        DistExpr::Extend { slots, fundamental, child: boxed(child) }.checked()
    }

    pub fn string_integrate(e: SlotName, child: DistExpr) -> ExprResult<DistExpr> {
        DistExpr::StringIntegrate { e, child: boxed(child) }.checked()
    }

    /// Restricts `child` to the complement of the joint origin of `slots`.
    pub fn off_origin(slots: &[SlotName], child: DistExpr) -> ExprResult<DistExpr> {
        DistExpr::restrict(vec![joint_nonzero(slots)], child)
    }

    // ---- structure ----------------------------------------------------------------

    pub fn children(&self) -> Vec<&DistExpr> {
        match self {
            DistExpr::TensorProduct { children } | DistExpr::Product { children } | DistExpr::Sum { children } => {
                children.iter().collect()
            }
            DistExpr::Pullback { child, .. }
            | DistExpr::Derivative { child, .. }
            | DistExpr::PartialSmear { child, .. }
            | DistExpr::RestrictOpen { child, .. }
            | DistExpr::FourierPair { child, .. }
            | DistExpr::Scale { child, .. }
            | DistExpr::Extend { child, .. }
            | DistExpr::StringIntegrate { child, .. } => vec![child],
            _ => Vec::new(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            DistExpr::DeltaOrigin { .. } => "delta",
            DistExpr::Heaviside { .. } => "heaviside",
            DistExpr::BoundaryPower { .. } => "bpow",
            DistExpr::FeynmanMomentumKernel { .. } => "feynman-kernel",
            DistExpr::Polynomial { .. } => "poly",
            DistExpr::SmoothSymbol { .. } => "smooth",
            DistExpr::StringFactor { .. } => "string-factor",
            DistExpr::TensorProduct { .. } => "tensor",
            DistExpr::Pullback { .. } => "pullback",
            DistExpr::Product { .. } => "product",
            DistExpr::Derivative { .. } => "derivative",
            DistExpr::PartialSmear { .. } => "smear",
            DistExpr::RestrictOpen { .. } => "restrict",
            DistExpr::FourierPair { .. } => "fourier",
            DistExpr::Scale { .. } => "scale",
            DistExpr::Sum { .. } => "sum",
            DistExpr::Extend { .. } => "extend",
            DistExpr::StringIntegrate { .. } => "string-integrate",
        }
    }

    /// Base space, validating the whole subtree.
    pub fn space(&self) -> ExprResult<Space> {
        match self {
            DistExpr::DeltaOrigin { slots } => {
                if slots.is_empty() {
                    return Err(ExprError::Invalid("delta needs at least one slot".into()));
                }
                Ok(Space::new(slots.iter().copied()))
            }
            DistExpr::Heaviside { slot, .. } | DistExpr::BoundaryPower { slot, .. } => {
                if slot.is_minkowski() {
                    return Err(ExprError::SpaceMismatch(format!("one-dimensional primitive placed on 4-vector slot {slot}")));
                }
                if let DistExpr::BoundaryPower { power: 0, .. } = self {
                    return Err(ExprError::Invalid("boundary value power must be at least 1".into()));
                }
                Ok(Space::line(*slot))
            }
            DistExpr::FeynmanMomentumKernel { slot, mass } => {
                if !slot.is_minkowski() {
                    return Err(ExprError::SpaceMismatch(format!("Feynman kernel needs a 4-vector slot, got {slot}")));
                }
                if mass.is_negative() {
                    return Err(ExprError::Invalid("mass must be nonnegative".into()));
                }
                Ok(Space::minkowski(*slot))
            }
            DistExpr::Polynomial { space, poly } => {
                for v in poly.vars() {
                    if !space.has_var(v) {
                        return Err(ExprError::SpaceMismatch(format!("polynomial variable {v} outside {space}")));
                    }
                }
                Ok(space.clone())
            }
            DistExpr::SmoothSymbol { space, degrees, .. } => {
                for (s, d) in degrees {
                    if d.parse::<Rational>().is_err() {
                        return Err(ExprError::Invalid(format!("bad degree `{d}` for slot {s}")));
                    }
                }
                Ok(space.clone())
            }
            DistExpr::StringFactor { p, e, power, .. } => {
                if p == e || !p.is_minkowski() || !e.is_minkowski() {
                    return Err(ExprError::SpaceMismatch(format!("string factor needs two distinct 4-vector slots, got {p}, {e}")));
                }
                if *power == 0 {
                    return Err(ExprError::Invalid("string factor power must be at least 1".into()));
                }
                Ok(Space::new([*p, *e]))
            }
            DistExpr::TensorProduct { children } => {
                if children.len() < 2 {
                    return Err(ExprError::Invalid("tensor product needs at least two factors".into()));
                }
                let mut acc: Option<Space> = None;
                for c in children {
                    let s = c.space()?;
                    if let Some(a) = &acc {
                        if s.slots.iter().any(|x| a.has_slot(*x)) {
                            return Err(ExprError::SpaceMismatch(format!("tensor factors share slots: {a} and {s}")));
                        }
                        acc = Some(a.union(&s));
                    } else {
                        acc = Some(s);
                    }
                }
                Ok(acc.unwrap())
            }
            DistExpr::Pullback { map, child } => {
                let cs = child.space()?;
                map.validate()?;
                let cod = map.codomain();
                if cod.slots != cs.slots {
                    return Err(ExprError::SpaceMismatch(format!("map lands in {cod}, child lives on {cs}")));
                }
                Ok(map.domain())
            }
            DistExpr::Product { children } => {
                if children.len() < 2 {
                    return Err(ExprError::Invalid("product needs at least two factors".into()));
                }
                let mut acc = children[0].space()?;
                for c in &children[1..] {
                    acc = acc.union(&c.space()?);
                }
                Ok(acc)
            }
            DistExpr::Derivative { vars, child } => {
                let s = child.space()?;
                for v in vars {
                    if !s.has_var(*v) {
                        return Err(ExprError::SpaceMismatch(format!("derivative in {v} outside {s}")));
                    }
                }
                Ok(s)
            }
            DistExpr::PartialSmear { slots, test_fn, child } => {
                test_fn.validate()?;
                let s = child.space()?;
                for y in slots {
                    if !s.has_slot(*y) {
                        return Err(ExprError::SpaceMismatch(format!("smeared slot {y} not in {s}")));
                    }
                    if !y.is_minkowski() {
                        return Err(ExprError::SpaceMismatch(format!("smeared slot {y} is not a string slot")));
                    }
                }
                let rest: Vec<SlotName> = s.slots.iter().copied().filter(|x| !slots.contains(x)).collect();
                if rest.is_empty() {
                    return Err(ExprError::Invalid("smearing every slot leaves a number, not a distribution".into()));
                }
                let mut out = Space::new(rest);
                for c in &s.open_constraints {
                    if c.vars().iter().all(|v| out.has_slot(v.slot)) {
                        out = out.with(c.clone());
                    }
                }
                Ok(out)
            }
            DistExpr::RestrictOpen { preds, child } => {
                let mut s = child.space()?;
                for p in preds {
                    for v in p.vars() {
                        if !s.has_var(v) {
                            return Err(ExprError::SpaceMismatch(format!("restriction uses {v} outside {s}")));
                        }
                    }
                    s = s.with(p.clone());
                }
                Ok(s)
            }
            DistExpr::FourierPair { from, to, convention, child } => {
                let s = child.space()?;
                if !s.has_slot(*from) {
                    return Err(ExprError::SpaceMismatch(format!("Fourier slot {from} not in {s}")));
                }
                if dual_slot(*from) != Some(*to) || *convention != FtConvention::for_slot(*from) {
                    return Err(ExprError::Invalid(format!("inconsistent Fourier pair {from} -> {to} ({convention:?})")));
                }
                if *to != *from && s.has_slot(*to) {
                    return Err(ExprError::SpaceMismatch(format!("dual slot {to} already present in {s}")));
                }
                if s.open_constraints.iter().any(|c| c.vars().iter().any(|v| v.slot == *from)) {
                    return Err(ExprError::Invalid(format!("Fourier transform in {from} of a distribution restricted in {from}")));
                }
                let mut out = Space::new(s.slots.iter().map(|x| if x == from { *to } else { *x }));
                out.open_constraints = s.open_constraints.clone();
                Ok(out)
            }
            DistExpr::Scale { factor, child, .. } => {
                if factor.is_zero() {
                    return Err(ExprError::Invalid("scale factor must be nonzero".into()));
                }
                child.space()
            }
            DistExpr::Sum { children } => {
                let first = children.first().ok_or_else(|| ExprError::Invalid("empty sum".into()))?.space()?;
                let mut acc = first.clone();
                for c in &children[1..] {
                    let s = c.space()?;
                    if s.slots != first.slots {
                        return Err(ExprError::SpaceMismatch(format!("sum of terms over {first} and {s}")));
                    }
                    acc = acc.union(&s);
                }
                Ok(acc)
            }
            DistExpr::Extend { slots, child, fundamental } => {
                let s = child.space()?;
                let pred = joint_nonzero(slots);
                if !s.open_constraints.contains(&pred) {
                    return Err(ExprError::Invalid(format!("extension across the origin of {slots:?} needs a child restricted by {pred}")));
                }
                if let Some(f) = fundamental {
                    if f.is_zero() {
                        return Err(ExprError::Invalid("zero principal symbol".into()));
                    }
                    if let Some(v) = f.vars().into_iter().find(|v| !slots.contains(&v.slot)) {
                        return Err(ExprError::Invalid(format!("principal symbol uses {v} outside the extended slots")));
                    }
                }
                Ok(s.without_constraint(&pred))
            }
            DistExpr::StringIntegrate { e, child } => {
                let s = child.space()?;
                if s.slots != vec![SlotName::X] || !e.is_minkowski() || *e == SlotName::X {
                    return Err(ExprError::SpaceMismatch(format!("string integration acts on functions of x, got {s}")));
                }
                Ok(Space::new([SlotName::X, *e]).with(OpenPred::spacelike(*e)))
            }
        }
    }
}

impl fmt::Display for DistExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&sexp::to_sexp(self))
    }
}

pub(crate) fn rat_str(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        q.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{minkowski_square, poly};
    use crate::scalar::{int, rat};

    fn c0() -> TestFnDescriptor {
        TestFnDescriptor::new(vec![int(0), int(2), int(0), int(0)], rat(1, 2)).unwrap()
    }

    #[test]
    fn test_function_support_must_be_spacelike() {
        assert!(TestFnDescriptor::new(vec![int(0), int(1), int(0), int(0)], rat(1, 4)).is_ok());
        assert!(TestFnDescriptor::new(vec![int(1), int(1), int(0), int(0)], rat(1, 4)).is_err());
        assert!(TestFnDescriptor::new(vec![int(0), int(1), int(0), int(0)], rat(1, 2)).is_err());
    }

    #[test]
    fn constructors_reject_space_mismatches() {
        let x2 = DistExpr::poly_on_vars(minkowski_square(SlotName::X), SlotName::X);
        let p2 = DistExpr::poly_on_vars(minkowski_square(SlotName::P), SlotName::P);
        assert!(DistExpr::sum(vec![x2.clone(), p2.clone()]).is_err());
        assert!(DistExpr::tensor(vec![x2.clone(), x2.clone()]).is_err());
        assert!(DistExpr::tensor(vec![x2.clone(), p2]).is_ok());
        assert!(DistExpr::derivative(vec![Var::new(SlotName::P, 0)], x2.clone()).is_err());
        assert!(DistExpr::extend(vec![SlotName::X], None, x2.clone()).is_err());
        assert!(DistExpr::smear(vec![SlotName::E], c0(), x2).is_err());
        let bad_poly = DistExpr::Polynomial { space: Space::minkowski(SlotName::X), poly: poly("p0") };
        assert!(bad_poly.checked().is_err());
    }

    #[test]
    fn smearing_drops_string_slots_and_their_constraints() {
        let u = DistExpr::string_factor_spacelike(false, 1, SlotName::P, SlotName::E);
        let q = DistExpr::smear(vec![SlotName::E], c0(), u).unwrap();
        assert_eq!(q.space().unwrap(), Space::minkowski(SlotName::P));
    }

    #[test]
    fn double_fourier_normalizes() {
        let k = DistExpr::feynman_kernel(int(0));
        let d = DistExpr::fourier_pair(k.clone(), SlotName::P).unwrap();
        assert_eq!(d.space().unwrap(), Space::minkowski(SlotName::X));
        assert_eq!(DistExpr::fourier_pair(d, SlotName::X).unwrap(), k);
    }

    #[test]
    fn extension_removes_the_puncture() {
        let inner = DistExpr::off_origin(&[SlotName::X], DistExpr::poly_on_vars(poly("x0"), SlotName::X)).unwrap();
        assert!(inner.space().unwrap().is_punctured(SlotName::X));
        let ext = DistExpr::extend(vec![SlotName::X], None, inner).unwrap();
        assert_eq!(ext.space().unwrap(), Space::minkowski(SlotName::X));
    }
}
