//! Conic subsets of the punctured cotangent bundle over flat base spaces.
//!
//! A [`ConeFamily`] is a parametric set
//! `{(x; Σ λ_i g_i(x)) : x on the base variety, λ_i obeying sign constraints} ∖ {0}`
//! or a full fiber over its base. Covectors are stored in display convention:
//! on Minkowski slots they are `−η` times the Euclidean covector, so that the
//! lightcone family of the Feynman propagator reads `(x; λx)` with `λ > 0`.

mod disjoint;
mod json;
mod member;
mod sum;
pub mod system;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::poly::{RatPoly, SlotName, Var};
use crate::scalar::Rational;
use crate::space::{slot_vars, OpenPred, Space};

pub use disjoint::{intersect_empty, pair_disjoint};
pub use json::{BoundJson, FamilyJson};
pub use member::{member, member_family};
pub use sum::{bound_subset, family_subset, lift, minkowski_sum, sampled_inclusion, InclusionReport};
pub use disjoint::{intersect_empty_with, FalsifierConfig, DEFAULT_SEED};
pub use system::{Assignment, HiddenBall, Propagation, System};

pub type Covector = BTreeMap<Var, Rational>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamSign {
    Pos,
    Neg,
    Nonzero,
    Free,
}

impl ParamSign {
    pub fn flip(self) -> Self {
        match self {
            ParamSign::Pos => ParamSign::Neg,
            ParamSign::Neg => ParamSign::Pos,
            s => s,
        }
    }

    pub fn is_strict(self) -> bool {
        self != ParamSign::Free
    }

    pub fn admits(self, lambda: &Rational) -> bool {
        match self {
            ParamSign::Pos => lambda.is_positive(),
            ParamSign::Neg => lambda.is_negative(),
            ParamSign::Nonzero => !lambda.is_zero(),
            ParamSign::Free => true,
        }
    }

    /// Set inclusion of admissible parameter values.
    pub fn within(self, other: ParamSign) -> bool {
        self == other
            || other == ParamSign::Free
            || (other == ParamSign::Nonzero && matches!(self, ParamSign::Pos | ParamSign::Neg))
    }

    /// Sign of `λ·c` for a fixed nonzero scalar `c`.
    pub fn times(self, c: &Rational) -> Self {
        if c.is_negative() {
            self.flip()
        } else {
            self
        }
    }

    /// Sign of `λ1 + λ2` where both summands multiply the same vector.
    pub fn merge(self, other: ParamSign) -> Self {
        if self == other && self != ParamSign::Nonzero {
            self
        } else {
            ParamSign::Free
        }
    }
}

/// Covector-valued polynomial map on the base, with a sign constraint on its
/// coefficient. Missing components are zero.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Generator {
    pub comps: BTreeMap<Var, RatPoly>,
    pub sign: ParamSign,
}

impl Generator {
    pub fn new(comps: impl IntoIterator<Item = (Var, RatPoly)>, sign: ParamSign) -> Self {
        Generator { comps: comps.into_iter().filter(|(_, p)| !p.is_zero()).collect(), sign }
    }

    /// `g = target slot ← (c · source slot)` componentwise.
    pub fn slot_copy(target: SlotName, source: SlotName, sign: ParamSign) -> Self {
        Generator::new(
            slot_vars(target).into_iter().zip(slot_vars(source)).map(|(t, s)| (t, RatPoly::var(s))),
            sign,
        )
    }

    pub fn unit(v: Var) -> Self {
        Generator::new([(v, RatPoly::one())], ParamSign::Free)
    }

    pub fn is_zero(&self) -> bool {
        self.comps.values().all(RatPoly::is_zero)
    }

    pub fn map(&self, f: impl Fn(&RatPoly) -> RatPoly) -> Generator {
        Generator::new(self.comps.iter().map(|(v, p)| (*v, f(p))), self.sign)
    }

    pub fn eval(&self, pt: &Assignment) -> Option<Covector> {
        let mut out = Covector::new();
        for (v, p) in &self.comps {
            let x = p.eval(|w| pt.get(&w).cloned())?;
            if !x.is_zero() {
                out.insert(*v, x);
            }
        }
        Some(out)
    }

    pub fn vars(&self) -> std::collections::BTreeSet<Var> {
        self.comps.values().flat_map(|p| p.vars()).collect()
    }

    /// Primitive integer components with positive leading coefficient; the
    /// parameter sign absorbs the normalizing factor.
    pub fn canonical(&self) -> Generator {
        use num_bigint::BigInt;
        use num_integer::Integer;
        use num_traits::One;
        let mut g = BigInt::zero();
        let mut l = BigInt::one();
        for p in self.comps.values() {
            for (_, c) in p.terms() {
                g = g.gcd(c.numer());
                l = l.lcm(c.denom());
            }
        }
        if g.is_zero() {
            return self.clone();
        }
        let mut factor = Rational::new(l, g);
        let lead_negative = self.comps.values().next().and_then(|p| p.leading_coeff()).is_some_and(|c| c.is_negative());
        if lead_negative {
            factor = -factor;
        }
        Generator::new(self.comps.iter().map(|(v, p)| (*v, p.scale(&factor))), self.sign.times(&factor))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ConeFamily {
    pub base_eqs: Vec<RatPoly>,
    /// Open conditions on the base: strict inequalities and `not all zero`.
    pub base_excl: Vec<OpenPred>,
    pub generators: Vec<Generator>,
    pub full_fiber: bool,
    pub hidden: Vec<HiddenBall>,
}

impl ConeFamily {
    pub fn full_fiber(base_eqs: Vec<RatPoly>, base_excl: Vec<OpenPred>) -> Self {
        ConeFamily { base_eqs, base_excl, generators: Vec::new(), full_fiber: true, hidden: Vec::new() }
    }

    pub fn generated(base_eqs: Vec<RatPoly>, base_excl: Vec<OpenPred>, generators: Vec<Generator>) -> Self {
        ConeFamily { base_eqs, base_excl, generators, full_fiber: false, hidden: Vec::new() }
    }

    /// Full fiber over the origin of `slot` (other slots free).
    pub fn origin(slot: SlotName) -> Self {
        ConeFamily::full_fiber(slot_vars(slot).into_iter().map(RatPoly::var).collect(), Vec::new())
    }

    pub fn system(&self, space: &Space) -> System {
        let mut preds = space.open_constraints.clone();
        preds.extend(self.base_excl.iter().cloned());
        System { eqs: self.base_eqs.clone(), preds, balls: self.hidden.clone() }
    }

    pub fn negate(&self) -> ConeFamily {
        let mut f = self.clone();
        for g in &mut f.generators {
            g.sign = g.sign.flip();
        }
        f
    }

    pub fn hidden_vars(&self) -> Vec<Var> {
        self.hidden.iter().flat_map(HiddenBall::vars).collect()
    }

    /// Full fibers become free unit generators over `coords`.
    pub fn explicit_generators(&self, coords: &[Var]) -> Vec<Generator> {
        if self.full_fiber {
            coords.iter().map(|v| Generator::unit(*v)).collect()
        } else {
            self.generators.clone()
        }
    }

    /// Substitutes values pinned by the base equations into generators and
    /// open conditions, drops vanishing generators, and normalizes.
    pub fn canonical(&self, space: &Space) -> ConeFamily {
        let pinned = match self.system(space).propagate() {
            Propagation::Feasible(a) => a,
            Propagation::Infeasible(_) => Assignment::new(),
        };
        let sub = |p: &RatPoly| p.substitute(|v| pinned.get(&v).cloned());
        let mut eqs: Vec<RatPoly> =
            self.base_eqs.iter().map(sub).filter(|e| !e.is_zero()).map(|e| e.primitive(true)).collect();
        for (v, c) in &pinned {
            eqs.push(RatPoly::var(*v).sub(&RatPoly::constant(c.clone())).primitive(true));
        }
        eqs.sort();
        eqs.dedup();
        let mut excl: Vec<OpenPred> = self
            .base_excl
            .iter()
            .filter(|p| !space.open_constraints.contains(p))
            .map(|p| p.map_polys(sub))
            .filter(|p| !pred_is_tautology(p))
            .map(|p| p.canonical())
            .collect();
        excl.sort();
        excl.dedup();
        // `not all zero` conditions implied by the remaining open conditions
        let mut i = 0;
        while i < excl.len() {
            if let OpenPred::NotAllZero(ps) = &excl[i] {
                if ps.iter().all(|p| p.as_scaled_var().is_some()) {
                    let mut others: Vec<OpenPred> = space.open_constraints.clone();
                    others.extend(excl.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| p.clone()));
                    let mut eqs_zero = eqs.clone();
                    eqs_zero.extend(ps.iter().cloned());
                    if System::new(eqs_zero, others).propagate().is_infeasible() {
                        excl.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        let mut gens: Vec<Generator> = if self.full_fiber {
            Vec::new()
        } else {
            self.generators.iter().map(|g| g.map(sub)).filter(|g| !g.is_zero()).map(|g| g.canonical()).collect()
        };
        gens.sort();
        merge_duplicate_generators(&mut gens);
        let mut hidden = self.hidden.clone();
        hidden.sort();
        ConeFamily { base_eqs: eqs, base_excl: excl, generators: gens, full_fiber: self.full_fiber, hidden }
    }

    pub fn is_feasible(&self, space: &Space) -> bool {
        if !self.full_fiber && self.generators.iter().all(Generator::is_zero) {
            return false;
        }
        !self.system(space).propagate().is_infeasible()
    }
}

fn pred_is_tautology(p: &OpenPred) -> bool {
    match p {
        OpenPred::Positive(q) => q.as_constant().is_some_and(|c| c.is_positive()),
        OpenPred::Negative(q) => q.as_constant().is_some_and(|c| c.is_negative()),
        OpenPred::NotAllZero(qs) => qs.iter().any(|q| q.as_constant().is_some_and(|c| !c.is_zero())),
    }
}

pub(crate) fn merge_duplicate_generators(gens: &mut Vec<Generator>) {
    let mut out: Vec<Generator> = Vec::new();
    for g in gens.drain(..) {
        if let Some(h) = out.iter_mut().find(|h| h.comps == g.comps) {
            h.sign = h.sign.merge(g.sign);
        } else {
            out.push(g);
        }
    }
    *gens = out;
}

/// Union of cone families over one space; empty means smooth everywhere.
#[derive(Clone, Debug, PartialEq)]
pub struct WavefrontBound {
    pub space: Space,
    pub families: Vec<ConeFamily>,
    /// Set when the bound is known to equal the wavefront set.
    pub exact: bool,
}

impl WavefrontBound {
    pub fn empty(space: Space) -> Self {
        WavefrontBound { space, families: Vec::new(), exact: true }
    }

    pub fn new(space: Space, families: Vec<ConeFamily>) -> Self {
        WavefrontBound { space, families, exact: false }
    }

    pub fn exact(mut self, flag: bool) -> Self {
        self.exact = flag;
        self
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    pub fn negate(&self) -> WavefrontBound {
        WavefrontBound {
            space: self.space.clone(),
            families: self.families.iter().map(ConeFamily::negate).collect(),
            exact: self.exact,
        }
    }

    pub fn union(&self, other: &WavefrontBound) -> WavefrontBound {
        assert_eq!(self.space.slots, other.space.slots, "union of bounds over different spaces");
        let mut families = self.families.clone();
        families.extend(other.families.iter().cloned());
        WavefrontBound { space: self.space.clone(), families, exact: self.exact && other.exact }.prune()
    }

    /// Drops families with provably empty base or vanishing generators.
    pub fn prune(mut self) -> WavefrontBound {
        let space = self.space.clone();
        self.families.retain(|f| f.is_feasible(&space));
        self
    }

    /// Appends open predicates to the space and drops families that no
    /// longer meet it.
    pub fn restrict_open(&self, preds: &[OpenPred]) -> WavefrontBound {
        let mut space = self.space.clone();
        for p in preds {
            space = space.with(p.clone());
        }
        WavefrontBound { space, families: self.families.clone(), exact: self.exact }.prune()
    }

    /// Base sets (equations, open conditions) of every family.
    pub fn project_singsupp(&self) -> Vec<(Vec<RatPoly>, Vec<OpenPred>)> {
        self.families.iter().map(|f| (f.base_eqs.clone(), f.base_excl.clone())).collect()
    }

    /// Sorted, deduplicated, normalized families: two bounds built in
    /// different ways compare equal iff their canonical forms coincide.
    pub fn canonical(&self) -> WavefrontBound {
        let space = self.space.clone();
        let mut families: Vec<ConeFamily> =
            self.families.iter().filter(|f| f.is_feasible(&space)).map(|f| f.canonical(&space)).collect();
        families.sort();
        families.dedup();
        let mut space = self.space.clone();
        space.open_constraints = space.open_constraints.iter().map(OpenPred::canonical).collect();
        space.open_constraints.sort();
        space.open_constraints.dedup();
        WavefrontBound { space, families, exact: self.exact }
    }

    pub fn same_set_as(&self, other: &WavefrontBound) -> bool {
        let a = self.canonical();
        let b = other.canonical();
        a.space == b.space && a.families == b.families
    }
}

impl fmt::Display for ConeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut conds: Vec<String> = self.base_eqs.iter().map(|e| format!("{e} = 0")).collect();
        conds.extend(self.base_excl.iter().map(|p| p.to_string()));
        for h in &self.hidden {
            let c: Vec<String> = h.center.iter().map(|x| x.to_string()).collect();
            conds.push(format!("{} in ball(({}), {})", h.slot, c.join(", "), h.radius));
        }
        if self.full_fiber {
            write!(f, "{{ full fiber")?;
        } else {
            let gens: Vec<String> = self
                .generators
                .iter()
                .enumerate()
                .map(|(i, g)| {
                    let comps: Vec<String> = g.comps.iter().map(|(v, p)| format!("{v}:{p}")).collect();
                    format!("l{i}[{:?}]*({})", g.sign, comps.join(", "))
                })
                .collect();
            write!(f, "{{ {}", gens.join(" + "))?;
        }
        if !conds.is_empty() {
            write!(f, " | {}", conds.join(", "))?;
        }
        write!(f, " }}")
    }
}

impl fmt::Display for WavefrontBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.families.is_empty() {
            return write!(f, "∅ over {}", self.space);
        }
        let fams: Vec<String> = self.families.iter().map(|x| x.to_string()).collect();
        write!(f, "{} over {}", fams.join(" ∪ "), self.space)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictValue {
    Holds,
    Violated,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(with = "json::assignment_strings")]
    pub point: Assignment,
    #[serde(with = "json::assignment_strings")]
    pub covector: Covector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub value: VerdictValue,
    pub witness: Option<Witness>,
    pub trace: Vec<String>,
}

impl Verdict {
    pub fn holds(note: impl Into<String>) -> Self {
        Verdict { value: VerdictValue::Holds, witness: None, trace: vec![note.into()] }
    }

    pub fn unknown(note: impl Into<String>) -> Self {
        Verdict { value: VerdictValue::Unknown, witness: None, trace: vec![note.into()] }
    }

    pub fn violated(witness: Witness, note: impl Into<String>) -> Self {
        Verdict { value: VerdictValue::Violated, witness: Some(witness), trace: vec![note.into()] }
    }

    pub fn is_holds(&self) -> bool {
        self.value == VerdictValue::Holds
    }

    pub fn is_violated(&self) -> bool {
        self.value == VerdictValue::Violated
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.trace.push(note.into());
        self
    }
}

/// Axiom families shared by the catalog and the tests.
pub mod catalog {
    use super::*;
    use crate::poly::{minkowski_dot, minkowski_square};

    /// `{(x; λx) : x² = 0, x ≠ 0, λ > 0} ∪ Ṫ*₀` on Minkowski slot `x`.
    pub fn feynman_massless(slot: SlotName) -> WavefrontBound {
        WavefrontBound::new(
            Space::minkowski(slot),
            vec![lightcone_family(slot, ParamSign::Pos), ConeFamily::origin(slot)],
        )
        .exact(true)
    }

    pub fn lightcone_family(slot: SlotName, sign: ParamSign) -> ConeFamily {
        ConeFamily::generated(
            vec![minkowski_square(slot)],
            vec![OpenPred::nonzero_slot(slot)],
            vec![Generator::slot_copy(slot, slot, sign)],
        )
    }

    /// `{(0; λ) : λ > 0}` for `+`, `λ < 0` for `−`.
    pub fn boundary_value(slot: SlotName, plus: bool) -> WavefrontBound {
        let v = Var::new(slot, 0);
        WavefrontBound::new(
            Space::line(slot),
            vec![ConeFamily::generated(
                vec![RatPoly::var(v)],
                vec![],
                vec![Generator::new([(v, RatPoly::one())], if plus { ParamSign::Pos } else { ParamSign::Neg })],
            )],
        )
        .exact(true)
    }

    /// String factor family `(p, e; λe, λp)` with `(pe) = 0`; `λ < 0` for `+`.
    pub fn string_family(p: SlotName, e: SlotName, plus: bool) -> ConeFamily {
        let sign = if plus { ParamSign::Neg } else { ParamSign::Pos };
        let mut comps: Vec<(Var, RatPoly)> = Vec::new();
        for c in 0..4u8 {
            comps.push((Var::new(p, c), RatPoly::var(Var::new(e, c))));
            comps.push((Var::new(e, c), RatPoly::var(Var::new(p, c))));
        }
        ConeFamily::generated(
            vec![minkowski_dot(p, e)],
            vec![OpenPred::NotAllZero(
                slot_vars(p).into_iter().chain(slot_vars(e)).map(RatPoly::var).collect(),
            )],
            vec![Generator::new(comps, sign)],
        )
    }

    /// `U_±` on the full product space: string family plus the origin fiber.
    pub fn string_factor_full(p: SlotName, e: SlotName, plus: bool) -> WavefrontBound {
        let mut origin = ConeFamily::origin(p);
        origin.base_eqs.extend(slot_vars(e).into_iter().map(RatPoly::var));
        WavefrontBound::new(Space::new([p, e]), vec![string_family(p, e, plus), origin]).exact(true)
    }

    /// `u_±`: the string family over `e² < 0`.
    pub fn string_factor_spacelike(p: SlotName, e: SlotName, plus: bool) -> WavefrontBound {
        let mut fam = string_family(p, e, plus);
        fam.base_excl.clear();
        WavefrontBound::new(Space::new([p, e]).with(OpenPred::spacelike(e)), vec![fam]).exact(true)
    }

    /// `Ṫ*₀` on a Minkowski slot.
    pub fn origin_fiber(slot: SlotName) -> WavefrontBound {
        WavefrontBound::new(Space::minkowski(slot), vec![ConeFamily::origin(slot)]).exact(true)
    }

    /// `{(p; λp) : p² = m², λ < 0}` plus, for `m = 0`, the full fiber at `p = 0`.
    pub fn feynman_momentum(slot: SlotName, mass_sq: &Rational) -> WavefrontBound {
        let shell = minkowski_square(slot).sub(&RatPoly::constant(mass_sq.clone()));
        if mass_sq.is_zero() {
            WavefrontBound::new(
                Space::minkowski(slot),
                vec![lightcone_family(slot, ParamSign::Neg), ConeFamily::origin(slot)],
            )
            .exact(true)
        } else {
            WavefrontBound::new(
                Space::minkowski(slot),
                vec![ConeFamily::generated(vec![shell], vec![], vec![Generator::slot_copy(slot, slot, ParamSign::Neg)])],
            )
            .exact(true)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::catalog::*;
    use super::*;
    use crate::poly::poly;

    #[test]
    fn negate_is_an_involution_and_fixes_full_fibers() {
        let b = string_factor_full(SlotName::P, SlotName::E, true);
        assert_eq!(b.negate().negate(), b);
        let o = origin_fiber(SlotName::X);
        assert_eq!(o.negate(), o);
        assert_eq!(b.negate().families[0].generators[0].sign, ParamSign::Pos);
    }

    #[test]
    fn restriction_to_spacelike_drops_origin_family() {
        let full = string_factor_full(SlotName::P, SlotName::E, false);
        let restricted = full.restrict_open(&[OpenPred::spacelike(SlotName::E)]);
        assert_eq!(restricted.families.len(), 1);
        assert!(restricted.same_set_as(&string_factor_spacelike(SlotName::P, SlotName::E, false)));
    }

    #[test]
    fn restriction_by_half_space_removes_origin() {
        let o = origin_fiber(SlotName::X).restrict_open(&[OpenPred::Positive(poly("x0 - 1"))]);
        assert!(o.is_empty());
    }

    #[test]
    fn canonical_form_absorbs_generator_scaling() {
        let a = WavefrontBound::new(
            Space::minkowski(SlotName::X),
            vec![ConeFamily::generated(
                vec![poly("2*x0^2 - 2*x1^2 - 2*x2^2 - 2*x3^2")],
                vec![OpenPred::nonzero_slot(SlotName::X)],
                vec![Generator::new(
                    (0..4).map(|c| (Var::new(SlotName::X, c), RatPoly::var(Var::new(SlotName::X, c)).scale(&Rational::from_integer((-2).into())))),
                    ParamSign::Neg,
                )],
            )],
        );
        let b = WavefrontBound::new(Space::minkowski(SlotName::X), vec![lightcone_family(SlotName::X, ParamSign::Pos)]);
        assert!(a.same_set_as(&b));
    }

    #[test]
    fn projection_lists_base_sets() {
        let d = feynman_massless(SlotName::X);
        let proj = d.project_singsupp();
        assert_eq!(proj.len(), 2);
        assert_eq!(proj[1].0.len(), 4);
        assert!(WavefrontBound::empty(Space::minkowski(SlotName::X)).project_singsupp().is_empty());
    }
}
