//! Expressions for string factors, smeared string integrals and the
//! propagators built from them.
//!
//! Kernels are only ever multiplied with each other off `p = 0`; the origin
//! is reattached by an `Extend` node whose scaling gate is exactly the
//! integrability condition. A product of the raw factors at `p = 0` would be
//! rejected by the product criterion: there `u₋(p, e)` and `u₊(p, e′)` carry
//! opposite covectors `λe` and `μe′` that cancel for `e ∥ e′`.

use std::collections::BTreeSet;

use serde::Serialize;

use super::kernel::{self, Kernel};
use super::{integrability_gate, GateReport, PropagatorSpec, ShiftTerm, SlfError, TimeOrdering};
use crate::cone::{ConeFamily, Generator, HiddenBall, ParamSign, WavefrontBound};
use crate::expr::{joint_nonzero, DistExpr, TestFnDescriptor};
use crate::poly::{minkowski_dot_const, RatPoly, SlotName, Var};
use crate::scalar::Rational;
use crate::space::Space;

const P: SlotName = SlotName::P;

/// `u_± = [(pe) ± i0]^{-1}` on spacelike `e`.
pub fn make_u(plus: bool) -> DistExpr {
    DistExpr::string_factor_spacelike(plus, 1, P, SlotName::E)
}

/// `U_±` on all of `𝕄 × 𝕄`.
pub fn make_u_full(plus: bool) -> DistExpr {
    DistExpr::string_factor(plus, 1, P, SlotName::E)
}

/// `q_{c,±}(p) = ∫ c(e) (e·f)^s u_±(p, e)^s de` with the string on `slot`.
pub fn make_q_on(c: &TestFnDescriptor, plus: bool, s: u32, f: &[Rational; 4], slot: SlotName) -> Result<DistExpr, SlfError> {
    c.validate()?;
    if s == 0 {
        return Err(SlfError::Invalid("string power must be at least 1".into()));
    }
    let dressing = DistExpr::poly_on_vars(minkowski_dot_const(slot, f).pow(s), slot);
    let u = DistExpr::string_factor_spacelike(plus, s, P, slot);
    Ok(DistExpr::smear(vec![slot], c.clone(), DistExpr::product(vec![dressing, u])?)?)
}

pub fn make_q_smeared(c: &TestFnDescriptor, plus: bool, s: u32) -> Result<DistExpr, SlfError> {
    make_q_on(c, plus, s, &kernel::default_contractions().0, SlotName::E)
}

/// `{(0; λe) : e ∈ supp c}` with `λ < 0` for `+`, read off from the support
/// of the position-space function `∫ c(e) I_{±e}^s`: it lives on the rays
/// through `supp c`, and a homogeneous distribution is singular at the
/// origin exactly along its transform's support.
pub fn q_support_bound(c: &TestFnDescriptor, plus: bool) -> WavefrontBound {
    let sign = if plus { ParamSign::Neg } else { ParamSign::Pos };
    let e = SlotName::E;
    let gen = Generator::new((0..4u8).map(|i| (Var::new(P, i), RatPoly::var(Var::new(e, i)))), sign);
    let mut fam = ConeFamily::generated((0..4u8).map(|i| RatPoly::var(Var::new(P, i))).collect(), vec![], vec![gen]);
    fam.hidden.push(HiddenBall { slot: e, center: c.center.clone(), radius: c.radius.clone() });
    WavefrontBound::new(Space::minkowski(P), vec![fam]).canonical().exact(true)
}

/// `f^μ E_{μκ} f′^κ` on `(p, e, e′)`, extended across `p = 0`.
pub fn make_e_kernel(f: &[Rational; 4], fp: &[Rational; 4]) -> Result<DistExpr, SlfError> {
    extend_kernel(&kernel::e_mixed(f, fp))
}

pub fn make_spin_kernel(spec: &PropagatorSpec) -> Result<Kernel, SlfError> {
    spec.validate()?;
    Ok(kernel::spin_kernel(spec.spin, &spec.betas(), &spec.f, &spec.f_prime))
}

fn off_zero(e: DistExpr) -> Result<DistExpr, SlfError> {
    Ok(DistExpr::restrict(vec![joint_nonzero(&[P])], e)?)
}

fn extend_p(e: DistExpr) -> Result<DistExpr, SlfError> {
    Ok(DistExpr::extend(vec![P], None, e)?)
}

fn extend_kernel(k: &Kernel) -> Result<DistExpr, SlfError> {
    extend_p(off_zero(k.to_expr()?)?)
}

/// Kernel over `p² − m² + i0` in momentum space.
fn kernel_propagator(k: &Kernel, mass: &Rational, smear: Option<&TestFnDescriptor>) -> Result<DistExpr, SlfError> {
    let strings = vec![SlotName::E, SlotName::Ep];
    let fk = DistExpr::feynman_kernel(mass.clone());
    let wrap = |e: DistExpr| -> Result<DistExpr, SlfError> {
        Ok(match smear {
            Some(c) => DistExpr::smear(strings.clone(), c.clone(), e)?,
            None => e,
        })
    };
    if num_traits::Zero::is_zero(mass) {
        // the scalar factor is singular at p = 0 too, so it is extended with the kernel
        wrap(extend_p(off_zero(DistExpr::product(vec![k.to_expr()?, fk])?)?)?)
    } else {
        Ok(DistExpr::product(vec![wrap(extend_kernel(k)?)?, fk])?)
    }
}

/// Momentum-space kinematic propagator; smeared in both strings on request.
pub fn kinematic_propagator(spec: &PropagatorSpec, smeared: bool) -> Result<DistExpr, SlfError> {
    let gate = spec.gate();
    if !gate.pass {
        return Err(SlfError::Infrared(gate));
    }
    let k = make_spin_kernel(spec)?;
    kernel_propagator(&k, &spec.mass, smeared.then_some(&spec.smear))
}

/// Position-space smeared kinematic propagator.
pub fn kinematic_position(spec: &PropagatorSpec) -> Result<DistExpr, SlfError> {
    Ok(DistExpr::fourier_pair(kinematic_propagator(spec, true)?, P)?)
}

/// `p_0^ω / ([(pe) − i0]^k [(pe′) + i0]^k′ (p² − m² + i0))`, smeared in both
/// strings, after consulting the gate. The gate outcome is returned next to
/// the expression so callers can compare it with the engine's verdict.
pub fn scalar_string_propagator(
    omega: u32,
    k: u32,
    kp: u32,
    mass: &Rational,
    smear: &TestFnDescriptor,
) -> Result<(GateReport, DistExpr), SlfError> {
    let gate = integrability_gate(mass, omega as i64, k, kp);
    let e = kernel_propagator(&kernel::scalar_kernel(omega, k, kp), mass, Some(smear))?;
    Ok((gate, e))
}

/// `C ∂^a I_{c,−}^s I_{c,+}^s δ` in momentum space:
/// `C p^a q_{c,−}(p) q_{c,+}(p)` with the two strings on `e` and `e′`.
pub fn shift_term_momentum(spec: &PropagatorSpec, term: &ShiftTerm) -> Result<DistExpr, SlfError> {
    let s = spec.spin;
    let mut factors = Vec::new();
    if !term.derivs.is_empty() {
        let mono = term.derivs.iter().fold(RatPoly::one(), |acc, c| acc.mul(&RatPoly::var(Var::new(P, *c))));
        factors.push(DistExpr::polynomial(Space::minkowski(P), mono)?);
    }
    factors.push(make_q_on(&spec.smear, false, s, &spec.f, SlotName::E)?);
    factors.push(make_q_on(&spec.smear, true, s, &spec.f_prime, SlotName::Ep)?);
    let body = extend_p(off_zero(DistExpr::product(factors)?)?)?;
    Ok(DistExpr::scale(term.coeff.clone(), None, body)?)
}

pub fn shift_term(spec: &PropagatorSpec, term: &ShiftTerm) -> Result<DistExpr, SlfError> {
    Ok(DistExpr::fourier_pair(shift_term_momentum(spec, term)?, P)?)
}

/// Kinematic propagator plus the admissible shift terms with nonzero
/// coefficient, in position space.
pub fn nonkinematic_propagator(spec: &PropagatorSpec) -> Result<DistExpr, SlfError> {
    spec.validate()?;
    let kin = kinematic_position(spec)?;
    let TimeOrdering::Shifted { terms } = &spec.time_ordering else { return Ok(kin) };
    let mut summands = vec![kin];
    for t in terms.iter().filter(|t| !num_traits::Zero::is_zero(&t.coeff)) {
        summands.push(shift_term(spec, t)?);
    }
    if summands.len() == 1 {
        return Ok(summands.pop().unwrap());
    }
    Ok(DistExpr::sum(summands)?)
}

/// Alternative (S): both fields carry the same string, so every `u₊` lands
/// on `e` next to the `u₋`. The engine rejects the result.
pub fn single_string_propagator(spec: &PropagatorSpec) -> Result<DistExpr, SlfError> {
    let k = make_spin_kernel(spec)?;
    let mut summands = Vec::new();
    let space = Space::new([P, SlotName::E]);
    for ((a, b), c) in &k.terms {
        let mut factors = vec![DistExpr::polynomial(space.clone(), c.rename_slot(SlotName::Ep, SlotName::E))?];
        if *a > 0 {
            factors.push(DistExpr::string_factor(false, *a, P, SlotName::E));
        }
        if *b > 0 {
            factors.push(DistExpr::string_factor(true, *b, P, SlotName::E));
        }
        summands.push(if factors.len() == 1 { factors.pop().unwrap() } else { DistExpr::product(factors)? });
    }
    let body = if summands.len() == 1 { summands.pop().unwrap() } else { DistExpr::sum(summands)? };
    let body = DistExpr::restrict(vec![crate::space::OpenPred::spacelike(SlotName::E)], body)?;
    Ok(off_zero(DistExpr::product(vec![body, DistExpr::feynman_kernel(spec.mass.clone())])?)?)
}

/// Alternative (L): one string per interaction term. With at most one
/// potential per term every propagator still joins two independent strings,
/// so the propagator is the one of alternative (A).
pub fn lagrangian_string_propagator(spec: &PropagatorSpec, potentials_per_term: u32) -> Result<DistExpr, SlfError> {
    if potentials_per_term > 1 {
        return Err(SlfError::Invalid(format!(
            "interaction terms with {potentials_per_term} potentials share a string; only linear terms are representable"
        )));
    }
    kinematic_position(spec)
}

/// String slots carrying each boundary value, and the slots where both meet.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SignScan {
    pub minus_slots: BTreeSet<SlotName>,
    pub plus_slots: BTreeSet<SlotName>,
    pub clashes: Vec<SlotName>,
}

impl SignScan {
    pub fn clean(&self) -> bool {
        self.clashes.is_empty()
    }
}

pub fn sign_scan(e: &DistExpr) -> SignScan {
    fn walk(e: &DistExpr, out: &mut SignScan) {
        if let DistExpr::StringFactor { plus, e: slot, .. } = e {
            if *plus {
                out.plus_slots.insert(*slot);
            } else {
                out.minus_slots.insert(*slot);
            }
        }
        for c in e.children() {
            walk(c, out);
        }
    }
    let mut out = SignScan::default();
    walk(e, &mut out);
    out.clashes = out.minus_slots.intersection(&out.plus_slots).copied().collect();
    out
}

#[cfg(test)]
mod tests;
