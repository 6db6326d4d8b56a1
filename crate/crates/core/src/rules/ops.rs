//! The microlocal rules as operations on bounds, independent of expression
//! trees.

use std::collections::BTreeSet;

use num_traits::Zero;

use crate::cone::{
    intersect_empty, lift, minkowski_sum, ConeFamily, Generator, HiddenBall, ParamSign, Propagation, Verdict,
    WavefrontBound,
};
use crate::expr::{PolyMap, SupportClass, TestFnDescriptor};
use crate::poly::{RatPoly, SlotName, Var};
use crate::space::{slot_vars, OpenPred, Space};

/// Pullback along a polynomial map. A bound is returned only when the
/// normals of the map miss the child's bound.
pub fn rule_pullback(map: &PolyMap, child: &WavefrontBound) -> (Verdict, Option<WavefrontBound>) {
    let normals = match map.normals_set() {
        Ok(n) => n,
        Err(e) => return (Verdict::unknown(format!("normals not computable: {e}")), None),
    };
    let verdict = intersect_empty(&normals, child);
    if !verdict.is_holds() {
        return (verdict, None);
    }
    // isolated critical values away from the singular support leave the
    // pullback a submersion wherever it is singular
    let exact = child.exact && normals.families.iter().all(|f| f.full_fiber);
    (verdict, Some(map.pull_bound(child).exact(exact)))
}

/// Product of distributions whose bounds live over slots of one space.
/// Each new factor must avoid the negated Minkowski sum of all previous ones.
pub fn rule_product(bounds: &[WavefrontBound]) -> (Verdict, Option<WavefrontBound>) {
    assert!(!bounds.is_empty(), "product of no factors");
    let mut space = bounds[0].space.clone();
    for b in &bounds[1..] {
        space = space.union(&b.space);
    }
    let lifted: Vec<WavefrontBound> = bounds.iter().map(|b| lift(b, &space)).collect();
    let mut acc = lifted[0].clone();
    let mut notes = Vec::new();
    for (j, b) in lifted.iter().enumerate().skip(1) {
        let v = intersect_empty(&acc, &b.negate());
        if !v.is_holds() {
            return (v.with_note(format!("factor {j} against the sum of factors 0..{j}")), None);
        }
        notes.push(format!("factor {j}: {}", v.trace.join("; ")));
        if b.is_empty() {
            acc.exact = false;
            continue;
        }
        if acc.is_empty() {
            acc = b.clone().exact(false);
            continue;
        }
        acc = minkowski_sum(&acc, b);
    }
    let mut verdict = Verdict::holds("no factor meets the negated sum of the others");
    verdict.trace.extend(notes);
    (verdict, Some(acc))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PdeMode {
    /// `WF u ⊆ WF(Pu) ∪ char P`, with `known = WF(Pu)`.
    Upper,
    /// `WF(Pu) ⊆ WF u`, with `known = WF(Pu)`.
    Lower,
}

/// Characteristic set of a constant-coefficient operator whose principal
/// symbol is the single component of `symbol`, written in the coordinates of
/// its domain standing for the covector.
pub fn characteristic_set(symbol: &PolyMap, over: &Space) -> WavefrontBound {
    let sigma = &symbol.components[0];
    if sigma.as_constant().is_some() {
        return WavefrontBound::empty(over.clone()).exact(true);
    }
    let slots = &symbol.domain.slots;
    if let [s] = slots.as_slice() {
        if s.is_minkowski() && over.has_slot(*s) {
            let fam = ConeFamily {
                base_eqs: vec![sigma.rename_slot(*s, SlotName::K)],
                base_excl: vec![OpenPred::nonzero_slot(SlotName::K)],
                generators: vec![Generator::slot_copy(*s, SlotName::K, ParamSign::Pos)],
                full_fiber: false,
                hidden: vec![HiddenBall {
                    slot: SlotName::K,
                    center: vec![crate::scalar::int(0); 4],
                    radius: crate::scalar::int(1),
                }],
            };
            return WavefrontBound::new(over.clone(), vec![fam]);
        }
    }
    WavefrontBound::new(over.clone(), vec![ConeFamily::full_fiber(Vec::new(), Vec::new())])
}

pub fn rule_pde_bound(symbol: &PolyMap, known: &WavefrontBound, mode: PdeMode) -> WavefrontBound {
    match mode {
        PdeMode::Upper => {
            let ch = characteristic_set(symbol, &known.space);
            let exact = known.exact && ch.is_empty();
            known.union(&ch).exact(exact)
        }
        PdeMode::Lower => known.clone(),
    }
}

fn pinned_at_origin(space: &Space, f: &ConeFamily, slot: SlotName) -> bool {
    match f.system(space).propagate() {
        Propagation::Infeasible(_) => true,
        Propagation::Feasible(a) => slot_vars(slot).iter().all(|v| a.get(v).is_some_and(|c| c.is_zero())),
    }
}

/// Constant `c` with `g = (p; c p)` on every component of `slot`.
fn radial_factor(g: &Generator, slot: SlotName) -> Option<crate::scalar::Rational> {
    let vars = slot_vars(slot);
    if g.comps.len() != vars.len() {
        return None;
    }
    let mut c = None;
    for v in &vars {
        let p = g.comps.get(v)?;
        let (k, w) = p.as_scaled_var()?;
        if w != *v || p.num_terms() != 1 {
            return None;
        }
        match &c {
            None => c = Some(k),
            Some(c0) if *c0 == k => {}
            _ => return None,
        }
    }
    c
}

/// Sign of the origin generator for a half-line support, per direction.
fn origin_orientation(from: SlotName, to: SlotName) -> i64 {
    match (from, to) {
        (SlotName::P, SlotName::X) => 1,
        _ => -1,
    }
}

/// Transfers a bound across a Fourier transform of a distribution that is
/// homogeneous in `from`: radial families swap base point and covector, and
/// the fiber over the new origin is read off the support of the child.
pub fn rule_homogeneity_duality(
    child: &WavefrontBound,
    from: SlotName,
    to: SlotName,
    support: SupportClass,
) -> Result<WavefrontBound, String> {
    if child.space.slots != vec![from] {
        return Err(format!("duality needs a bound over {from} alone, got {}", child.space));
    }
    let mut families = Vec::new();
    for f in &child.families {
        if pinned_at_origin(&child.space, f, from) {
            continue;
        }
        if f.full_fiber || !f.hidden.is_empty() {
            return Err(format!("family {f} is not radial"));
        }
        let [g] = f.generators.as_slice() else {
            return Err(format!("family {f} has several generators"));
        };
        let c = radial_factor(g, from).ok_or_else(|| format!("generator of {f} is not radial"))?;
        let mu = g.sign.times(&c).flip();
        let homogeneous = |q: &RatPoly| q.homogeneous_degree_in(|v: Var| v.slot == from);
        let mut eqs = Vec::new();
        for e in &f.base_eqs {
            homogeneous(e).ok_or_else(|| format!("base equation {e} is not homogeneous"))?;
            eqs.push(e.rename_slot(from, to));
        }
        let mut excl = Vec::new();
        for p in &f.base_excl {
            let renamed = p.map_polys(|q| q.rename_slot(from, to));
            let odd = match p {
                OpenPred::NotAllZero(qs) => {
                    for q in qs {
                        homogeneous(q).ok_or_else(|| format!("condition {p} is not homogeneous"))?;
                    }
                    false
                }
                OpenPred::Positive(q) | OpenPred::Negative(q) => {
                    homogeneous(q).ok_or_else(|| format!("condition {p} is not homogeneous"))? % 2 == 1
                }
            };
            let flipped = match (odd, mu) {
                (false, _) | (true, ParamSign::Pos) => renamed,
                (true, ParamSign::Neg) => match renamed {
                    OpenPred::Positive(q) => OpenPred::Negative(q),
                    OpenPred::Negative(q) => OpenPred::Positive(q),
                    other => other,
                },
                (true, _) => return Err(format!("odd condition {p} under a covector of free sign")),
            };
            excl.push(flipped);
        }
        families.push(ConeFamily::generated(eqs, excl, vec![Generator::slot_copy(to, to, mu)]));
    }
    let sigma = origin_orientation(from, to);
    let (origin, origin_exact) = match support {
        SupportClass::Dense => (Some(ConeFamily::origin(to)), true),
        SupportClass::Unknown => (Some(ConeFamily::origin(to)), false),
        SupportClass::Origin => (None, true),
        SupportClass::HalfLine { positive } => {
            if to.is_minkowski() {
                return Err("half-line support on a 4-vector slot".into());
            }
            let up = (sigma > 0) == positive;
            let v = Var::new(to, 0);
            let sign = if up { ParamSign::Pos } else { ParamSign::Neg };
            (Some(ConeFamily::generated(vec![RatPoly::var(v)], vec![], vec![Generator::new([(v, RatPoly::one())], sign)])), true)
        }
    };
    families.extend(origin);
    Ok(WavefrontBound::new(Space::new([to]), families).exact(child.exact && origin_exact).prune())
}

/// Integrates the slots `slots` of a kernel against a bump supported in the
/// ball of `test_fn`: keeps covectors that vanish on the smeared slots.
pub fn rule_smear(kernel: &WavefrontBound, slots: &[SlotName], test_fn: &TestFnDescriptor) -> (WavefrontBound, Vec<String>) {
    let ys: BTreeSet<Var> = slots.iter().flat_map(|s| slot_vars(*s)).collect();
    let is_y = |v: &Var| ys.contains(v);
    let rest: Vec<SlotName> = kernel.space.slots.iter().copied().filter(|s| !slots.contains(s)).collect();
    let mut space = Space::new(rest.iter().copied());
    let mut mixed = Vec::new();
    for c in &kernel.space.open_constraints {
        let vars = c.vars();
        if vars.iter().all(|v| !is_y(v)) {
            space = space.with(c.clone());
        } else if vars.iter().any(|v| !is_y(v)) {
            mixed.push(c.clone());
        }
        // conditions on smeared slots alone hold on the whole ball
    }
    let mut notes = Vec::new();
    let mut out = Vec::new();
    for f in &kernel.families {
        let mut base = f.clone();
        base.base_excl.extend(mixed.iter().cloned());
        if f.full_fiber {
            out.push(base);
            continue;
        }
        let split = |g: &Generator| -> (Generator, Generator) {
            let x = Generator::new(g.comps.iter().filter(|(v, _)| !is_y(v)).map(|(v, p)| (*v, p.clone())), g.sign);
            let y = Generator::new(g.comps.iter().filter(|(v, _)| is_y(v)).map(|(v, p)| (*v, p.clone())), g.sign);
            (x, y)
        };
        let parts: Vec<(Generator, Generator)> = f.generators.iter().map(split).collect();
        let touching: Vec<usize> = (0..parts.len()).filter(|i| !parts[*i].1.is_zero()).collect();
        let mut seen = BTreeSet::new();
        let shared = touching.iter().any(|i| parts[*i].1.comps.keys().any(|v| !seen.insert(*v)));
        if shared {
            notes.push(format!("coupled smeared components in {f}: dropped"));
            base.generators = parts.into_iter().map(|(x, _)| x).filter(|g| !g.is_zero()).collect();
            out.push(base);
            continue;
        }
        let free: Vec<usize> = touching.iter().copied().filter(|i| parts[*i].1.sign == ParamSign::Free).collect();
        if free.len() > 8 {
            notes.push(format!("too many free generators in {f}: dropped smeared components"));
            base.generators = parts.into_iter().map(|(x, _)| x).filter(|g| !g.is_zero()).collect();
            out.push(base);
            continue;
        }
        for mask in 0u32..(1 << free.len()) {
            let mut fam = base.clone();
            fam.generators.clear();
            for (i, (x, y)) in parts.iter().enumerate() {
                let dropped = free.iter().position(|j| *j == i).is_some_and(|k| mask & (1 << k) == 0);
                if dropped {
                    continue;
                }
                fam.base_eqs.extend(y.comps.values().cloned());
                if !x.is_zero() {
                    fam.generators.push(x.clone());
                }
            }
            out.push(fam);
        }
    }
    let families = out
        .into_iter()
        .map(|mut f| {
            // dropping a condition on the smeared slots alone only enlarges the family
            f.base_excl.retain(|p| p.vars().iter().any(|v| !is_y(v)));
            let used: BTreeSet<Var> = f
                .base_eqs
                .iter()
                .flat_map(|e| e.vars())
                .chain(f.base_excl.iter().flat_map(|p| p.vars()))
                .chain(f.generators.iter().flat_map(|g| g.vars()))
                .collect();
            for s in slots {
                if used.iter().any(|v| v.slot == *s) {
                    f.hidden.push(HiddenBall { slot: *s, center: test_fn.center.clone(), radius: test_fn.radius.clone() });
                }
            }
            f
        })
        .collect();
    let mut b = WavefrontBound::new(space, families).prune().canonical();
    // canonical form may pin the kept slots and leave conditions on the ball alone
    for f in &mut b.families {
        f.base_excl.retain(|p| p.vars().iter().any(|v| !is_y(v)));
    }
    (b.exact(false), notes)
}
