//! Minkowski sums, lifting into product spaces, and inclusion tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::system::random_nonzero;
use super::{member, merge_duplicate_generators, Assignment, ConeFamily, Covector, Generator, ParamSign, Propagation, System, VerdictValue, WavefrontBound, Witness};
use crate::poly::RatPoly;
use crate::scalar::Rational;
use crate::space::{OpenPred, Space};
use num_traits::Zero;

/// Re-expresses `b` over a space with more slots: covectors vanish on the
/// new slots, full fibers become free generators on the old ones.
pub fn lift(b: &WavefrontBound, target: &Space) -> WavefrontBound {
    for s in &b.space.slots {
        assert!(target.has_slot(*s), "cannot lift {} into {}", b.space, target);
    }
    if b.space.slots == target.slots && b.space.open_constraints.iter().all(|c| target.open_constraints.contains(c)) {
        return WavefrontBound { space: target.clone(), families: b.families.clone(), exact: b.exact }.prune();
    }
    let coords = b.space.coords();
    let extra: Vec<OpenPred> =
        b.space.open_constraints.iter().filter(|c| !target.open_constraints.contains(c)).cloned().collect();
    let grows = b.space.slots != target.slots;
    let families = b
        .families
        .iter()
        .map(|f| {
            let mut f = f.clone();
            if f.full_fiber && grows {
                f.generators = f.explicit_generators(&coords);
                f.full_fiber = false;
            }
            f.base_excl.extend(extra.iter().cloned());
            f
        })
        .collect();
    WavefrontBound { space: target.clone(), families, exact: b.exact }.prune()
}

fn combine(f: &ConeFamily, g: &ConeFamily) -> ConeFamily {
    let mut out = f.clone();
    out.base_eqs.extend(g.base_eqs.iter().cloned());
    out.base_excl.extend(g.base_excl.iter().cloned());
    let collision = f.hidden.iter().any(|h| g.hidden.iter().any(|k| k.slot == h.slot));
    if collision {
        // separate existentials cannot share names: fall back to the full fiber
        let hidden: Vec<_> = f.hidden_vars();
        let uses = |p: &RatPoly| p.vars().iter().any(|v| hidden.contains(v));
        out.base_eqs.retain(|e| !uses(e));
        out.base_excl.retain(|p| !p.polys().into_iter().any(uses));
        out.hidden.clear();
        out.generators.clear();
        out.full_fiber = true;
        return out;
    }
    out.hidden.extend(g.hidden.iter().cloned());
    out.full_fiber = f.full_fiber || g.full_fiber;
    if out.full_fiber {
        out.generators.clear();
    } else {
        out.generators.extend(g.generators.iter().cloned());
        merge_duplicate_generators(&mut out.generators);
    }
    out
}

/// `{(x; ξ+ζ)}` over common base points, including `ξ = 0` or `ζ = 0`.
pub fn minkowski_sum(b1: &WavefrontBound, b2: &WavefrontBound) -> WavefrontBound {
    assert_eq!(b1.space.slots, b2.space.slots, "Minkowski sum of bounds over different spaces");
    let space = b1.space.union(&b2.space);
    let mut families: Vec<ConeFamily> = b1.families.iter().chain(b2.families.iter()).cloned().collect();
    for f in &b1.families {
        for g in &b2.families {
            families.push(combine(f, g));
        }
    }
    let out = WavefrontBound { space, families, exact: false }.prune();
    let mut canon = out.canonical();
    canon.exact = false;
    canon
}

fn pinned(f: &ConeFamily, space: &Space) -> Option<Assignment> {
    match f.system(space).propagate() {
        Propagation::Feasible(a) => Some(a),
        Propagation::Infeasible(_) => None,
    }
}

/// Sufficient structural test for `f ⊆ g` (both over `space`).
pub fn family_subset(space: &Space, f: &ConeFamily, g: &ConeFamily) -> bool {
    let Some(pins) = pinned(f, space) else { return true };
    let f = f.canonical(space);
    let g = g.canonical(space);
    let sub = |p: &RatPoly| p.substitute(|v| pins.get(&v).cloned());
    let f_eqs: Vec<RatPoly> = f.base_eqs.iter().map(|e| sub(e)).filter(|e| !e.is_zero()).map(|e| e.primitive(true)).collect();
    for e in &g.base_eqs {
        let s = sub(e);
        if !s.is_zero() && !f_eqs.contains(&s.primitive(true)) && !f.base_eqs.contains(&e.primitive(true)) {
            return false;
        }
    }
    let f_sys = f.system(space);
    for p in &g.base_excl {
        let known = f.base_excl.contains(p) || space.open_constraints.iter().any(|c| c.canonical() == *p);
        if known {
            continue;
        }
        let implied = match p {
            OpenPred::NotAllZero(ps) => f_sys.with_eqs(ps.iter().cloned()).propagate().is_infeasible(),
            _ => false,
        };
        if !implied {
            return false;
        }
    }
    if !g.hidden.is_empty() && g.hidden != f.hidden {
        return false;
    }
    if g.full_fiber {
        return true;
    }
    if f.full_fiber {
        return false;
    }
    let gs: Vec<Generator> = g.generators.iter().map(|x| x.map(sub).canonical()).collect();
    let mut used = vec![false; gs.len()];
    for fg in f.generators.iter().map(|x| x.map(sub).canonical()) {
        if fg.is_zero() {
            continue;
        }
        let Some(k) = (0..gs.len()).find(|&k| !used[k] && gs[k].comps == fg.comps && fg.sign.within(gs[k].sign)) else {
            return false;
        };
        used[k] = true;
    }
    gs.iter().zip(&used).all(|(g, u)| *u || g.sign == ParamSign::Free)
}

/// Every family of `b1` is structurally inside some family of `b2`.
pub fn bound_subset(b1: &WavefrontBound, b2: &WavefrontBound) -> bool {
    let space = b1.space.union(&b2.space);
    b1.families.iter().all(|f| b2.families.iter().any(|g| family_subset(&space, f, g)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub samples: usize,
    pub holds: usize,
    pub counterexamples: usize,
    pub unknown: usize,
    pub skipped: usize,
    pub first_counterexample: Option<Witness>,
}

/// Draws elements of `b1` and tests membership in `b2`.
pub fn sampled_inclusion(b1: &WavefrontBound, b2: &WavefrontBound, samples: usize, seed: u64) -> InclusionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = b1.space.coords();
    let mut rep = InclusionReport { samples: 0, holds: 0, counterexamples: 0, unknown: 0, skipped: 0, first_counterexample: None };
    if b1.families.is_empty() {
        return rep;
    }
    let systems: Vec<System> = b1.families.iter().map(|f| f.system(&b1.space)).collect();
    let var_lists: Vec<Vec<_>> = b1
        .families
        .iter()
        .map(|f| coords.iter().copied().chain(f.hidden_vars()).collect())
        .collect();
    for k in 0..samples {
        let i = k % b1.families.len();
        let fam = &b1.families[i];
        let Some(pt) = systems[i].sample(&var_lists[i], &mut rng, 60) else {
            rep.skipped += 1;
            continue;
        };
        let mut xi = Covector::new();
        if fam.full_fiber {
            for v in &coords {
                let x = super::system::random_rational(&mut rng);
                if !x.is_zero() {
                    xi.insert(*v, x);
                }
            }
        } else {
            for g in &fam.generators {
                let lambda = match g.sign {
                    ParamSign::Pos => random_nonzero(&mut rng, Some(true)),
                    ParamSign::Neg => random_nonzero(&mut rng, Some(false)),
                    ParamSign::Nonzero => random_nonzero(&mut rng, None),
                    ParamSign::Free => {
                        if rng.gen_bool(0.25) {
                            Rational::zero()
                        } else {
                            random_nonzero(&mut rng, None)
                        }
                    }
                };
                let val = g.eval(&pt).expect("generator evaluable at sampled point");
                for (v, c) in val {
                    let e = xi.entry(v).or_insert_with(Rational::zero);
                    *e += c * &lambda;
                }
            }
            xi.retain(|_, c| !c.is_zero());
        }
        if xi.is_empty() {
            rep.skipped += 1;
            continue;
        }
        let point: Assignment = pt.into_iter().filter(|(v, _)| coords.contains(v)).collect();
        rep.samples += 1;
        let v = member(b2, &point, &xi);
        match v.value {
            VerdictValue::Holds => rep.holds += 1,
            VerdictValue::Unknown => rep.unknown += 1,
            VerdictValue::Violated => {
                rep.counterexamples += 1;
                if rep.first_counterexample.is_none() {
                    rep.first_counterexample = Some(Witness { point, covector: xi });
                }
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::super::catalog::*;
    use super::*;
    use crate::poly::SlotName;

    #[test]
    fn sum_with_itself_is_idempotent_for_string_factor() {
        let u = string_factor_spacelike(SlotName::P, SlotName::E, true);
        let s = minkowski_sum(&u, &u);
        assert!(s.same_set_as(&u), "{s}");
    }

    #[test]
    fn sum_with_empty_is_neutral() {
        let u = string_factor_spacelike(SlotName::P, SlotName::E, false);
        let e = WavefrontBound::empty(u.space.clone());
        assert!(minkowski_sum(&u, &e).same_set_as(&u));
    }

    #[test]
    fn lift_pads_and_expands_full_fibers() {
        let d = feynman_massless(SlotName::P);
        let l = lift(&d, &Space::new([SlotName::P, SlotName::E]));
        assert_eq!(l.families.len(), 2);
        assert!(!l.families[1].full_fiber);
        assert_eq!(l.families[1].generators.len(), 4);
    }

    #[test]
    fn punctured_cone_is_inside_feynman_bound() {
        let d = feynman_massless(SlotName::X);
        let cone = WavefrontBound::new(Space::minkowski(SlotName::X), vec![lightcone_family(SlotName::X, ParamSign::Pos)]);
        assert!(bound_subset(&cone, &d));
        assert!(!bound_subset(&d, &cone));
        let rep = sampled_inclusion(&d, &d, 200, 3);
        assert_eq!(rep.counterexamples, 0);
        assert!(rep.holds > 150);
        let rep2 = sampled_inclusion(&d, &cone, 200, 3);
        assert!(rep2.counterexamples > 0);
    }
}
