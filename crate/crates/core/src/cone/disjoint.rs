//! Emptiness of `b1 ∩ b2`: a symbolic elimination prover backed by an exact
//! sampling falsifier.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Assignment, ConeFamily, Covector, Generator, ParamSign, Propagation, System, Verdict, VerdictValue, WavefrontBound, Witness};
use crate::linalg::nullspace;
use crate::poly::Var;
use crate::scalar::Rational;
use crate::space::Space;

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

#[derive(Clone, Copy, Debug)]
pub struct FalsifierConfig {
    pub seed: u64,
    pub samples: usize,
}

impl Default for FalsifierConfig {
    fn default() -> Self {
        FalsifierConfig { seed: DEFAULT_SEED, samples: 48 }
    }
}

pub fn intersect_empty(b1: &WavefrontBound, b2: &WavefrontBound) -> Verdict {
    intersect_empty_with(b1, b2, FalsifierConfig::default())
}

pub fn intersect_empty_with(b1: &WavefrontBound, b2: &WavefrontBound, cfg: FalsifierConfig) -> Verdict {
    assert_eq!(b1.space.slots, b2.space.slots, "intersection of bounds over different spaces");
    let space = b1.space.union(&b2.space);
    let mut unknown: Option<Verdict> = None;
    let mut notes = Vec::new();
    for (i, f) in b1.families.iter().enumerate() {
        for (j, g) in b2.families.iter().enumerate() {
            let cfg_ij = FalsifierConfig { seed: cfg.seed ^ ((i as u64) << 32 | j as u64), ..cfg };
            let v = pair_disjoint(&space, f, g, cfg_ij);
            let tag = format!("families ({i},{j})");
            match v.value {
                VerdictValue::Violated => return v.with_note(tag),
                VerdictValue::Unknown => {
                    if unknown.is_none() {
                        unknown = Some(v.with_note(tag));
                    }
                }
                VerdictValue::Holds => notes.push(format!("{tag}: {}", v.trace.join("; "))),
            }
        }
    }
    if let Some(u) = unknown {
        return u;
    }
    let mut v = Verdict::holds("all family pairs disjoint");
    v.trace.extend(notes);
    v
}

pub fn pair_disjoint(space: &Space, f: &ConeFamily, g: &ConeFamily, cfg: FalsifierConfig) -> Verdict {
    let mut sys = f.system(space);
    let collision = f.hidden.iter().any(|h| g.hidden.iter().any(|k| k.slot == h.slot));
    if collision {
        let mut plain = sys.clone();
        plain.extend(&g.system(space));
        plain.balls.clear();
        if plain.propagate().is_infeasible() {
            return Verdict::holds("disjoint base varieties");
        }
        return Verdict::unknown("both families quantify over the same hidden slot");
    }
    sys.extend(&g.system(space));
    if let Propagation::Infeasible(why) = sys.propagate() {
        return Verdict::holds(format!("disjoint base varieties ({why})"));
    }
    let coords = space.coords();
    let a = f.explicit_generators(&coords);
    let b = g.explicit_generators(&coords);
    if let Some(reason) = prove(&sys, a.clone(), b.clone(), &coords, 0, &mut 400) {
        return Verdict::holds(reason);
    }
    let mut vars = coords.clone();
    vars.extend(f.hidden_vars());
    vars.extend(g.hidden_vars());
    match falsify(&sys, &a, &b, &coords, &vars, cfg) {
        Some(w) => Verdict::violated(w, "sampled common element, verified exactly"),
        None => Verdict::unknown("neither the elimination prover nor the falsifier decided the pair"),
    }
}

fn substitute_all(gens: &[Generator], pins: &Assignment) -> Vec<Generator> {
    gens.iter()
        .map(|g| g.map(|p| p.substitute(|v| pins.get(&v).cloned())))
        .filter(|g| !g.is_zero())
        .collect()
}

/// Proves `Σ λ_i a_i = Σ μ_j b_j ≠ 0` unsolvable over the base system by
/// eliminating coordinates touched by a single generator.
fn prove(sys: &System, a: Vec<Generator>, b: Vec<Generator>, coords: &[Var], depth: usize, budget: &mut usize) -> Option<String> {
    if *budget == 0 {
        return None;
    }
    *budget -= 1;
    let pins = match sys.propagate() {
        Propagation::Infeasible(why) => return Some(format!("base infeasible: {why}")),
        Propagation::Feasible(p) => p,
    };
    if depth > 16 {
        return None;
    }
    let a = substitute_all(&a, &pins);
    let b = substitute_all(&b, &pins);
    if a.is_empty() || b.is_empty() {
        return Some("covector forced to zero".into());
    }
    for v in coords {
        let touching: Vec<(bool, usize)> = a
            .iter()
            .enumerate()
            .filter(|(_, g)| g.comps.contains_key(v))
            .map(|(i, _)| (true, i))
            .chain(b.iter().enumerate().filter(|(_, g)| g.comps.contains_key(v)).map(|(i, _)| (false, i)))
            .collect();
        if touching.len() != 1 {
            continue;
        }
        let (side_a, idx) = touching[0];
        let gen = if side_a { &a[idx] } else { &b[idx] };
        // either the coefficient vanishes or the component does
        let coefficient_zero = if gen.sign.is_strict() {
            Some("strict sign".to_string())
        } else {
            let (mut a2, mut b2) = (a.clone(), b.clone());
            if side_a {
                a2.remove(idx);
            } else {
                b2.remove(idx);
            }
            prove(sys, a2, b2, coords, depth + 1, budget)
        };
        let Some(r1) = coefficient_zero else { continue };
        let comp = gen.comps[v].clone();
        let Some(r2) = prove(&sys.with_eqs([comp.clone()]), a.clone(), b.clone(), coords, depth + 1, budget) else { continue };
        return Some(format!("coordinate {v}: coefficient zero [{r1}] or {comp} = 0 [{r2}]"));
    }
    if a.len() == 1 && b.len() == 1 {
        if let Some(c) = proportional(&a[0], &b[0]) {
            // λ a = μ b with a = c b forces μ = c λ
            let implied = a[0].sign.times(&c);
            let opposite = matches!(
                (implied, b[0].sign),
                (ParamSign::Pos, ParamSign::Neg) | (ParamSign::Neg, ParamSign::Pos)
            );
            if opposite {
                return Some("opposite sign constraints on proportional generators".into());
            }
        }
    }
    None
}

/// `Some(c)` with `a = c·b` for a constant `c ≠ 0`.
fn proportional(a: &Generator, b: &Generator) -> Option<Rational> {
    if a.comps.keys().ne(b.comps.keys()) {
        return None;
    }
    let (v, pa) = a.comps.iter().next()?;
    let pb = &b.comps[v];
    let c = pa.leading_coeff()?.clone() / pb.leading_coeff()?.clone();
    let ok = a.comps.iter().all(|(w, p)| *p == b.comps[w].scale(&c));
    ok.then_some(c)
}

fn column(g: &Generator, pt: &Assignment, coords: &[Var]) -> Option<Vec<Rational>> {
    let val = g.eval(pt)?;
    Some(coords.iter().map(|v| val.get(v).cloned().unwrap_or_else(Rational::zero)).collect())
}

fn falsify(
    sys: &System,
    a: &[Generator],
    b: &[Generator],
    coords: &[Var],
    vars: &[Var],
    cfg: FalsifierConfig,
) -> Option<Witness> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.samples {
        let Some(pt) = sys.sample(vars, &mut rng, 40) else { continue };
        let cols_a: Vec<Vec<Rational>> = a.iter().map(|g| column(g, &pt, coords)).collect::<Option<_>>()?;
        let cols_b: Vec<Vec<Rational>> = b.iter().map(|g| column(g, &pt, coords)).collect::<Option<_>>()?;
        let n = cols_a.len() + cols_b.len();
        let rows: Vec<Vec<Rational>> = (0..coords.len())
            .map(|r| cols_a.iter().map(|c| c[r].clone()).chain(cols_b.iter().map(|c| -c[r].clone())).collect())
            .collect();
        let basis = nullspace(&rows, n);
        if basis.is_empty() {
            continue;
        }
        let signs: Vec<ParamSign> = a.iter().chain(b.iter()).map(|g| g.sign).collect();
        let mut candidates: Vec<Vec<Rational>> = Vec::new();
        for v in &basis {
            candidates.push(v.clone());
            candidates.push(v.iter().map(|x| -x.clone()).collect());
        }
        for _ in 0..64 {
            let mut comb = vec![Rational::zero(); n];
            for v in &basis {
                let k = Rational::from_integer(rng.gen_range(-3i64..=3).into());
                for (c, x) in comb.iter_mut().zip(v) {
                    *c += &k * x;
                }
            }
            candidates.push(comb);
        }
        for cand in candidates {
            if !cand.iter().zip(&signs).all(|(x, s)| s.admits(x)) {
                continue;
            }
            let mut xi = Covector::new();
            for (r, v) in coords.iter().enumerate() {
                let s: Rational = cols_a.iter().zip(&cand).map(|(c, l)| &c[r] * l).sum();
                let t: Rational = cols_b.iter().zip(&cand[a.len()..]).map(|(c, l)| &c[r] * l).sum();
                debug_assert_eq!(s, t);
                if s != t {
                    continue;
                }
                if !s.is_zero() {
                    xi.insert(*v, s);
                }
            }
            if xi.is_empty() {
                continue;
            }
            let point: Assignment = pt.iter().filter(|(v, _)| coords.contains(v)).map(|(v, x)| (*v, x.clone())).collect();
            return Some(Witness { point, covector: xi });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::super::catalog::*;
    use super::*;
    use crate::poly::{minkowski_dot, minkowski_square, RatPoly, SlotName};
    use crate::space::OpenPred;
    use num_traits::Signed;

    #[test]
    fn same_string_factor_against_its_negation_is_disjoint() {
        let u = string_factor_spacelike(SlotName::P, SlotName::E, true);
        let v = intersect_empty(&u, &u.negate());
        assert!(v.is_holds(), "{v:?}");
    }

    #[test]
    fn opposite_string_factors_meet_with_witness() {
        let up = string_factor_spacelike(SlotName::P, SlotName::E, true);
        let um = string_factor_spacelike(SlotName::P, SlotName::E, false);
        let v = intersect_empty(&up, &um.negate());
        assert!(v.is_violated(), "{v:?}");
        let w = v.witness.unwrap();
        let val = |p: &RatPoly| p.eval(|x| w.point.get(&x).cloned()).unwrap();
        assert!(val(&minkowski_dot(SlotName::P, SlotName::E)).is_zero());
        assert!(val(&minkowski_square(SlotName::E)).is_negative());
        assert!(super::super::member(&up, &w.point, &w.covector).is_holds());
    }

    #[test]
    fn disjoint_bases_hold() {
        let cone = WavefrontBound::new(Space::minkowski(SlotName::X), vec![lightcone_family(SlotName::X, ParamSign::Pos)]);
        let origin = origin_fiber(SlotName::X);
        assert!(intersect_empty(&cone, &origin).is_holds());
    }

    #[test]
    fn feynman_square_on_punctured_space_only() {
        let d = feynman_massless(SlotName::X);
        let v = intersect_empty(&d, &d.negate());
        assert!(v.is_violated());
        let origin_witness = v.witness.unwrap();
        assert!(origin_witness.point.values().all(|x| x.is_zero()));
        let punctured = d.restrict_open(&[OpenPred::nonzero_slot(SlotName::X)]);
        assert!(intersect_empty(&punctured, &punctured.negate()).is_holds());
    }
}
