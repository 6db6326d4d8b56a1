use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wfcalc::cone::catalog::*;
use wfcalc::cone::{intersect_empty, member, minkowski_sum, Assignment, Covector, ParamSign, VerdictValue, WavefrontBound};
use wfcalc::scalar::{int, rat, Rational};
use wfcalc::{poly, OpenPred, SlotName, Space};

fn position_bounds() -> Vec<WavefrontBound> {
    let x = SlotName::X;
    vec![
        feynman_massless(x),
        feynman_massless(x).negate(),
        origin_fiber(x),
        WavefrontBound::new(Space::minkowski(x), vec![lightcone_family(x, ParamSign::Free)]),
        WavefrontBound::new(Space::minkowski(x), vec![lightcone_family(x, ParamSign::Neg)]),
        WavefrontBound::empty(Space::minkowski(x)),
    ]
}

fn string_bounds() -> Vec<WavefrontBound> {
    let (p, e) = (SlotName::P, SlotName::E);
    vec![
        string_factor_full(p, e, true),
        string_factor_full(p, e, false),
        string_factor_spacelike(p, e, true),
        string_factor_spacelike(p, e, false),
    ]
}

fn pool() -> Vec<WavefrontBound> {
    let mut v = position_bounds();
    v.extend(string_bounds());
    v.push(feynman_momentum(SlotName::P, &int(1)));
    v.push(boundary_value(SlotName::T, true));
    v
}

/// Points of `b` obtained by sampling a family base and combining its
/// generators with nonzero admissible coefficients.
fn sample_members(b: &WavefrontBound, seed: u64, per_family: usize) -> Vec<(Assignment, Covector)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = b.space.coords();
    let mut out = Vec::new();
    for f in &b.families {
        let sys = f.system(&b.space);
        for k in 0..per_family {
            let Some(pt) = sys.sample(&coords, &mut rng, 300) else { continue };
            let xi: Covector = if f.full_fiber {
                let v = coords[k % coords.len()];
                [(v, rat(3, 2))].into_iter().collect()
            } else {
                let mut acc = Covector::new();
                for (i, g) in f.generators.iter().enumerate() {
                    let lam = match g.sign {
                        ParamSign::Neg => -rat(1 + i as i64, 2),
                        _ => rat(1 + i as i64, 2),
                    };
                    for (v, c) in g.eval(&pt).unwrap() {
                        *acc.entry(v).or_insert_with(Rational::zero) += c * &lam;
                    }
                }
                acc.retain(|_, c| !c.is_zero());
                acc
            };
            if !xi.is_empty() {
                out.push((pt, xi));
            }
        }
    }
    out
}

fn scaled(xi: &Covector, t: &Rational) -> Covector {
    xi.iter().map(|(v, c)| (*v, c * t)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn membership_is_conic(i in 0usize..12, seed in any::<u64>(), num in 1i64..40, den in 1i64..40) {
        let pool = pool();
        let b = &pool[i % pool.len()];
        let t = rat(num, den);
        for (pt, xi) in sample_members(b, seed, 2) {
            prop_assert_eq!(member(b, &pt, &xi).value, VerdictValue::Holds);
            prop_assert_eq!(member(b, &pt, &scaled(&xi, &t)).value, VerdictValue::Holds);
        }
    }

    #[test]
    fn negation_is_an_involution(i in 0usize..12) {
        let pool = pool();
        let b = &pool[i % pool.len()];
        prop_assert_eq!(&b.negate().negate(), b);
    }

    #[test]
    fn negated_members_flip(i in 0usize..12, seed in any::<u64>()) {
        let pool = pool();
        let b = &pool[i % pool.len()];
        let n = b.negate();
        for (pt, xi) in sample_members(b, seed, 2) {
            prop_assert_eq!(member(&n, &pt, &scaled(&xi, &int(-1))).value, VerdictValue::Holds);
        }
    }

    #[test]
    fn intersection_is_symmetric_and_sound(i in 0usize..6, j in 0usize..6, string in any::<bool>(), seed in any::<u64>()) {
        let pool = if string { string_bounds() } else { position_bounds() };
        let a = &pool[i % pool.len()];
        let b = &pool[j % pool.len()];
        let ab = intersect_empty(a, b);
        let ba = intersect_empty(b, a);
        prop_assert_eq!(ab.value, ba.value);
        match ab.value {
            VerdictValue::Violated => {
                let w = ab.witness.unwrap();
                prop_assert_eq!(member(a, &w.point, &w.covector).value, VerdictValue::Holds);
                prop_assert_eq!(member(b, &w.point, &w.covector).value, VerdictValue::Holds);
            }
            VerdictValue::Holds => {
                for (pt, xi) in sample_members(a, seed, 3) {
                    prop_assert_ne!(member(b, &pt, &xi).value, VerdictValue::Holds);
                }
            }
            VerdictValue::Unknown => {}
        }
    }

    #[test]
    fn restriction_shrinks(i in 0usize..12, seed in any::<u64>(), c in -3i64..3) {
        let pool = pool();
        let b = &pool[i % pool.len()];
        let v = b.space.coords()[0];
        let pred = OpenPred::Positive(poly(&format!("{} - {c}", v.name())));
        let r = b.restrict_open(&[pred]);
        for (pt, xi) in sample_members(&r, seed, 3) {
            prop_assert_eq!(member(b, &pt, &xi).value, VerdictValue::Holds);
        }
    }

    #[test]
    fn sums_contain_their_summands(i in 0usize..6, j in 0usize..6, string in any::<bool>(), seed in any::<u64>()) {
        let pool = if string { string_bounds() } else { position_bounds() };
        let a = &pool[i % pool.len()];
        let b = &pool[j % pool.len()];
        let s = minkowski_sum(a, b);
        for src in [a, b] {
            for (pt, xi) in sample_members(src, seed, 2) {
                if s.space.open_constraints.iter().all(|c| wfcalc::cone::System::new(vec![], vec![c.clone()]).holds_at(&pt)) {
                    prop_assert_eq!(member(&s, &pt, &xi).value, VerdictValue::Holds, "{} at {:?}", s, pt);
                }
            }
        }
    }
}

#[test]
fn restriction_by_a_tautology_changes_nothing() {
    let d = feynman_massless(SlotName::X);
    let r = d.restrict_open(&[OpenPred::Positive(poly("x0^2 + 1"))]);
    let samples = sample_members(&d, 3, 4);
    assert!(samples.len() >= 6);
    for (pt, xi) in samples {
        assert!(member(&r, &pt, &xi).is_holds());
    }
}
