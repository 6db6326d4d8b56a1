use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::cone::catalog::*;
use crate::cone::{member, Assignment, Covector, ParamSign, VerdictValue};
use crate::expr::{feynman_position_massless, TestFnDescriptor};
use crate::poly::{poly, Var};
use crate::scalar::{rat, Rational};

fn bound(e: &DistExpr) -> WavefrontBound {
    let r = wf_bound(e);
    match r.result {
        Ok(b) => b,
        Err(f) => panic!("{e}: {f}"),
    }
}

fn d() -> DistExpr {
    feynman_position_massless()
}

fn u(plus: bool, k: u32) -> DistExpr {
    DistExpr::string_factor_spacelike(plus, k, SlotName::P, SlotName::E)
}

fn bump() -> TestFnDescriptor {
    TestFnDescriptor::new(vec![int(0), int(0), int(2), int(0)], rat(1, 3)).unwrap()
}

/// Samples points of every family without hidden coordinates and checks
/// that `member` accepts them.
fn members_hold(b: &WavefrontBound) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let coords = b.space.coords();
    let mut checked = 0;
    for f in &b.families {
        if !f.hidden.is_empty() {
            continue;
        }
        let sys = f.system(&b.space);
        for _ in 0..4 {
            let Some(pt) = sys.sample(&coords, &mut rng, 400) else { continue };
            let xi: Covector = if f.full_fiber {
                coords.iter().take(1).map(|v| (*v, int(1))).collect()
            } else {
                let mut acc = Covector::new();
                for g in &f.generators {
                    let lam: Rational = match g.sign {
                        ParamSign::Neg => int(-2),
                        _ => int(2),
                    };
                    for (v, c) in g.eval(&pt).unwrap() {
                        *acc.entry(v).or_insert_with(|| int(0)) += c * &lam;
                    }
                }
                acc.retain(|_, c| !num_traits::Zero::is_zero(c));
                acc
            };
            if xi.is_empty() {
                continue;
            }
            let v = member(b, &pt, &xi);
            assert_eq!(v.value, VerdictValue::Holds, "{f} at {pt:?} with {xi:?}");
            checked += 1;
        }
    }
    assert!(checked > 0 || b.is_empty(), "nothing sampled from {b}");
}

#[test]
fn position_propagator_is_exact() {
    let b = bound(&d());
    assert!(b.exact);
    assert!(b.same_set_as(&feynman_massless(SlotName::X)), "{b}");
    members_hold(&b);
}

#[test]
fn full_string_factor_is_exact() {
    for plus in [true, false] {
        let b = bound(&DistExpr::string_factor(plus, 1, SlotName::P, SlotName::E));
        assert!(b.exact);
        assert!(b.same_set_as(&string_factor_full(SlotName::P, SlotName::E, plus)), "{b}");
        members_hold(&b);
    }
}

#[test]
fn higher_string_powers_keep_the_families_but_lose_exactness() {
    let b = bound(&DistExpr::string_factor(true, 3, SlotName::P, SlotName::E));
    assert!(!b.exact);
    assert!(b.same_set_as(&string_factor_full(SlotName::P, SlotName::E, true)));
}

#[test]
fn fourth_string_power_is_not_integrable_at_the_origin() {
    let r = wf_bound(&DistExpr::string_factor(false, 4, SlotName::P, SlotName::E));
    let Err(WfFailure::Existence { kind, .. }) = r.result else { panic!() };
    assert_eq!(kind, ExistenceKind::Infrared);
    // away from e = 0 every power exists
    let b = bound(&u(false, 4));
    assert!(b.exact && b.same_set_as(&string_factor_spacelike(SlotName::P, SlotName::E, false)));
}

#[test]
fn opposite_string_factors_have_no_product() {
    let e = DistExpr::product(vec![u(true, 1), u(false, 1)]).unwrap();
    let r = wf_bound(&e);
    let Err(f) = &r.result else { panic!() };
    let WfFailure::Existence { kind, rule, verdict, .. } = f else { panic!("{f}") };
    assert_eq!((*kind, *rule), (ExistenceKind::Criterion, RuleName::Product));
    let w = verdict.witness.as_ref().unwrap();
    assert!(!w.covector.is_empty());
    let last = r.trace.last().unwrap();
    assert!(last.output.is_none() && last.verdict.is_some());
}

#[test]
fn equal_string_factors_multiply_to_a_power() {
    for (k, m) in [(1, 1), (1, 2), (2, 2)] {
        let e = DistExpr::product(vec![u(true, k), u(true, m)]).unwrap();
        let b = bound(&e);
        assert!(b.exact, "k={k} m={m}");
        assert!(b.same_set_as(&string_factor_spacelike(SlotName::P, SlotName::E, true)));
    }
}

#[test]
fn propagator_squares_exist_only_off_the_origin() {
    let full = DistExpr::product(vec![d(), d()]).unwrap();
    let r = wf_bound(&full);
    let Err(WfFailure::Existence { verdict, .. }) = &r.result else { panic!() };
    assert!(verdict.witness.as_ref().unwrap().point.values().all(num_traits::Zero::is_zero));

    let off = DistExpr::off_origin(&[SlotName::X], DistExpr::product(vec![d(), d(), d()]).unwrap()).unwrap();
    let b = bound(&off);
    let want = WavefrontBound::new(
        Space::minkowski(SlotName::X).punctured(SlotName::X),
        vec![lightcone_family(SlotName::X, ParamSign::Pos)],
    );
    assert!(b.same_set_as(&want), "{b}");
}

#[test]
fn momentum_kernels() {
    let massless = bound(&DistExpr::feynman_kernel(int(0)));
    assert!(massless.same_set_as(&feynman_momentum(SlotName::P, &int(0))));
    let massive = bound(&DistExpr::feynman_kernel(int(2)));
    assert!(massive.exact);
    assert!(massive.same_set_as(&feynman_momentum(SlotName::P, &int(4))), "{massive}");
    members_hold(&massive);
    // the transform of the position propagator recovers the kernel
    let back = bound(&DistExpr::fourier_pair(d(), SlotName::X).unwrap());
    assert!(back.same_set_as(&massless));
}

#[test]
fn massive_position_propagator() {
    let e = DistExpr::fourier_pair(DistExpr::feynman_kernel(int(1)), SlotName::P).unwrap();
    let b = bound(&e);
    assert!(b.same_set_as(&feynman_massless(SlotName::X)));
}

#[test]
fn smeared_string_factor_is_singular_only_at_zero_momentum() {
    for plus in [true, false] {
        let dressing = DistExpr::poly_on_vars(poly("e2^2"), SlotName::E);
        let q = DistExpr::smear(vec![SlotName::E], bump(), DistExpr::product(vec![dressing, u(plus, 2)]).unwrap()).unwrap();
        let b = bound(&q);
        assert_eq!(b.space, Space::minkowski(SlotName::P));
        assert_eq!(b.families.len(), 1, "{b}");
        let f = &b.families[0];
        assert_eq!(f.hidden.len(), 1);
        assert_eq!(f.generators[0].sign, if plus { ParamSign::Neg } else { ParamSign::Pos });
        let trace = wf_bound(&q).trace;
        assert_eq!(trace.last().unwrap().rule, RuleName::Smear);
    }
}

#[test]
fn derivatives_do_not_enlarge_the_bound() {
    let e = DistExpr::derivative(vec![Var::new(SlotName::X, 0), Var::new(SlotName::X, 2)], d()).unwrap();
    let b = bound(&e);
    assert!(!b.exact);
    assert!(crate::cone::bound_subset(&b, &bound(&d())));
}

#[test]
fn sums_and_tensors() {
    let s = DistExpr::sum(vec![d(), DistExpr::delta(&[SlotName::X])]).unwrap();
    let b = bound(&s);
    assert!(!b.exact && b.same_set_as(&feynman_massless(SlotName::X)));
    let t = DistExpr::tensor(vec![DistExpr::bpow(true, 1), DistExpr::BoundaryPower { slot: SlotName::Tau, plus: false, power: 1 }]).unwrap();
    let b = bound(&t);
    assert!(b.exact);
    // two pure factors and their cross term
    assert_eq!(b.families.len(), 3, "{b}");
}

#[test]
fn heaviside_transform_orients_the_fiber() {
    let e = DistExpr::fourier_pair(DistExpr::heaviside(true), SlotName::T).unwrap();
    let b = bound(&e);
    assert!(b.same_set_as(&boundary_value(SlotName::T, false)));
}

#[test]
fn traces_reference_children_and_are_deterministic() {
    let e = DistExpr::product(vec![u(true, 1), u(true, 1)]).unwrap();
    let a = wf_bound(&e);
    for t in &a.trace {
        if t.rule != RuleName::Axiom {
            assert!(!t.inputs.is_empty(), "{t:?}");
        }
        assert!(t.inputs.iter().all(|i| *i < t.id));
    }
    let j1 = serde_json::to_string(&a).unwrap();
    let j2 = serde_json::to_string(&wf_bound(&e)).unwrap();
    assert_eq!(j1, j2);
    assert!(j1.contains("\"rule\":\"pde_bound\"") || j1.contains("\"rule\":\"restrict\""));
}

#[test]
fn chart_pullbacks_are_left_to_the_pointwise_analysis() {
    let c = crate::expr::ChartMap::new(crate::expr::Chart::Lightlike);
    let e = DistExpr::Pullback { map: MapRef::Chart(c), child: Box::new(u(true, 1)) };
    assert!(matches!(wf_bound(&e).result, Err(WfFailure::Unknown(_))));
}

#[test]
fn restrictions_prune_families() {
    let e = DistExpr::restrict(vec![OpenPred::Positive(poly("x0 - 1"))], d()).unwrap();
    let b = bound(&e);
    assert_eq!(b.families.len(), 1);
    let pt: Assignment = [(0, 2), (1, 2), (2, 0), (3, 0)].iter().map(|(c, v)| (Var::new(SlotName::X, *c), int(*v))).collect();
    let xi: Covector = [(0, 1), (1, 1)].iter().map(|(c, v)| (Var::new(SlotName::X, *c), int(*v))).collect();
    assert!(member(&b, &pt, &xi).is_holds());
}
