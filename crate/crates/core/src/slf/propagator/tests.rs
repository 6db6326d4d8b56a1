use super::*;
use crate::cone::catalog::*;
use crate::cone::{bound_subset, member, Assignment, Covector, VerdictValue};
use crate::rules::{wf_bound, ExistenceKind, WfFailure};
use crate::scalar::{int, rat};

fn bound(e: &DistExpr) -> WavefrontBound {
    match wf_bound(e).result {
        Ok(b) => b,
        Err(f) => panic!("{f}"),
    }
}

fn bump() -> TestFnDescriptor {
    TestFnDescriptor::new(vec![int(0), int(2), int(0), int(0)], rat(1, 3)).unwrap()
}

#[test]
fn string_factors_match_their_closed_forms() {
    for plus in [true, false] {
        let b = bound(&make_u(plus));
        assert!(b.exact && b.same_set_as(&string_factor_spacelike(P, SlotName::E, plus)));
        let full = bound(&make_u_full(plus));
        assert!(full.exact && full.same_set_as(&string_factor_full(P, SlotName::E, plus)));
        assert!(full.families.iter().any(|f| f.full_fiber));
        let cut = bound(&DistExpr::restrict(vec![crate::space::OpenPred::spacelike(SlotName::E)], make_u_full(plus)).unwrap());
        assert!(cut.families.iter().all(|f| !f.full_fiber));
    }
}

#[test]
fn smeared_q_is_singular_along_the_support_rays() {
    for s in 1..=3 {
        for plus in [true, false] {
            let b = bound(&make_q_smeared(&bump(), plus, s).unwrap());
            let want = q_support_bound(&bump(), plus);
            assert!(b.same_set_as(&want), "s={s}: {b} vs {want}");
        }
    }
    let b = bound(&make_q_smeared(&bump(), false, 1).unwrap());
    let at = |v: [i64; 4]| -> Assignment { (0..4u8).map(|i| (Var::new(P, i), int(v[i as usize]))).collect() };
    let xi: Covector = [(Var::new(P, 1), int(1))].into_iter().collect();
    assert_eq!(member(&b, &at([1, 0, 0, 0]), &xi).value, VerdictValue::Violated);
    // q₋ has λ > 0 along e ≈ (0, 2, 0, 0)
    let xi: Covector = [(Var::new(P, 1), int(3))].into_iter().collect();
    assert_ne!(member(&b, &at([0, 0, 0, 0]), &xi).value, VerdictValue::Violated);
    let off: TestFnDescriptor = TestFnDescriptor { center: vec![int(1), int(1), int(0), int(0)], ..bump() };
    assert!(make_q_smeared(&off, true, 1).is_err());
}

#[test]
fn mixed_kernel_extends_across_zero_momentum() {
    let (f, fp) = kernel::default_contractions();
    let e = make_e_kernel(&f, &fp).unwrap();
    let b = bound(&e);
    assert!(b.families.iter().any(|f| f.full_fiber));
    assert_eq!(crate::expr::homogeneity_in(&e, P), Some(int(0)));
}

fn spec(s: u32, m: i64) -> PropagatorSpec {
    PropagatorSpec { smear: bump(), ..PropagatorSpec::new(s, int(m)) }
}

#[test]
fn massless_smeared_kernel_stays_inside_the_scalar_bound() {
    let b = bound(&kinematic_propagator(&spec(1, 0), true).unwrap());
    assert_eq!(b.space, Space::minkowski(P));
    assert!(bound_subset(&b, &feynman_momentum(P, &int(0))), "{b}");
}

#[test]
fn position_space_propagators_are_contained_in_the_feynman_bound() {
    for m in [0, 1] {
        let e = kinematic_position(&spec(1, m)).unwrap();
        let b = bound(&e);
        assert!(bound_subset(&b, &feynman_massless(SlotName::X)), "m={m}: {b}");
        if m == 0 {
            assert_eq!(crate::expr::homogeneity_in(&e, SlotName::X), Some(int(-2)));
        }
    }
}

#[test]
fn gate_failures_surface_as_infrared_obstructions() {
    let (gate, e) = scalar_string_propagator(0, 1, 1, &int(0), &bump()).unwrap();
    assert!(!gate.pass);
    let Err(WfFailure::Existence { kind, .. }) = wf_bound(&e).result else { panic!() };
    assert_eq!(kind, ExistenceKind::Infrared);
    let (gate, e) = scalar_string_propagator(0, 1, 1, &int(1), &bump()).unwrap();
    assert!(gate.pass);
    assert!(wf_bound(&e).result.is_ok());
}

#[test]
fn shift_terms_are_singular_only_at_the_origin() {
    let sp = spec(2, 1);
    for derivs in [vec![0u8], vec![1, 2]] {
        let e = shift_term(&sp, &ShiftTerm { derivs, coeff: int(3) }).unwrap();
        let b = bound(&e);
        assert!(b.same_set_as(&origin_fiber(SlotName::X)), "{b}");
    }
}

#[test]
fn nonkinematic_propagators_keep_the_containment() {
    let shifted = PropagatorSpec {
        time_ordering: TimeOrdering::Shifted { terms: vec![ShiftTerm { derivs: vec![0, 0], coeff: int(2) }] },
        ..spec(2, 0)
    };
    let b = bound(&nonkinematic_propagator(&shifted).unwrap());
    assert!(bound_subset(&b, &feynman_massless(SlotName::X)));
    let zero = PropagatorSpec {
        time_ordering: TimeOrdering::Shifted { terms: vec![ShiftTerm { derivs: vec![0, 0], coeff: int(0) }] },
        ..spec(2, 0)
    };
    assert_eq!(nonkinematic_propagator(&zero).unwrap(), kinematic_position(&spec(2, 0)).unwrap());
}

#[test]
fn a_single_string_cannot_carry_both_boundary_values() {
    let e = single_string_propagator(&spec(1, 0)).unwrap();
    assert!(!sign_scan(&e).clean());
    let Err(WfFailure::Existence { kind, .. }) = wf_bound(&e).result else { panic!() };
    assert_eq!(kind, ExistenceKind::Criterion);
}

#[test]
fn constructed_kernels_keep_the_sign_discipline() {
    for s in 1..=3 {
        let sp = spec(s, 0);
        let scan = sign_scan(&kinematic_propagator(&sp, true).unwrap());
        assert!(scan.clean());
        assert_eq!(scan.minus_slots, [SlotName::E].into_iter().collect());
        assert_eq!(scan.plus_slots, [SlotName::Ep].into_iter().collect());
        let shift = shift_term(&sp, &ShiftTerm { derivs: vec![], coeff: int(1) }).unwrap();
        assert!(sign_scan(&shift).clean());
    }
}

#[test]
fn linear_lagrangians_reduce_to_field_strings() {
    let sp = spec(1, 0);
    assert_eq!(lagrangian_string_propagator(&sp, 1).unwrap(), kinematic_position(&sp).unwrap());
    assert!(lagrangian_string_propagator(&sp, 2).is_err());
}
