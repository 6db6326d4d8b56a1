use super::*;
use crate::scalar::rat;
use crate::wick::{enumerate_contractions, FieldFactor};

fn bump() -> TestFnDescriptor {
    TestFnDescriptor::new(vec![int(0), int(0), int(0), int(2)], rat(1, 2)).unwrap()
}

fn phi() -> FieldFactor {
    FieldFactor::scalar(int(0))
}

fn a(e: &str) -> FieldFactor {
    FieldFactor::potential(1, int(0), e)
}

fn full(monomials: &[FieldMonomial]) -> (PropagatorTable, ContractionPattern) {
    let table = PropagatorTable::default_for(monomials, &bump()).unwrap();
    let n = factor_locations(monomials).len() / 2;
    let pats = enumerate_contractions(monomials, n, &table);
    (table, pats.into_iter().next().expect("a full contraction"))
}

fn classify(monomials: &[FieldMonomial]) -> TermClassification {
    let (table, p) = full(monomials);
    classify_pattern(monomials, &p, &table).unwrap()
}

#[test]
fn two_feynman_propagators_need_a_delta_at_the_origin() {
    let m = [FieldMonomial::new("x", vec![phi(), phi()]), FieldMonomial::new("y", vec![phi(), phi()])];
    let c = classify(&m);
    assert_eq!(c.existence, Existence::OffThinDiagonal, "{}", c.detail);
    assert_eq!(c.degree, Some(-4));
    assert_eq!(c.freedom_bound, Some(0));
    assert!(!c.best_effort);
}

#[test]
fn three_feynman_propagators_admit_second_derivatives() {
    let m = [FieldMonomial::new("x", vec![phi(); 3]), FieldMonomial::new("y", vec![phi(); 3])];
    let c = classify(&m);
    assert_eq!(c.existence, Existence::OffThinDiagonal);
    assert_eq!(c.degree, Some(-6));
    assert_eq!(c.freedom_bound, Some(2));
}

#[test]
fn a_single_string_propagator_needs_no_extension() {
    let m = [FieldMonomial::new("x", vec![a("e1")]), FieldMonomial::new("y", vec![a("e2")])];
    let (table, p) = full(&m);
    let e = term_expr(&m, &p, &table).unwrap();
    assert!(!matches!(e, DistExpr::Product { .. }));
    let c = classify_term(&e).unwrap();
    assert_eq!(c.existence, Existence::Everywhere, "{}", c.detail);
    assert_eq!(c.degree, Some(-2));
    assert_eq!(c.freedom_bound, None);
}

#[test]
fn string_products_exist_off_the_origin() {
    // two string propagators, then a string propagator times a Feynman one
    for m in [
        [FieldMonomial::new("x", vec![a("e1"), a("e2")]), FieldMonomial::new("y", vec![a("e3"), a("e4")])],
        [FieldMonomial::new("x", vec![a("e1"), phi()]), FieldMonomial::new("y", vec![a("e2"), phi()])],
    ] {
        let (table, p) = full(&m);
        assert!(matches!(term_expr(&m, &p, &table).unwrap(), DistExpr::Product { .. }));
        let c = classify(&m);
        assert_eq!(c.existence, Existence::OffThinDiagonal, "{}", c.detail);
        assert_eq!(c.degree, Some(-4));
        assert_eq!(c.freedom_bound, Some(0));
    }
}

#[test]
fn relabelled_strings_classify_alike() {
    let m = |l: [&str; 3]| {
        [FieldMonomial::new("x", vec![a(l[0]), phi()]), FieldMonomial::new("y", vec![a(l[1]), a(l[2]), phi()])]
    };
    let (m1, m2) = (m(["e1", "e2", "e3"]), m(["s", "e1", "q"]));
    let (t1, t2) = (PropagatorTable::default_for(&m1, &bump()).unwrap(), PropagatorTable::default_for(&m2, &bump()).unwrap());
    let (p1, p2) = (enumerate_contractions(&m1, 2, &t1), enumerate_contractions(&m2, 2, &t2));
    assert_eq!(p1, p2);
    assert_eq!(p1.len(), 2);
    for p in &p1 {
        assert_eq!(classify_pattern(&m1, p, &t1).unwrap(), classify_pattern(&m2, p, &t2).unwrap());
    }
}

#[test]
fn massive_propagators_take_their_degree_from_the_table() {
    let m = [FieldMonomial::new("x", vec![FieldFactor::scalar(int(1)); 2]), FieldMonomial::new("y", vec![FieldFactor::scalar(int(1)); 2])];
    let c = classify(&m);
    assert_eq!(c.existence, Existence::OffThinDiagonal, "{}", c.detail);
    assert_eq!(c.degree, Some(-4));
    assert_eq!(c.freedom_bound, Some(0));
}

#[test]
fn derivatives_lower_the_degree() {
    let m = [
        FieldMonomial::new("x", vec![phi().with_derivs(&[0]), phi()]),
        FieldMonomial::new("y", vec![phi().with_derivs(&[1]), phi()]),
    ];
    let table = PropagatorTable::default_for(&m, &bump()).unwrap();
    let pats = enumerate_contractions(&m, 2, &table);
    let degrees: Vec<_> = pats.iter().map(|p| classify_pattern(&m, p, &table).unwrap()).map(|c| (c.degree, c.freedom_bound)).collect();
    // d0 meets d1 in one pattern and the plain fields in the other
    assert_eq!(degrees, [(Some(-6), Some(2)), (Some(-6), Some(2))]);
    let f = [FieldMonomial::new("x", vec![FieldFactor::field_strength(1, int(0))]), FieldMonomial::new("y", vec![FieldFactor::field_strength(1, int(0))])];
    let c = classify(&f);
    assert_eq!((c.existence, c.degree, c.freedom_bound), (Existence::Everywhere, Some(-4), None));
}

#[test]
fn cross_species_pairs_without_an_entry_are_rejected() {
    let m = [FieldMonomial::new("x", vec![a("e1")]), FieldMonomial::new("y", vec![FieldFactor::field_strength(1, int(0))])];
    let table = PropagatorTable::default_for(&m, &bump()).unwrap();
    assert!(enumerate_contractions(&m, 1, &table).is_empty());
    let forced = ContractionPattern { pairs: vec![(0, 1)], remainder: vec![] };
    assert!(matches!(term_expr(&m, &forced, &table), Err(WickError::MissingPropagator(..))));
}

#[test]
fn infrared_entries_surface_as_ill_defined() {
    let (gate, momentum) = crate::slf::scalar_string_propagator(0, 1, 1, &int(0), &bump()).unwrap();
    assert!(!gate.pass);
    let expr = DistExpr::fourier_pair(momentum, SlotName::P).unwrap();
    let degree = to_int(&local_degree(&expr, SlotName::X).unwrap()).unwrap();
    let s = Species::Scalar { mass: int(0) };
    let mut table = PropagatorTable::new(OrderingChoice::Kinematic);
    table.insert(&s, &s, PropagatorEntry { expr, degree, description: "obstructed".into() });
    let m = [FieldMonomial::new("x", vec![phi()]), FieldMonomial::new("y", vec![phi()])];
    let p = &enumerate_contractions(&m, 1, &table)[0];
    let c = classify_pattern(&m, p, &table).unwrap();
    assert_eq!(c.existence, Existence::IllDefinedIr, "{}", c.detail);
    assert_eq!(c.freedom_bound, None);
}

#[test]
fn triangles_are_classified_per_vertex_pair() {
    let m = [FieldMonomial::new("x", vec![phi(); 2]), FieldMonomial::new("y", vec![phi(); 2]), FieldMonomial::new("z", vec![phi(); 2])];
    let table = PropagatorTable::default_for(&m, &bump()).unwrap();
    let pats = enumerate_contractions(&m, 3, &table);
    let tri = pats.iter().find(|p| vertex_pair_terms(&m, p, &table).unwrap().len() == 3).unwrap();
    assert!(term_expr(&m, tri, &table).is_err());
    let c = classify_pattern(&m, tri, &table).unwrap();
    assert!(c.best_effort);
    assert_eq!((c.existence, c.degree, c.freedom_bound), (Existence::Everywhere, Some(-6), None));
    let m = [FieldMonomial::new("x", vec![phi(); 3]), FieldMonomial::new("y", vec![phi(); 2]), FieldMonomial::new("z", vec![phi()])];
    let pats = enumerate_contractions(&m, 3, &table);
    assert_eq!(pats.len(), 6);
    let c = classify_pattern(&m, &pats[0], &table).unwrap();
    assert!(c.best_effort);
    assert_eq!((c.existence, c.freedom_bound), (Existence::OffThinDiagonal, Some(0)));
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    fn species() -> impl Strategy<Value = Species> {
        prop_oneof![
            Just(Species::Scalar { mass: int(0) }),
            Just(Species::Scalar { mass: int(1) }),
            Just(Species::Potential { spin: 1, mass: int(0) }),
            Just(Species::Potential { spin: 2, mass: int(1) }),
            Just(Species::FieldStrength { spin: 1, mass: int(0) }),
        ]
    }

    fn vertex(point: &str, kinds: Vec<Species>, strings: &mut Vec<String>) -> FieldMonomial {
        let factors = kinds
            .into_iter()
            .map(|species| {
                let string = species.string_localized().then(|| strings.remove(0));
                FieldFactor { species, derivs: vec![], string }
            })
            .collect();
        FieldMonomial::new(point, factors)
    }

    fn build(a: Vec<Species>, b: Vec<Species>, strings: Vec<String>) -> [FieldMonomial; 2] {
        let mut s = strings;
        [vertex("x", a, &mut s), vertex("y", b, &mut s)]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn gate_passing_products_are_never_infrared_and_ignore_string_names(
            a in prop::collection::vec(species(), 1..=3),
            b in prop::collection::vec(species(), 1..=3),
            shuffle in 0u64..6,
        ) {
            let names: Vec<String> = (0..6).map(|i| format!("e{i}")).collect();
            let mut renamed = names.clone();
            renamed.rotate_left((shuffle % 6) as usize);
            renamed.iter_mut().for_each(|n| n.push('\''));
            let m1 = build(a.clone(), b.clone(), names);
            let m2 = build(a, b, renamed);
            let t = PropagatorTable::default_for(&m1, &bump()).unwrap();
            let pats = crate::wick::enumerate_all(&m1, &t);
            prop_assert_eq!(&pats, &crate::wick::enumerate_all(&m2, &t));
            for p in pats.iter().filter(|p| !p.pairs.is_empty()) {
                let c = classify_pattern(&m1, p, &t).unwrap();
                prop_assert!(matches!(c.existence, Existence::Everywhere | Existence::OffThinDiagonal), "{:?}", c);
                prop_assert_eq!(c.existence == Existence::Everywhere, p.pairs.len() == 1);
                prop_assert_eq!(&c, &classify_pattern(&m2, p, &t).unwrap());
            }
        }
    }
}
