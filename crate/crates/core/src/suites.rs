//! Named end-to-end checks. Each suite runs a fixed, seeded computation
//! and reports one line per individual check; the command line exposes them
//! under `verify --suite <name>`.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::cone::catalog::{
    boundary_value, feynman_massless, origin_fiber, string_factor_full, string_factor_spacelike,
};
use crate::cone::{bound_subset, sampled_inclusion, Assignment, WavefrontBound};
use crate::expr::{feynman_position_massless, Chart, DistExpr, MapRef, PolyMap};
use crate::numeric::checks::{
    default_diffren_samples, default_string_ft_grid, diffren_check, string_ft_identity_check,
};
use crate::numeric::decay::{
    boundary_value_config, decay_scan, engine_singular_directions, lightcone_config, time_boundary_config,
    BoundaryValue, BoundaryValueTime, DecayClass, DecayScanResult, Feynman2, Section,
};
use crate::poly::{RatPoly, SlotName, Var};
use crate::rules::{wf_bound, ExistenceKind, WfFailure};
use crate::scalar::{int, Rational};
use crate::slf::charts::{appendix_chart_analysis, CriticalShape};
use crate::slf::{
    admissible_delta_orders, integrability_gate, kinematic_position, nonkinematic_propagator, scalar_string_propagator,
    shift_term, PropagatorSpec, ShiftTerm, TimeOrdering,
};
use crate::space::Space;
use crate::wick::{
    brute_force_count, classify_pattern, enumerate_contractions, two_vertex_count, Existence, FieldFactor,
    FieldMonomial, PropagatorTable, Species,
};

/// Bumps the version whenever a report field changes meaning.
pub const REPORT_SCHEMA: u32 = 1;

/// Sampled memberships per containment case.
pub const CONTAINMENT_SAMPLES: usize = 10_000;
pub const DEFAULT_SEED: u64 = 20_240_917;

pub const DIFFREN_TOL: f64 = 1e-8;
pub const STRING_FT_TOL: f64 = 1e-5;
pub const STRING_FT_EPS: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Decay scans, for CSV export.
    #[serde(skip)]
    pub scans: Vec<(String, DecayScanResult)>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        SuiteReport { suite: suite.into(), passed: true, checks: Vec::new(), scans: Vec::new() }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.passed &= passed;
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Knobs of the sampled and numeric suites; the defaults are the
/// acceptance settings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteOptions {
    pub seed: u64,
    pub containment_samples: usize,
    pub diffren_tol: f64,
    pub string_ft_tol: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: DEFAULT_SEED,
            containment_samples: CONTAINMENT_SAMPLES,
            diffren_tol: DIFFREN_TOL,
            string_ft_tol: STRING_FT_TOL,
        }
    }
}

pub type SuiteFn = fn(&SuiteOptions) -> SuiteReport;

/// Suite name, one-line purpose, runner.
pub const SUITES: [(&str, &str, SuiteFn); 10] = [
    ("wf-axioms", "catalog bounds of D, [t±i0]^-1, U± and u± are reproduced exactly", wf_axioms),
    ("string-powers", "powers of u+ keep its bound and u+ u- fails with a witness", string_powers),
    ("gates", "integrability gate table over omega, k, k' <= 6", gates),
    ("containment", "smeared kinematic propagators lie inside the Feynman bound", containment),
    ("delta-orders", "admissible delta orders and the bounds of shift terms", delta_orders),
    ("appendix", "critical covectors of the three string charts", appendix),
    ("decay", "numeric Fourier decay agrees with the engine's singular directions", decay),
    ("diffren", "differential renormalization identity and scaling limit", diffren),
    ("string-ft", "string integration divides the Fourier transform by (pe)", string_ft),
    ("wick", "contraction counts and classification of propagator products", wick),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.0).collect()
}

pub fn run_suite(name: &str, opts: &SuiteOptions) -> Option<SuiteReport> {
    SUITES.iter().find(|s| s.0 == name).map(|s| (s.2)(opts))
}

fn bound_of(e: &DistExpr) -> Result<WavefrontBound, String> {
    wf_bound(e).result.map_err(|f| f.to_string())
}

fn same_bound(r: &mut SuiteReport, name: &str, e: &DistExpr, want: &WavefrontBound, exact: bool) {
    match bound_of(e) {
        Ok(b) => {
            let ok = b.same_set_as(want) && (!exact || b.exact);
            r.check(name, ok, format!("{b}"));
        }
        Err(f) => r.check(name, false, f),
    }
}

pub fn wf_axioms(_opts: &SuiteOptions) -> SuiteReport {
    let mut r = SuiteReport::new("wf-axioms");
    same_bound(&mut r, "D", &feynman_position_massless(), &feynman_massless(SlotName::X), true);
    for plus in [true, false] {
        let s = if plus { "+" } else { "-" };
        same_bound(&mut r, &format!("[t{s}i0]^-1"), &DistExpr::bpow(plus, 1), &boundary_value(SlotName::T, plus), true);
        same_bound(
            &mut r,
            &format!("U{s}"),
            &DistExpr::string_factor(plus, 1, SlotName::P, SlotName::E),
            &string_factor_full(SlotName::P, SlotName::E, plus),
            true,
        );
        same_bound(
            &mut r,
            &format!("u{s}"),
            &DistExpr::string_factor_spacelike(plus, 1, SlotName::P, SlotName::E),
            &string_factor_spacelike(SlotName::P, SlotName::E, plus),
            true,
        );
    }
    r
}

fn u(plus: bool) -> DistExpr {
    DistExpr::string_factor_spacelike(plus, 1, SlotName::P, SlotName::E)
}

fn comp(a: &Assignment, slot: SlotName, i: u8) -> Rational {
    a.get(&Var::new(slot, i)).cloned().unwrap_or_else(Rational::zero)
}

fn mdot(a: &[Rational; 4], b: &[Rational; 4]) -> Rational {
    &a[0] * &b[0] - &a[1] * &b[1] - &a[2] * &b[2] - &a[3] * &b[3]
}

pub fn string_powers(_opts: &SuiteOptions) -> SuiteReport {
    let mut r = SuiteReport::new("string-powers");
    let want = string_factor_spacelike(SlotName::P, SlotName::E, true);
    for k in 1..=4usize {
        let e = if k == 1 { u(true) } else { DistExpr::product(vec![u(true); k]).expect("product of u+") };
        same_bound(&mut r, &format!("(u+)^{k}"), &e, &want, false);
    }
    let e = DistExpr::product(vec![u(true), u(false)]).expect("product");
    match wf_bound(&e).result {
        Err(WfFailure::Existence { kind: ExistenceKind::Criterion, verdict, .. }) if verdict.witness.is_some() => {
            let w = verdict.witness.unwrap();
            let p: [Rational; 4] = std::array::from_fn(|i| comp(&w.point, SlotName::P, i as u8));
            let ev: [Rational; 4] = std::array::from_fn(|i| comp(&w.point, SlotName::E, i as u8));
            let (pe, e2) = (mdot(&p, &ev), mdot(&ev, &ev));
            let show = |v: &[Rational; 4]| v.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(", ");
            r.check(
                "u+ u- violated",
                pe.is_zero() && e2.is_negative() && !w.covector.is_empty(),
                format!("witness p = ({}), e = ({}), (pe) = {pe}, e^2 = {e2}", show(&p), show(&ev)),
            );
        }
        Err(f) => r.check("u+ u- violated", false, format!("failed without a criterion witness: {f}")),
        Ok(b) => r.check("u+ u- violated", false, format!("product was accepted: {b}")),
    }
    r
}

/// Integrable at `p = 0` when `ω − k − k′` exceeds `−2` (massless) or `−4`
/// (massive).
fn gate_reference(massless: bool, omega: i64, k: i64, kp: i64) -> bool {
    let d = omega - k - kp;
    if massless {
        d > -2
    } else {
        d > -4
    }
}

pub fn gates(_opts: &SuiteOptions) -> SuiteReport {
    let mut r = SuiteReport::new("gates");
    let mut mismatches = Vec::new();
    let mut rows = 0;
    for m in [int(0), int(1)] {
        for omega in 0..=6 {
            for k in 0..=6u32 {
                for kp in 0..=6u32 {
                    rows += 1;
                    let g = integrability_gate(&m, omega, k, kp);
                    if g.pass != gate_reference(m.is_zero(), omega, k as i64, kp as i64) {
                        mismatches.push(g.to_string());
                    }
                }
            }
        }
    }
    r.check("table", mismatches.is_empty(), format!("{rows} rows, mismatches: {mismatches:?}"));
    let s1 = integrability_gate(&int(0), 2, 1, 1);
    r.check("s=1 at omega-k-k'=0", s1.pass, s1.to_string());
    let ir = integrability_gate(&int(0), 0, 1, 1);
    r.check("massless omega=0 k=k'=1", !ir.pass, ir.to_string());
    let massive = integrability_gate(&int(1), 0, 1, 1);
    r.check("massive omega=0 k=k'=1", massive.pass, massive.to_string());
    // the engine sees the same obstruction as an infrared failure
    let bump = PropagatorSpec::new(1, int(0)).smear;
    let mut engine = Vec::new();
    for m in [int(0), int(1)] {
        for (omega, k, kp) in [(0, 1, 1), (1, 1, 1), (2, 1, 1), (0, 2, 1)] {
            let (g, e) = match scalar_string_propagator(omega, k, kp, &m, &bump) {
                Ok(x) => x,
                Err(f) => {
                    engine.push(format!("construction failed: {f}"));
                    continue;
                }
            };
            let infrared = matches!(wf_bound(&e).result, Err(WfFailure::Existence { kind: ExistenceKind::Infrared, .. }));
            if infrared == g.pass {
                engine.push(format!("{g} but engine infrared = {infrared}"));
            }
        }
    }
    r.check("engine agrees", engine.is_empty(), format!("disagreements: {engine:?}"));
    r
}

pub fn containment(opts: &SuiteOptions) -> SuiteReport {
    let mut r = SuiteReport::new("containment");
    let d = feynman_massless(SlotName::X);
    for s in 1..=3 {
        for m in [0, 1] {
            let name = format!("s={s} m={m}");
            let b = match kinematic_position(&PropagatorSpec::new(s, int(m))).map_err(|e| e.to_string()).and_then(|e| bound_of(&e)) {
                Ok(b) => b,
                Err(f) => {
                    r.check(name, false, f);
                    continue;
                }
            };
            let families = bound_subset(&b, &d);
            let rep = sampled_inclusion(&b, &d, opts.containment_samples, opts.seed ^ (s as u64 * 16 + m as u64));
            r.check(
                name,
                families && rep.counterexamples == 0 && rep.unknown == 0 && rep.samples + rep.skipped == opts.containment_samples,
                format!(
                    "family inclusion {families}; {} drawn, {} hold, {} counterexamples, {} unknown, {} skipped",
                    rep.samples + rep.skipped,
                    rep.holds,
                    rep.counterexamples,
                    rep.unknown,
                    rep.skipped
                ),
            );
        }
    }
    r
}

fn delta_reference(s: u32, massless: bool) -> BTreeSet<u32> {
    let top = 2 * s - 2;
    if massless {
        [top].into()
    } else {
        ((2 * s).saturating_sub(3)..=top).collect()
    }
}

fn multi_index(order: u32) -> Vec<u8> {
    (0..order).map(|i| (i % 4) as u8).collect()
}

pub fn delta_orders(_opts: &SuiteOptions) -> SuiteReport {
    let mut r = SuiteReport::new("delta-orders");
    for s in 1..=4 {
        for m in [int(0), int(1)] {
            let got = admissible_delta_orders(s, &m);
            let want = delta_reference(s, m.is_zero());
            r.check(format!("orders s={s} m={m}"), got == want, format!("{got:?}, expected {want:?}"));
        }
    }
    let origin = origin_fiber(SlotName::X);
    for (s, m) in [(1, 0), (2, 0), (2, 1), (3, 1)] {
        let mut spec = PropagatorSpec::new(s, int(m));
        let orders = admissible_delta_orders(s, &spec.mass);
        let terms: Vec<ShiftTerm> = orders.iter().map(|a| ShiftTerm { derivs: multi_index(*a), coeff: int(1) }).collect();
        for t in &terms {
            let name = format!("shift s={s} m={m} |a|={}", t.derivs.len());
            match shift_term(&spec, t).map_err(|e| e.to_string()).and_then(|e| bound_of(&e)) {
                Ok(b) => r.check(name, b.same_set_as(&origin), format!("{b}")),
                Err(f) => r.check(name, false, f),
            }
        }
        spec.time_ordering = TimeOrdering::Shifted { terms };
        let name = format!("non-kinematic s={s} m={m}");
        match nonkinematic_propagator(&spec).map_err(|e| e.to_string()).and_then(|e| bound_of(&e)) {
            Ok(b) => r.check(name, bound_subset(&b, &feynman_massless(SlotName::X)), format!("{b}")),
            Err(f) => r.check(name, false, f),
        }
    }
    r
}

pub fn appendix(_opts: &SuiteOptions) -> SuiteReport {
    let mut r = SuiteReport::new("appendix");
    for (chart, want) in [
        (Chart::Lightlike, CriticalShape::AlongString),
        (Chart::HMinus1, CriticalShape::Empty),
        (Chart::PurelySpacelike, CriticalShape::TimeAxis),
    ] {
        let rep = appendix_chart_analysis(chart);
        let fd_ok = rep.jacobian_fd_error < 1e-6;
        r.check(
            chart.name(),
            rep.shape == want && fd_ok,
            format!("{} ({} samples, jacobian fd error {:.1e})", rep.description, rep.samples.len(), rep.jacobian_fd_error),
        );
    }
    r
}

fn x_probe(x: [i64; 2]) -> Assignment {
    (0..4u8).map(|i| (Var::new(SlotName::X, i), int(if i < 2 { x[i as usize] } else { 0 }))).collect()
}

/// Compares scan classes with the engine: singular directions must be slow
/// and the rest rapid.
fn agreement(r: &mut SuiteReport, name: &str, scan: &DecayScanResult, singular: &[bool]) {
    let mut wrong = Vec::new();
    for (d, s) in scan.directions.iter().zip(singular) {
        let want = if *s { DecayClass::Slow } else { DecayClass::Rapid };
        if d.class != want {
            wrong.push(format!("direction {} is {:?} with exponent {:.2}, expected {want:?}", d.index, d.class, d.exponent));
        }
    }
    let exps = |s: bool| {
        scan.directions.iter().zip(singular).filter(|(_, x)| **x == s).map(|(d, _)| d.exponent).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e), hi.max(e)))
    };
    let ((slo, shi), (rlo, rhi)) = (exps(true), exps(false));
    let band = scan.directions.iter().map(|d| d.band).fold(0.0, f64::max);
    r.check(
        name,
        wrong.is_empty() && scan.directions.len() == singular.len(),
        format!(
            "{} directions, {} singular; singular exponents [{slo:.2}, {shi:.2}], smooth [{rlo:.2}, {rhi:.2}], widest band {band:.2}; {}",
            singular.len(),
            singular.iter().filter(|s| **s).count(),
            if wrong.is_empty() { "no misclassifications".to_string() } else { wrong.join("; ") }
        ),
    );
}

pub fn decay(_opts: &SuiteOptions) -> SuiteReport {
    let mut r = SuiteReport::new("decay");
    let x2 = vec![Var::new(SlotName::X, 0), Var::new(SlotName::X, 1)];

    // 1D: [t − i0]^{-1} is singular only in the negative covector direction
    // of the displayed convention; the scan grid is (−1, +1)
    let cfg = boundary_value_config();
    match decay_scan(&BoundaryValue { plus: false }, &cfg) {
        Ok(scan) => {
            let b = boundary_value(SlotName::T, false);
            let probe: Assignment = [(Var::new(SlotName::T, 0), int(0))].into();
            let section = Section { bound: &b, coords: vec![Var::new(SlotName::T, 0)], probes: vec![probe] };
            match engine_singular_directions(&section, &cfg.direction_vectors(), PI / 4.0) {
                Ok(sing) => agreement(&mut r, "[t-i0]^-1 on the line", &scan, &sing),
                Err(f) => r.check("[t-i0]^-1 on the line", false, f),
            }
            r.scans.push(("boundary_value_1d".into(), scan));
        }
        Err(f) => r.check("[t-i0]^-1 on the line", false, f),
    }

    // 1+1D: [x⁰ − i0]^{-1} near the origin, and the Feynman propagator at a
    // lightcone point
    let cfg = time_boundary_config(32);
    let map = PolyMap::scalar(Space::minkowski(SlotName::X), RatPoly::var(Var::new(SlotName::X, 0))).expect("linear map");
    let lifted = DistExpr::pullback(MapRef::Poly(map), DistExpr::bpow(false, 1)).expect("pullback");
    match (decay_scan(&BoundaryValueTime { plus: false }, &cfg), bound_of(&lifted)) {
        (Ok(scan), Ok(b)) => {
            let section = Section { bound: &b, coords: x2.clone(), probes: vec![x_probe([0, 1])] };
            match engine_singular_directions(&section, &cfg.direction_vectors(), PI / 32.0) {
                Ok(sing) => agreement(&mut r, "[x0-i0]^-1 on 32 directions", &scan, &sing),
                Err(f) => r.check("[x0-i0]^-1 on 32 directions", false, f),
            }
            r.scans.push(("boundary_value_2d".into(), scan));
        }
        (Err(f), _) | (_, Err(f)) => r.check("[x0-i0]^-1 on 32 directions", false, f),
    }

    let cfg = lightcone_config(32);
    match decay_scan(&Feynman2, &cfg) {
        Ok(scan) => {
            let b = feynman_massless(SlotName::X);
            let section = Section { bound: &b, coords: x2, probes: vec![x_probe([2, 2])] };
            match engine_singular_directions(&section, &cfg.direction_vectors(), PI / 32.0) {
                Ok(sing) => agreement(&mut r, "2D Feynman on 32 directions", &scan, &sing),
                Err(f) => r.check("2D Feynman on 32 directions", false, f),
            }
            r.scans.push(("feynman_2d".into(), scan));
        }
        Err(f) => r.check("2D Feynman on 32 directions", false, f),
    }
    r
}

pub fn diffren(opts: &SuiteOptions) -> SuiteReport {
    let mut r = SuiteReport::new("diffren");
    let rep = diffren_check(&default_diffren_samples(), &[0.5, 1.0]);
    r.check(
        "divergence identity",
        rep.samples.len() == 20 && rep.max_rel_error < opts.diffren_tol,
        format!("{} samples, max relative error {:.2e} (tolerance {:.0e})", rep.samples.len(), rep.max_rel_error, opts.diffren_tol),
    );
    r.check("logarithm branch", rep.branch_error < 1e-9, format!("branch error {:.2e}", rep.branch_error));
    for fit in &rep.scaling {
        r.check(
            format!("scaling limit omega={}", fit.omega),
            fit.vanishes && (fit.slope - fit.omega).abs() < 0.15,
            format!("log-log slope {:.3} ± {:.3}, from {:.2e} to {:.2e}", fit.slope, fit.band, fit.first, fit.last),
        );
    }
    r
}

pub fn string_ft(opts: &SuiteOptions) -> SuiteReport {
    let mut r = SuiteReport::new("string-ft");
    let grid = default_string_ft_grid();
    let rep = string_ft_identity_check(&[0.0, 1.0, 0.0, 0.0], 1.0, &grid, STRING_FT_EPS);
    r.check(
        "sup-norm deviation",
        rep.points == 16 && rep.max_abs_deviation < opts.string_ft_tol,
        format!(
            "{} points at eps {}, sup deviation {:.2e} (relative {:.2e}, tolerance {:.0e})",
            rep.points, rep.eps, rep.max_abs_deviation, rep.max_rel_deviation, opts.string_ft_tol
        ),
    );
    r
}

fn same_species(a: &Species, b: &Species) -> bool {
    a == b
}

/// Every split of up to eight scalar factors over two vertices and two
/// species, at every pair count.
fn all_small_pairs() -> Vec<[FieldMonomial; 2]> {
    let kinds = [FieldFactor::scalar(int(0)), FieldFactor::scalar(int(1))];
    let vertex = |p: &str, a: usize, b: usize| {
        let mut f = vec![kinds[0].clone(); a];
        f.extend(vec![kinds[1].clone(); b]);
        FieldMonomial::new(p, f)
    };
    let mut out = Vec::new();
    for a0 in 0..=8 {
        for a1 in 0..=8 - a0 {
            for b0 in 0..=8 - a0 - a1 {
                for b1 in 0..=8 - a0 - a1 - b0 {
                    out.push([vertex("x", a0, a1), vertex("y", b0, b1)]);
                }
            }
        }
    }
    out
}

pub fn wick(_opts: &SuiteOptions) -> SuiteReport {
    let mut r = SuiteReport::new("wick");
    let phi4 = [FieldMonomial::new("x", vec![FieldFactor::scalar(int(0)); 4]), FieldMonomial::new("y", vec![FieldFactor::scalar(int(0)); 4])];
    let n = enumerate_contractions(&phi4, 2, &same_species).len();
    r.check("phi^4 x phi^4, two pairs", n == 72, format!("{n} patterns"));

    let mut bad = Vec::new();
    let mut cases = 0;
    for m in all_small_pairs() {
        let count = |v: &FieldMonomial| -> Vec<usize> {
            [int(0), int(1)].iter().map(|q| v.factors.iter().filter(|f| f.species.mass() == q).count()).collect()
        };
        let total = m[0].factors.len() + m[1].factors.len();
        for k in 0..=total / 2 {
            cases += 1;
            let got = enumerate_contractions(&m, k, &same_species).len();
            let (brute, formula) = (brute_force_count(&m, k, &same_species), two_vertex_count(&count(&m[0]), &count(&m[1]), k));
            if got != brute || got as u128 != formula {
                bad.push(format!("{:?}/{:?} k={k}: {got} vs {brute} vs {formula}", count(&m[0]), count(&m[1])));
            }
        }
    }
    r.check("counts against oracles", bad.is_empty(), format!("{cases} cases with at most 8 factors; mismatches {bad:?}"));

    // every contraction pattern over a mixed vertex pair built from
    // gate-passing propagators
    let a = |e: &str| FieldFactor::potential(1, int(0), e);
    let mixed = [
        FieldMonomial::new("x", vec![a("e1"), a("e2"), FieldFactor::scalar(int(0)), FieldFactor::field_strength(1, int(0))]),
        FieldMonomial::new("y", vec![a("e3"), FieldFactor::scalar(int(0)), FieldFactor::scalar(int(1)), FieldFactor::field_strength(1, int(0))]),
    ];
    match PropagatorTable::default_for(&mixed, &PropagatorSpec::new(1, int(0)).smear) {
        Ok(table) => {
            let mut worst = Vec::new();
            let mut seen = 0;
            for k in 1..=4 {
                for p in enumerate_contractions(&mixed, k, &table) {
                    seen += 1;
                    match classify_pattern(&mixed, &p, &table) {
                        Ok(c) if matches!(c.existence, Existence::Everywhere | Existence::OffThinDiagonal) => {}
                        Ok(c) => worst.push(format!("{}: {:?}", p.encode(), c.existence)),
                        Err(f) => worst.push(format!("{}: {f}", p.encode())),
                    }
                }
            }
            r.check("gate-passing terms", worst.is_empty() && seen > 0, format!("{seen} patterns; failures {worst:?}"));
        }
        Err(f) => r.check("gate-passing terms", false, f.to_string()),
    }

    let phi2 = [FieldMonomial::new("x", vec![FieldFactor::scalar(int(0)); 2]), FieldMonomial::new("y", vec![FieldFactor::scalar(int(0)); 2])];
    let table = PropagatorTable::default_for(&phi2, &PropagatorSpec::new(1, int(0)).smear);
    let dd = table.map_err(|e| e.to_string()).and_then(|t| {
        let p = enumerate_contractions(&phi2, 2, &t).into_iter().next().ok_or("no pattern")?;
        classify_pattern(&phi2, &p, &t).map_err(|e| e.to_string())
    });
    match dd {
        Ok(c) => r.check(
            "D.D",
            c.existence == Existence::OffThinDiagonal && c.degree == Some(-4) && c.freedom_bound == Some(0),
            format!("{:?}, degree {:?}, freedom bound {:?}", c.existence, c.degree, c.freedom_bound),
        ),
        Err(f) => r.check("D.D", false, f),
    }
    r
}
