use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use serde_json::json;

use wfcalc::cone::catalog::feynman_massless;
use wfcalc::cone::{bound_subset, sampled_inclusion};
use wfcalc::expr::sexp::{parse_expr, to_sexp};
use wfcalc::expr::{Chart, DistExpr, ExprError};
use wfcalc::rules::{wf_bound, ExistenceKind, WfFailure, WfReport};
use wfcalc::slf::charts::appendix_chart_analysis;
use wfcalc::slf::{admissible_delta_orders, check_delta_order, kinematic_position, kinematic_propagator, PropagatorSpec};
use wfcalc::suites::{self, SuiteOptions};
use wfcalc::wick::{classify_pattern, enumerate_all, enumerate_contractions, parse_monomials, PropagatorTable, Existence};
use wfcalc::{Rational, SlotName};

use crate::report::{CliError, Report, Status};
use crate::Command;

pub fn run(cmd: Command) -> Result<Report, CliError> {
    match cmd {
        Command::Wf { expr } => wf(&expr),
        Command::CheckProduct { left, right } => check_product(&left, &right),
        Command::Propagator { spin, mass, spec, momentum, unsmeared } => propagator(spin, &mass, spec.as_deref(), momentum, unsmeared),
        Command::DeltaOrders { spin, mass } => delta_orders(spin, &mass),
        Command::Appendix { chart } => appendix(&chart),
        Command::Wick { monomials, pairs } => wick(&monomials, pairs),
        Command::Verify { suite, seed, samples, diffren_tol, string_ft_tol, csv_dir } => {
            let opts = SuiteOptions { seed, containment_samples: samples, diffren_tol, string_ft_tol };
            verify(&suite, &opts, csv_dir.as_deref())
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

fn located(path: &Path, loc: Option<(usize, usize)>, msg: impl std::fmt::Display) -> CliError {
    let (l, c) = loc.unwrap_or((1, 1));
    CliError(format!("{}:{l}:{c}: {msg}", path.display()))
}

fn load_expr(path: &Path) -> Result<(String, DistExpr), CliError> {
    let src = read(path)?;
    match parse_expr(&src) {
        Ok(e) => Ok((src, e)),
        Err(ExprError::Parse { msg, location }) => Err(located(path, location, msg)),
        Err(e) => Err(located(path, None, e)),
    }
}

fn parse_mass(s: &str) -> Result<Rational, CliError> {
    let m = Rational::from_str(s.trim()).map_err(|_| CliError(format!("--mass: not a rational number: {s:?}")))?;
    if m < Rational::from_integer(0.into()) {
        return Err(CliError(format!("--mass: must be non-negative, got {s}")));
    }
    Ok(m)
}

fn wf_status(r: &WfReport) -> Status {
    match &r.result {
        Ok(_) => Status::Holds,
        Err(WfFailure::Existence { kind: ExistenceKind::Criterion, .. }) => Status::Violated,
        Err(WfFailure::Existence { .. }) => Status::ExistenceFailure,
        Err(WfFailure::Unknown(_)) => Status::Unknown,
    }
}

fn wf(path: &Path) -> Result<Report, CliError> {
    let (src, e) = load_expr(path)?;
    let r = wf_bound(&e);
    Report::new("wf", json!({ "expr": path, "source": src }), wf_status(&r), &r)
}

fn check_product(left: &Path, right: &Path) -> Result<Report, CliError> {
    let (ls, a) = load_expr(left)?;
    let (rs, b) = load_expr(right)?;
    let product = DistExpr::product(vec![a, b]).map_err(|e| CliError(format!("product: {e}")))?;
    let r = wf_bound(&product);
    let inputs = json!({ "left": left, "left_source": ls, "right": right, "right_source": rs });
    Report::new("check-product", inputs, wf_status(&r), json!({ "exists": r.result.is_ok(), "report": r }))
}

fn propagator(spin: Option<u32>, mass: &str, spec: Option<&Path>, momentum: bool, unsmeared: bool) -> Result<Report, CliError> {
    let (spec, spec_src) = match spec {
        Some(p) => {
            let src = read(p)?;
            let spec: PropagatorSpec =
                serde_json::from_str(&src).map_err(|e| located(p, Some((e.line(), e.column())), e))?;
            (spec, Some(src))
        }
        None => (PropagatorSpec::new(spin.expect("clap requires --spin"), parse_mass(mass)?), None),
    };
    if spec.spin == 0 {
        return Err(CliError("--spin: must be at least 1".into()));
    }
    let inputs = json!({ "spec": spec, "spec_source": spec_src, "momentum": momentum, "unsmeared": unsmeared });
    let gate = spec.gate();
    if !gate.pass {
        let result = json!({ "gate": gate, "gate_summary": gate.to_string() });
        return Report::new("propagator", inputs, Status::ExistenceFailure, result);
    }
    let expr = if momentum { kinematic_propagator(&spec, !unsmeared) } else { kinematic_position(&spec) }
        .map_err(|e| CliError(e.to_string()))?;
    let r = wf_bound(&expr);
    let mut status = wf_status(&r);
    let containment = match (&r.result, momentum) {
        (Ok(b), false) => {
            let d = feynman_massless(SlotName::X);
            let families = bound_subset(b, &d);
            let sampled = sampled_inclusion(b, &d, suites::CONTAINMENT_SAMPLES, suites::DEFAULT_SEED);
            if !families || sampled.counterexamples > 0 {
                status = Status::Violated;
            } else if sampled.unknown > 0 && status == Status::Holds {
                status = Status::Unknown;
            }
            Some(json!({ "family_inclusion": families, "sampled": sampled }))
        }
        _ => None,
    };
    let result = json!({
        "gate": gate,
        "gate_summary": gate.to_string(),
        "expr": to_sexp(&expr),
        "wf": r,
        "contained_in_feynman": containment,
    });
    Report::new("propagator", inputs, status, result)
}

#[derive(Serialize)]
struct Rejected {
    order: u32,
    reason: wfcalc::slf::DeltaBound,
    explanation: String,
}

fn delta_orders(spin: u32, mass: &str) -> Result<Report, CliError> {
    if spin == 0 {
        return Err(CliError("--spin: must be at least 1".into()));
    }
    let m = parse_mass(mass)?;
    let orders = admissible_delta_orders(spin, &m);
    let rejected: Vec<Rejected> = (0..=2 * spin)
        .filter_map(|a| check_delta_order(spin, &m, a).err().map(|b| Rejected { order: a, reason: b, explanation: b.to_string() }))
        .collect();
    let inputs = json!({ "spin": spin, "mass": m.to_string() });
    Report::new("delta-orders", inputs, Status::Complete, json!({ "orders": orders, "rejected": rejected }))
}

fn appendix(chart: &str) -> Result<Report, CliError> {
    let charts: Vec<Chart> = if chart == "all" {
        Chart::ALL.to_vec()
    } else {
        let names: Vec<&str> = Chart::ALL.iter().map(|c| c.name()).collect();
        vec![Chart::parse(chart)
            .ok_or_else(|| CliError(format!("--chart: unknown chart {chart:?}; expected one of {} or all", names.join(", "))))?]
    };
    let reports: Vec<_> = charts.into_iter().map(appendix_chart_analysis).collect();
    Report::new("appendix", json!({ "chart": chart }), Status::Complete, reports)
}

#[derive(Serialize)]
struct PatternEntry {
    pairs: String,
    remainder: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    classification: Option<wfcalc::wick::TermClassification>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn wick(path: &Path, pairs: Option<usize>) -> Result<Report, CliError> {
    let src = read(path)?;
    let monomials = parse_monomials(&src).map_err(|e| located(path, Some((e.line, e.column)), &e.message))?;
    let smear = PropagatorSpec::new(1, Rational::from_integer(0.into())).smear;
    let table = PropagatorTable::default_for(&monomials, &smear).map_err(|e| located(path, None, e))?;
    let patterns = match pairs {
        Some(k) => enumerate_contractions(&monomials, k, &table),
        None => enumerate_all(&monomials, &table),
    };
    let mut status = Status::Complete;
    let mut entries = Vec::with_capacity(patterns.len());
    for p in &patterns {
        let (classification, error) = match classify_pattern(&monomials, p, &table) {
            Ok(c) => {
                if matches!(c.existence, Existence::IllDefinedIr | Existence::Undefined) {
                    status = Status::ExistenceFailure;
                }
                (Some(c), None)
            }
            Err(e) => {
                if status == Status::Complete {
                    status = Status::Unknown;
                }
                (None, Some(e.to_string()))
            }
        };
        entries.push(PatternEntry { pairs: p.encode(), remainder: p.remainder.clone(), classification, error });
    }
    let monos: Vec<String> = monomials.iter().map(|m| m.to_string()).collect();
    let result = json!({
        "monomials": monos,
        "propagators": table.rows(),
        "pattern_count": entries.len(),
        "patterns": entries,
    });
    Report::new("wick", json!({ "monomials": path, "source": src, "pairs": pairs }), status, result)
}

fn verify(suite: &str, opts: &SuiteOptions, csv_dir: Option<&Path>) -> Result<Report, CliError> {
    let names: Vec<&str> = if suite == "all" {
        suites::suite_names()
    } else if suites::suite_names().contains(&suite) {
        vec![suite]
    } else {
        let all = suites::suite_names();
        return Err(CliError(format!("--suite: unknown suite {suite:?}; expected one of {} or all", all.join(", "))));
    };
    let reports: Vec<_> = names.iter().map(|n| suites::run_suite(n, opts).expect("listed suite")).collect();
    let status = if reports.iter().all(|r| r.passed) { Status::Complete } else { Status::Violated };
    let inputs = json!({
        "suite": suite,
        "seed": opts.seed,
        "samples": opts.containment_samples,
        "diffren_tol": opts.diffren_tol,
        "string_ft_tol": opts.string_ft_tol,
        "csv_dir": csv_dir,
    });
    let mut report = Report::new("verify", inputs, status, &reports)?;
    if let Some(dir) = csv_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError(format!("{}: {e}", dir.display())))?;
        for (name, scan) in reports.iter().flat_map(|r| &r.scans) {
            report.attachments.push((dir.join(format!("{name}.csv")), scan.to_csv()));
        }
    }
    Ok(report)
}
