//! One line per acceptance criterion, each run against its runtime budget.
//! Exits nonzero when any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use wfcalc::suites::{run_suite, SuiteOptions, DEFAULT_SEED};

/// Criterion number, suite, runtime budget.
const CRITERIA: [(u32, &str, Option<u64>); 10] = [
    (1, "wf-axioms", Some(1)),
    (2, "string-powers", Some(1)),
    (3, "gates", None),
    (4, "containment", Some(30)),
    (5, "delta-orders", None),
    // three charts at one second each
    (6, "appendix", Some(3)),
    (7, "decay", Some(300)),
    (8, "diffren", Some(10)),
    (9, "string-ft", Some(60)),
    (10, "wick", None),
];

fn main() -> ExitCode {
    // pinned here rather than taken from the library defaults
    let opts = SuiteOptions { seed: DEFAULT_SEED, containment_samples: 10_000, diffren_tol: 1e-8, string_ft_tol: 1e-5 };
    let mut failed = Vec::new();
    for (n, name, budget) in CRITERIA {
        let start = Instant::now();
        let report = run_suite(name, &opts).expect("suite is registered");
        let took = start.elapsed();
        let in_time = budget.map_or(true, |b| took < Duration::from_secs(b));
        let ok = report.passed && in_time;
        let budget_note = budget.map_or(String::new(), |b| format!(", budget {b} s"));
        println!(
            "criterion {n:>2} {:<4} {name}: {}/{} checks in {:.2} s{budget_note}",
            if ok { "PASS" } else { "FAIL" },
            report.checks.iter().filter(|c| c.passed).count(),
            report.checks.len(),
            took.as_secs_f64(),
        );
        for c in &report.checks {
            println!("    {} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
        }
        if !in_time {
            println!("    FAIL runtime exceeded the budget");
        }
        if !ok {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("failing criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
