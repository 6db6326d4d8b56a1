//! `wfcalc`: batch front end to the wavefront-set engine. Every subcommand
//! writes one JSON report (stdout unless `--output` is given) and exits
//!
//! * 0 when the result holds or the run completed,
//! * 2 on a violated criterion or an existence failure,
//! * 3 when the engine could not decide,
//! * 1 on usage or input errors.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use report::CliError;
#[cfg(test)]
use report::Status;

#[derive(Debug, Parser)]
#[command(name = "wfcalc", version, about = "Wavefront-set calculus for string-localized propagators")]
struct Cli {
    /// Write the JSON report here instead of stdout; the file is replaced
    /// atomically.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Wavefront bound of one expression in s-expression form.
    Wf { expr: PathBuf },
    /// Whether the product of two expressions exists.
    CheckProduct { left: PathBuf, right: PathBuf },
    /// Construct a kinematic string-localized propagator and bound it.
    Propagator {
        #[arg(long, required_unless_present = "spec")]
        spin: Option<u32>,
        /// Rational mass such as `0`, `1` or `3/2`.
        #[arg(long, default_value = "0")]
        mass: String,
        /// JSON propagator spec; overrides `--spin` and `--mass`.
        #[arg(long, conflicts_with = "spin")]
        spec: Option<PathBuf>,
        /// Stay in momentum space.
        #[arg(long)]
        momentum: bool,
        /// Leave the strings unsmeared (momentum space only).
        #[arg(long, requires = "momentum")]
        unsmeared: bool,
    },
    /// Delta-derivative orders admissible in the time ordering.
    DeltaOrders {
        #[arg(long)]
        spin: u32,
        #[arg(long, default_value = "0")]
        mass: String,
    },
    /// Critical covectors of a string chart: lightlike, h-minus-1,
    /// purely-spacelike or all.
    Appendix {
        #[arg(long, default_value = "all")]
        chart: String,
    },
    /// Enumerate and classify the Wick contractions of a monomial file.
    Wick {
        monomials: PathBuf,
        /// Only patterns with exactly this many contractions; all sizes by
        /// default.
        #[arg(long)]
        pairs: Option<usize>,
    },
    /// Run named check suites.
    Verify {
        /// Suite name, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Seed of the sampled checks.
        #[arg(long, default_value_t = wfcalc::suites::DEFAULT_SEED)]
        seed: u64,
        /// Sampled memberships per containment case.
        #[arg(long, default_value_t = wfcalc::suites::CONTAINMENT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = wfcalc::suites::DIFFREN_TOL)]
        diffren_tol: f64,
        #[arg(long, default_value_t = wfcalc::suites::STRING_FT_TOL)]
        string_ft_tol: f64,
        /// Write one CSV per decay scan into this directory.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command).and_then(|r| r.write(cli.output.as_deref()).map(|_| r.status)) {
        Ok(status) => ExitCode::from(status.exit_code()),
        Err(CliError(msg)) => {
            eprintln!("wfcalc: {msg}");
            ExitCode::from(1)
        }
    }
}
