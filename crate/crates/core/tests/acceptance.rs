//! Acceptance battery: one PASS/FAIL line per criterion, with the failing
//! checks listed under each FAIL. Exits nonzero if any criterion fails.
//!
//! Every tolerance, grid and seed comes from `degreenet::testcfg`. Pass a
//! criterion name fragment as an argument to run a subset.

use std::process::ExitCode;

use degreenet::verify::{run, Suite};

const CRITERIA: [(&str, Suite); 12] = [
    ("oracle exactness", Suite::Oracle),
    ("moment identities", Suite::Moments),
    ("marginal dispersion", Suite::Dispersion),
    ("power-law closed form at n=1000", Suite::Pareto),
    ("smooth reproduction bound", Suite::Repro),
    ("survival sandwich and Normal rate", Suite::Specfun),
    ("Poisson convergence", Suite::Poisson),
    ("estimator central limit", Suite::Clt),
    ("extremely sparse limit", Suite::Extreme),
    ("sparse sampler equivalence and cost", Suite::Sampler),
    ("appendix expansions and envelopes", Suite::Appendix),
    ("determinism across thread counts", Suite::Determinism),
];

fn main() -> ExitCode {
    // Ignore the libtest flags cargo passes along; keep bare words as filters.
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (label, suite) in CRITERIA {
        if !filters.is_empty() && !filters.iter().any(|f| label.contains(f.as_str()) || suite.name() == f) {
            continue;
        }
        match run(suite) {
            Ok(report) if report.passed => {
                println!("PASS {label} [{suite}] ({:.1}s)", report.elapsed_seconds);
            }
            Ok(report) => {
                failed += 1;
                println!("FAIL {label} [{suite}] ({:.1}s)", report.elapsed_seconds);
                for c in report.failures() {
                    let bound = match (c.lower, c.upper) {
                        (Some(l), Some(u)) => format!("in [{l}, {u}]"),
                        (None, Some(u)) if c.strict => format!("< {u}"),
                        (None, Some(u)) => format!("<= {u}"),
                        (Some(l), None) => format!(">= {l}"),
                        (None, None) => String::new(),
                    };
                    println!("    {}: measured {} want {bound} {}", c.name, c.measured, c.note);
                }
            }
            Err(e) => {
                failed += 1;
                println!("FAIL {label} [{suite}] error: {e}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
